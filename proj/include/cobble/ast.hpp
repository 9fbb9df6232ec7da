#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cobble/types.hpp"

namespace cobble {

// Byte range into the owning unit's text. end is exclusive. line is the
// 1-based line of the first byte.
struct SourceSpan {
  int line = 0;
  size_t start = 0;
  size_t end = 0;
};

enum class BinOp : uint8_t {
  Add, Sub, Mul, Div, Mod, Shl, Shr,
  Lt, Gt, Le, Ge, Eq, Ne,
  BitAnd, BitXor, BitOr, LogAnd, LogOr,
};

enum class UnOp : uint8_t {
  Plus, Minus, Not, BitNot, AddrOf, PreInc, PreDec, PostInc, PostDec,
};

enum class AssignOp : uint8_t {
  Assign, Add, Sub, Mul, Div, Mod, Shl, Shr, And, Xor, Or,
};

struct Symbol;  // defined in analyze.hpp

struct Expr {
  enum class Kind : uint8_t {
    Var,        // name
    Literal,    // lexeme (numeric or char)
    String,     // lexeme including quotes
    Index,      // a[b]
    Deref,      // *a
    Member,     // a.name / a->name (arrow flag)
    Unary,      // un_op a  (or a un_op for post inc/dec)
    Binary,     // a bin_op b
    Assign,     // a assign_op b
    Cond,       // a ? b : c
    Comma,      // a, b
    Call,       // name(args...)
    Cast,       // (cast_type)a
    SizeofExpr, // sizeof(a)
    SizeofType, // sizeof(type)
    InitList,   // { args... } brace initializer
  };

  Kind kind = Kind::Var;
  SourceSpan span;
  const TypeDesc* type = nullptr;  // set by the analyzer
  Expr* a = nullptr;
  Expr* b = nullptr;
  Expr* c = nullptr;
  std::vector<Expr*> args;  // Call arguments / InitList elements
  std::string name;         // Var, Member field, Call callee
  std::string lexeme;       // Literal/String original token text
  BinOp bin_op = BinOp::Add;
  UnOp un_op = UnOp::Plus;
  AssignOp assign_op = AssignOp::Assign;
  bool arrow = false;                   // Member: -> instead of .
  const TypeDesc* cast_type = nullptr;  // Cast / SizeofType
  const Symbol* sym = nullptr;          // Var resolution, set by the analyzer

  bool is_basic() const {
    return kind == Kind::Var || kind == Kind::Index || kind == Kind::Deref ||
           kind == Kind::Member;
  }
};

struct Stmt;

// One declarator of a declaration. Multi-declarator statements are split
// into consecutive Decl statements at parse time; for-init keeps a group.
struct Declarator {
  std::string name;
  const TypeDesc* type = nullptr;
  Expr* init = nullptr;  // may be an InitList
  SourceSpan name_span;
  bool is_static = false;
};

struct Stmt {
  enum class Kind : uint8_t {
    Compound, Decl, ExprStmt, If, While, DoWhile, For, Return,
    Break, Continue, Switch, Case, Default, Label, Goto, Empty,
    RecordDef,
  };

  Kind kind = Stmt::Kind::Compound;
  SourceSpan span;  // whole statement including trailing ';' or '}'
  std::vector<Stmt*> stmts;  // Compound
  Declarator decl;           // Decl
  Expr* expr = nullptr;      // ExprStmt/Return/Switch subject/If-While cond/Case value
  Stmt* body = nullptr;      // loop/switch/if-then/labeled inner
  Stmt* orelse = nullptr;    // If else branch
  // For parts; init is either decl_group or init_expr (or neither).
  std::vector<Declarator> decl_group;
  Expr* init_expr = nullptr;
  Expr* cond = nullptr;
  Expr* step = nullptr;
  std::string label;               // Label/Goto
  const RecordType* record = nullptr;  // RecordDef
};

struct Param {
  std::string name;
  const TypeDesc* type = nullptr;
  SourceSpan name_span;
};

struct FunctionDef {
  std::string name;
  const TypeDesc* return_type = nullptr;
  std::vector<Param> params;
  Stmt* body = nullptr;  // Compound
  SourceSpan span;
  SourceSpan name_span;
};

// Typedefs are resolved to their underlying types while parsing and are
// not represented in the tree; printing re-emits resolved types.
struct PreambleItem {
  enum class Kind : uint8_t { Include, Record, Var };
  Kind kind = Kind::Include;
  SourceSpan span;
  std::string header;        // Include: "stdlib.h"
  const RecordType* record = nullptr;
  Declarator var;            // Var declarator (init optional)
};

// One snippet: preamble items plus exactly one function definition.
struct SourceUnit {
  std::string text;  // the exact source this AST was parsed from
  std::vector<PreambleItem> preamble;
  FunctionDef* fn = nullptr;
  TypePool types;
  // Every 'struct Tag' mention with its resolved record, for renaming.
  std::vector<std::pair<SourceSpan, const RecordType*>> tag_mentions;
  // Records defined at file scope (their tags are file-scope names).
  std::vector<const RecordType*> file_records;

  std::deque<Expr> expr_arena;
  std::deque<Stmt> stmt_arena;
  std::deque<FunctionDef> fn_arena;

  Expr* make_expr() { return &expr_arena.emplace_back(); }
  Stmt* make_stmt() { return &stmt_arena.emplace_back(); }
  FunctionDef* make_fn() { return &fn_arena.emplace_back(); }

  std::string span_text(const SourceSpan& s) const {
    return text.substr(s.start, s.end - s.start);
  }
};

struct Diagnostic {
  enum class Kind : uint8_t { Syntax, Unsupported };
  Kind kind = Kind::Syntax;
  int line = 0;
  std::string message;    // Syntax: what went wrong
  std::string construct;  // Unsupported: which construct
};

struct ParseResult {
  std::unique_ptr<SourceUnit> unit;  // null on failure
  std::vector<Diagnostic> diags;
  bool ok() const { return unit != nullptr; }
};

}  // namespace cobble
