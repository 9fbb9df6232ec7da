#pragma once

#include <map>
#include <optional>

#include "cobble/ast.hpp"

namespace cobble {

enum class BasicExprContext : uint8_t {
  Rvalue, LvalueTarget, AddressOfOperand, SizeofOperand,
};
const char* context_tag(BasicExprContext c);

struct Symbol {
  enum class Kind : uint8_t { Param, Local, FileVar, Function, Library };
  Kind kind = Kind::Local;
  std::string name;
  const TypeDesc* type = nullptr;
  int decl_line = 0;  // normalized line of declaration; 0 for params
  bool address_taken = false;
  bool is_static = false;
  int param_index = -1;
  // True when every assignment to this variable is the top-level write
  // of a probe-eligible statement (or its declaration initializer), so
  // the profiler observes each written value. Basis of the stable set.
  bool writes_observable = true;
  bool has_init = false;        // locals: declared with initializer
  // Library/function signature.
  std::vector<const TypeDesc*> sig_params;
  const TypeDesc* sig_ret = nullptr;
};

struct BasicExprRef {
  Expr* expr = nullptr;
  BasicExprContext context = BasicExprContext::Rvalue;
  Stmt* stmt = nullptr;  // owning statement
};

// Where probes may attach for one statement and what the statement
// assigns. Probes cover only expressions evaluated unconditionally at
// statement entry in statements free of calls and nested side effects;
// that keeps "one observation per execution" exact.
struct StmtNote {
  Stmt* parent_block = nullptr;  // enclosing Compound, null for fn body
  int index_in_block = -1;
  bool probe_eligible = false;
  std::vector<Expr*> pre_exprs;   // rvalue basic exprs probed before stmt
  Expr* post_target = nullptr;    // assigned basic lvalue logged after stmt
  const Symbol* decl_sym = nullptr;  // Decl statements: the declared local
};

struct FunctionInfo {
  std::deque<Symbol> symbols;
  std::vector<Symbol*> params;
  std::vector<Symbol*> locals;
  std::vector<Symbol*> file_vars;
  Symbol* self = nullptr;
  std::vector<BasicExprRef> basic_exprs;  // source order
  std::vector<Stmt*> stmts;               // pre-order
  std::map<const Stmt*, StmtNote> notes;
  std::map<std::string, std::vector<SourceSpan>> global_refs;
  int loc = 0;       // lines of the function definition
  int branches = 0;  // conditional constructs (if/loops/cases/?:)
  // Either construct lets control enter a block below a declaration, so
  // downstream value tracking of locals is disabled when present.
  bool has_goto = false;
  bool has_switch = false;
};

struct AnalyzeOutcome {
  bool ok = false;
  std::vector<Diagnostic> diags;
  FunctionInfo info;
};

// Resolves names, types every expression, and fills FunctionInfo.
// Expects a unit parsed from normalized text so line numbers are final.
AnalyzeOutcome analyze_unit(SourceUnit& u);

// All basic expressions (variables, array accesses, dereferences, field
// accesses) with their syntactic contexts, in source order.
std::vector<BasicExprRef> enumerate_basic_exprs(SourceUnit& u);

// Prefixes every file-scope name (the function, file-scope variables,
// file-scope struct tags) and reparses. Fails only if some identifier in
// the unit already carries the prefixed name (capture).
ParseResult rename_globals(const SourceUnit& u, const FunctionInfo& info,
                           std::string_view prefix);

// parse -> print normalized -> reparse -> analyze. The returned unit's
// text is the normalized form; info lines refer to it.
struct FrontResult {
  std::unique_ptr<SourceUnit> unit;
  FunctionInfo info;
  std::vector<Diagnostic> diags;
  bool ok() const { return unit != nullptr; }
};
FrontResult front_process(std::string_view src);

// Numeric literal classification per C99 (LP64), including suffixes,
// bases and char escapes. Floats report value in fvalue.
struct LiteralInfo {
  Scalar type = Scalar::I32;
  int128 value = 0;
  double fvalue = 0.0;
};
std::optional<LiteralInfo> classify_literal(std::string_view lexeme);

}  // namespace cobble
