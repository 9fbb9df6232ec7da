#include "cobble/parser.hpp"

#include <cassert>
#include <cstdlib>
#include <map>
#include <set>

#include "cobble/lexer.hpp"

namespace cobble {

namespace {

const char* kAllowedIncludes[] = {"stdlib.h", "string.h", "stdint.h"};

struct ParseError {
  Diagnostic diag;
};

[[noreturn]] void syntax_error(int line, std::string msg) {
  Diagnostic d;
  d.kind = Diagnostic::Kind::Syntax;
  d.line = line;
  d.message = std::move(msg);
  throw ParseError{std::move(d)};
}

[[noreturn]] void unsupported(int line, std::string construct) {
  Diagnostic d;
  d.kind = Diagnostic::Kind::Unsupported;
  d.line = line;
  d.construct = std::move(construct);
  throw ParseError{std::move(d)};
}

const std::set<std::string> kKeywords = {
    "auto", "break", "case", "char", "const", "continue", "default", "do",
    "double", "else", "enum", "extern", "float", "for", "goto", "if",
    "inline", "int", "long", "register", "restrict", "return", "short",
    "signed", "sizeof", "static", "struct", "switch", "typedef", "union",
    "unsigned", "void", "volatile", "while",
};

// Typedef names the allowlisted headers provide, resolved eagerly.
const std::pair<const char*, Scalar> kStdTypedefs[] = {
    {"int8_t", Scalar::I8},    {"int16_t", Scalar::I16},
    {"int32_t", Scalar::I32},  {"int64_t", Scalar::I64},
    {"uint8_t", Scalar::U8},   {"uint16_t", Scalar::U16},
    {"uint32_t", Scalar::U32}, {"uint64_t", Scalar::U64},
    {"size_t", Scalar::U64},   {"ssize_t", Scalar::I64},
    {"intptr_t", Scalar::I64}, {"uintptr_t", Scalar::U64},
};

class Parser {
 public:
  Parser(std::string_view src, const std::vector<Token>& toks)
      : src_(src), toks_(toks) {
    unit_ = std::make_unique<SourceUnit>();
    unit_->text = std::string(src);
    push_scope();
  }

  std::unique_ptr<SourceUnit> run() {
    int fn_count = 0;
    while (!at_eof()) {
      if (cur().kind == Token::Kind::Directive) {
        parse_directive();
        continue;
      }
      if (parse_top_item()) fn_count++;
    }
    if (fn_count == 0)
      syntax_error(cur().line, "no function definition");
    return std::move(unit_);
  }

 private:
  std::string_view src_;
  const std::vector<Token>& toks_;
  size_t pos_ = 0;
  std::unique_ptr<SourceUnit> unit_;

  struct Scope {
    std::map<std::string, const TypeDesc*> typedefs;
    std::map<std::string, RecordType*> tags;
  };
  std::vector<Scope> scopes_;
  bool saw_stdint_ = false;
  bool saw_any_include_ = false;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(size_t k = 1) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at_eof() const { return cur().kind == Token::Kind::Eof; }
  void advance() { if (!at_eof()) pos_++; }

  bool is_punct(std::string_view p) const {
    return cur().kind == Token::Kind::Punct && cur().text == p;
  }
  bool is_kw(std::string_view k) const {
    return cur().kind == Token::Kind::Ident && cur().text == k;
  }
  void expect(std::string_view p) {
    if (!is_punct(p))
      syntax_error(cur().line, "expected '" + std::string(p) + "' before '" +
                                   cur().text + "'");
    advance();
  }
  std::string expect_ident(const char* what) {
    if (cur().kind != Token::Kind::Ident || kKeywords.count(cur().text))
      syntax_error(cur().line, std::string("expected ") + what);
    std::string s = cur().text;
    advance();
    return s;
  }

  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }

  const TypeDesc* lookup_typedef(const std::string& n) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->typedefs.find(n);
      if (f != it->typedefs.end()) return f->second;
    }
    return nullptr;
  }
  RecordType* lookup_tag(const std::string& n) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->tags.find(n);
      if (f != it->tags.end()) return f->second;
    }
    return nullptr;
  }

  SourceSpan span_from(const Token& t) const {
    return {t.line, t.start, t.end};
  }
  SourceSpan span_between(const Token& first, const Token& last) const {
    return {first.line, first.start, last.end};
  }

  // --- preprocessor ---

  void parse_directive() {
    const Token& t = cur();
    std::string body = t.text;
    // Only "#include <hdr>" / "#include "hdr"" survive; everything else
    // is outside the subset.
    size_t h = body.find_first_not_of("# \t");
    if (h == std::string::npos || body.compare(h, 7, "include") != 0)
      unsupported(t.line, "preprocessor directive");
    size_t lt = body.find_first_of("<\"", h + 7);
    if (lt == std::string::npos)
      syntax_error(t.line, "malformed include");
    char close = body[lt] == '<' ? '>' : '"';
    size_t gt = body.find(close, lt + 1);
    if (gt == std::string::npos)
      syntax_error(t.line, "malformed include");
    std::string hdr = body.substr(lt + 1, gt - lt - 1);
    if (!include_allowlisted(hdr))
      unsupported(t.line, "include <" + hdr + ">");
    if (hdr == "stdint.h") saw_stdint_ = true;
    saw_any_include_ = true;
    if (saw_any_include_) {
      // size_t is in scope once any allowlisted header is present.
      scopes_.front().typedefs["size_t"] = unit_->types.scalar(Scalar::U64);
    }
    if (saw_stdint_) {
      for (const auto& [name, sc] : kStdTypedefs)
        scopes_.front().typedefs[name] = unit_->types.scalar(sc);
    }
    // Deduplicate repeated includes.
    for (const auto& it : unit_->preamble)
      if (it.kind == PreambleItem::Kind::Include && it.header == hdr) {
        advance();
        return;
      }
    PreambleItem item;
    item.kind = PreambleItem::Kind::Include;
    item.span = span_from(t);
    item.header = hdr;
    unit_->preamble.push_back(std::move(item));
    advance();
  }

  // --- declaration specifiers ---

  bool starts_type() const {
    if (cur().kind != Token::Kind::Ident) return false;
    const std::string& s = cur().text;
    if (s == "const" || s == "static" || s == "struct" || s == "void" ||
        s == "char" || s == "short" || s == "int" || s == "long" ||
        s == "float" || s == "double" || s == "signed" || s == "unsigned")
      return true;
    if (s == "union" || s == "enum" || s == "volatile" || s == "restrict" ||
        s == "typedef" || s == "extern" || s == "register" || s == "auto" ||
        s == "inline")
      return true;  // type-ish; the specifier parser rejects with detail
    return lookup_typedef(s) != nullptr;
  }

  struct Specifiers {
    const TypeDesc* base = nullptr;
    bool is_static = false;
    bool is_typedef = false;
    bool defined_record = false;  // the specifier itself defined a struct
  };

  Specifiers parse_specifiers() {
    Specifiers out;
    int n_char = 0, n_short = 0, n_int = 0, n_long = 0, n_float = 0,
        n_double = 0, n_void = 0;
    int sign = 0;  // +1 signed, -1 unsigned
    bool any = false;
    const TypeDesc* named = nullptr;
    for (;;) {
      if (cur().kind != Token::Kind::Ident) break;
      const std::string& s = cur().text;
      int line = cur().line;
      if (s == "const") { advance(); continue; }
      if (s == "volatile") unsupported(line, "volatile");
      if (s == "restrict") unsupported(line, "restrict");
      if (s == "union") unsupported(line, "union");
      if (s == "enum") unsupported(line, "enum");
      if (s == "extern") unsupported(line, "extern");
      if (s == "register") unsupported(line, "register");
      if (s == "auto") unsupported(line, "auto storage class");
      if (s == "inline") unsupported(line, "inline");
      if (s == "static") { out.is_static = true; advance(); continue; }
      if (s == "typedef") { out.is_typedef = true; advance(); continue; }
      if (s == "struct") {
        named = parse_struct_specifier(&out.defined_record);
        any = true;
        continue;
      }
      if (s == "void") { n_void++; any = true; advance(); continue; }
      if (s == "char") { n_char++; any = true; advance(); continue; }
      if (s == "short") { n_short++; any = true; advance(); continue; }
      if (s == "int") { n_int++; any = true; advance(); continue; }
      if (s == "long") { n_long++; any = true; advance(); continue; }
      if (s == "float") { n_float++; any = true; advance(); continue; }
      if (s == "double") { n_double++; any = true; advance(); continue; }
      if (s == "signed") { sign = 1; any = true; advance(); continue; }
      if (s == "unsigned") { sign = -1; any = true; advance(); continue; }
      if (!any && !kKeywords.count(s)) {
        if (const TypeDesc* td = lookup_typedef(s)) {
          named = td;
          any = true;
          advance();
          continue;
        }
      }
      break;
    }
    if (!any)
      syntax_error(cur().line, "expected type before '" + cur().text + "'");
    if (named) {
      out.base = named;
      return out;
    }
    int line = cur().line;
    bool uns = sign == -1;
    Scalar sc;
    if (n_void) {
      sc = Scalar::Void;
    } else if (n_float) {
      sc = Scalar::F32;
    } else if (n_double) {
      if (n_long) unsupported(line, "long double");
      sc = Scalar::F64;
    } else if (n_char) {
      sc = uns ? Scalar::U8 : Scalar::I8;
    } else if (n_short) {
      sc = uns ? Scalar::U16 : Scalar::I16;
    } else if (n_long) {
      sc = uns ? Scalar::U64 : Scalar::I64;  // LP64: long == long long
    } else {
      sc = uns ? Scalar::U32 : Scalar::I32;
    }
    out.base = unit_->types.scalar(sc);
    return out;
  }

  const TypeDesc* parse_struct_specifier(bool* defined) {
    const Token& kw = cur();
    advance();  // struct
    if (is_punct("{")) unsupported(kw.line, "anonymous struct");
    std::string tag = expect_ident("struct tag");
    const Token& tag_tok = toks_[pos_ - 1];
    if (is_punct("{")) {
      if (defined) *defined = true;
      // Definition. The tag is registered before fields so that
      // self-referential pointers resolve.
      RecordType* rec = unit_->types.make_record(tag);
      scopes_.back().tags[tag] = rec;
      if (scopes_.size() == 1) unit_->file_records.push_back(rec);
      unit_->tag_mentions.push_back({span_from(tag_tok), rec});
      advance();
      while (!is_punct("}")) {
        if (at_eof()) syntax_error(cur().line, "unterminated struct");
        Specifiers fs = parse_specifiers();
        if (fs.is_static || fs.is_typedef)
          syntax_error(cur().line, "storage class in struct field");
        for (;;) {
          Declarator d = parse_declarator(fs.base, /*need_name=*/true);
          if (d.init) syntax_error(cur().line, "initializer in struct field");
          rec->fields.push_back({d.name, d.type});
          if (is_punct(",")) { advance(); continue; }
          break;
        }
        expect(";");
      }
      advance();
      return unit_->types.record(rec);
    }
    RecordType* rec = lookup_tag(tag);
    if (!rec) {
      // Incomplete forward reference; usable behind a pointer только.
      rec = unit_->types.make_record(tag);
      scopes_.back().tags[tag] = rec;
      if (scopes_.size() == 1) unit_->file_records.push_back(rec);
    }
    unit_->tag_mentions.push_back({span_from(tag_tok), rec});
    return unit_->types.record(rec);
  }

  // --- declarators ---

  Declarator parse_declarator(const TypeDesc* base, bool need_name) {
    Declarator d;
    const TypeDesc* t = base;
    while (is_punct("*")) {
      advance();
      while (is_kw("const")) advance();
      if (is_kw("volatile")) unsupported(cur().line, "volatile");
      if (is_kw("restrict")) unsupported(cur().line, "restrict");
      t = unit_->types.pointer(t);
    }
    if (is_punct("("))
      unsupported(cur().line, "function pointer declarator");
    if (cur().kind == Token::Kind::Ident && !kKeywords.count(cur().text)) {
      d.name = cur().text;
      d.name_span = span_from(cur());
      advance();
    } else if (need_name) {
      syntax_error(cur().line, "expected declarator name");
    }
    // Array suffixes apply outermost-first.
    std::vector<long long> dims;
    while (is_punct("[")) {
      advance();
      if (is_punct("]")) {
        dims.push_back(-1);  // size from initializer
        advance();
        continue;
      }
      if (cur().kind != Token::Kind::Number)
        unsupported(cur().line, "non-constant array size");
      char* end = nullptr;
      long long n = strtoll(cur().text.c_str(), &end, 0);
      if (n <= 0) syntax_error(cur().line, "bad array size");
      dims.push_back(n);
      advance();
      expect("]");
    }
    for (auto it = dims.rbegin(); it != dims.rend(); ++it)
      t = unit_->types.array(t, *it);
    d.type = t;
    return d;
  }

  Expr* parse_initializer() {
    if (is_punct("{")) {
      const Token& open = cur();
      advance();
      Expr* e = unit_->make_expr();
      e->kind = Expr::Kind::InitList;
      while (!is_punct("}")) {
        if (is_punct(".") || is_punct("["))
          unsupported(cur().line, "designated initializer");
        e->args.push_back(parse_initializer());
        if (is_punct(",")) { advance(); continue; }
        break;
      }
      const Token& close = cur();
      expect("}");
      e->span = span_between(open, close);
      return e;
    }
    return parse_assign_expr();
  }

  // --- top level ---

  // Returns true when the item was a function definition.
  bool parse_top_item() {
    const Token& first = cur();
    Specifiers spec = parse_specifiers();
    if (spec.is_typedef) {
      // Resolved and erased: later uses print as the underlying type.
      Declarator d = parse_declarator(spec.base, /*need_name=*/true);
      expect(";");
      scopes_.back().typedefs[d.name] = d.type;
      return false;
    }
    // Bare "struct S { ... };" defines a record with no declarators.
    if (is_punct(";")) {
      const Token& semi = cur();
      advance();
      if (spec.base->is_record()) {
        PreambleItem item;
        item.kind = PreambleItem::Kind::Record;
        item.span = span_between(first, semi);
        item.record = spec.base->record;
        unit_->preamble.push_back(std::move(item));
        return false;
      }
      syntax_error(semi.line, "declaration declares nothing");
    }
    if (spec.defined_record) {
      // "struct S { ... } x;": the definition becomes its own preamble
      // item so declarators can print as plain "struct S x".
      PreambleItem item;
      item.kind = PreambleItem::Kind::Record;
      item.span = span_between(first, cur());
      item.record = spec.base->record;
      unit_->preamble.push_back(std::move(item));
    }
    Declarator d = parse_declarator(spec.base, /*need_name=*/true);
    if (is_punct("(")) {
      parse_function_def(spec, d, first);
      return true;
    }
    // File-scope variables, possibly several declarators.
    for (;;) {
      if (is_punct("=")) {
        advance();
        d.init = parse_initializer();
      }
      d.is_static = spec.is_static;
      PreambleItem item;
      item.kind = PreambleItem::Kind::Var;
      item.span = span_between(first, cur());
      item.var = d;
      unit_->preamble.push_back(std::move(item));
      if (is_punct(",")) {
        advance();
        d = parse_declarator(spec.base, /*need_name=*/true);
        continue;
      }
      break;
    }
    expect(";");
    return false;
  }

  void parse_function_def(const Specifiers& spec, const Declarator& d,
                          const Token& first) {
    if (unit_->fn)
      unsupported(cur().line, "multiple function definitions");
    if (d.type->is_array())
      syntax_error(cur().line, "function returning array");
    FunctionDef* fn = unit_->make_fn();
    fn->name = d.name;
    fn->name_span = d.name_span;
    fn->return_type = d.type;
    if (spec.is_static) unsupported(first.line, "static function");
    expect("(");
    push_scope();
    if (is_kw("void") && peek().is(")")) {
      advance();
    } else if (!is_punct(")")) {
      for (;;) {
        if (is_punct("..."))
          unsupported(cur().line, "variadic function");
        Specifiers ps = parse_specifiers();
        if (ps.is_static || ps.is_typedef)
          syntax_error(cur().line, "storage class in parameter");
        Declarator pd = parse_declarator(ps.base, /*need_name=*/true);
        Param p;
        p.name = pd.name;
        p.name_span = pd.name_span;
        // Array parameters decay to pointers.
        p.type = pd.type->is_array() ? unit_->types.pointer(pd.type->elem)
                                     : pd.type;
        fn->params.push_back(std::move(p));
        if (is_punct(",")) { advance(); continue; }
        break;
      }
    }
    expect(")");
    if (is_punct(";"))
      unsupported(cur().line, "function prototype without body");
    fn->body = parse_compound();
    pop_scope();
    fn->span = {first.line, first.start, fn->body->span.end};
    unit_->fn = fn;
  }

  // --- statements ---

  Stmt* parse_compound() {
    const Token& open = cur();
    expect("{");
    push_scope();
    Stmt* s = unit_->make_stmt();
    s->kind = Stmt::Kind::Compound;
    while (!is_punct("}")) {
      if (at_eof())
        syntax_error(cur().line, "unexpected end of input in block");
      parse_stmt_into(s->stmts);
    }
    const Token& close = cur();
    advance();
    pop_scope();
    s->span = span_between(open, close);
    return s;
  }

  // Declarations split into one statement per declarator, so a statement
  // list is the natural parse target.
  void parse_stmt_into(std::vector<Stmt*>& out) {
    if (cur().kind == Token::Kind::Directive)
      unsupported(cur().line, "preprocessor directive in function body");
    if (starts_type()) {
      parse_decl_stmts(out);
      return;
    }
    out.push_back(parse_stmt());
  }

  void parse_decl_stmts(std::vector<Stmt*>& out) {
    const Token& first = cur();
    Specifiers spec = parse_specifiers();
    if (spec.is_typedef) {
      Declarator d = parse_declarator(spec.base, true);
      expect(";");
      scopes_.back().typedefs[d.name] = d.type;
      Stmt* s = unit_->make_stmt();
      s->kind = Stmt::Kind::Empty;  // placeholder; printer drops it
      s->span = span_between(first, toks_[pos_ - 1]);
      out.push_back(s);
      return;
    }
    if (is_punct(";")) {
      const Token& semi = cur();
      advance();
      if (spec.base->is_record()) {
        Stmt* s = unit_->make_stmt();
        s->kind = Stmt::Kind::RecordDef;
        s->record = spec.base->record;
        s->span = span_between(first, semi);
        out.push_back(s);
        return;
      }
      syntax_error(semi.line, "declaration declares nothing");
    }
    // "struct S { ... } x;" defines the record and declares; split into
    // a RecordDef statement followed by plain declarations.
    if (spec.defined_record) {
      Stmt* s = unit_->make_stmt();
      s->kind = Stmt::Kind::RecordDef;
      s->record = spec.base->record;
      s->span = span_between(first, toks_[pos_ - 1]);
      out.push_back(s);
    }
    for (;;) {
      Declarator d = parse_declarator(spec.base, true);
      if (is_punct("=")) {
        advance();
        d.init = parse_initializer();
      }
      d.is_static = spec.is_static;
      Stmt* s = unit_->make_stmt();
      s->kind = Stmt::Kind::Decl;
      s->decl = d;
      s->span = span_between(first, cur());
      out.push_back(s);
      if (is_punct(",")) { advance(); continue; }
      break;
    }
    const Token& semi = cur();
    expect(";");
    out.back()->span.end = semi.end;
  }

  Stmt* parse_stmt() {
    const Token& first = cur();
    auto finish = [&](Stmt* s) {
      s->span = span_between(first, toks_[pos_ - 1]);
      return s;
    };

    if (is_punct("{")) return parse_compound();
    if (is_punct(";")) {
      advance();
      Stmt* s = unit_->make_stmt();
      s->kind = Stmt::Kind::Empty;
      return finish(s);
    }
    if (cur().kind == Token::Kind::Ident) {
      const std::string& kw = cur().text;
      if (kw == "if") return parse_if(first);
      if (kw == "while") {
        advance();
        expect("(");
        Stmt* s = unit_->make_stmt();
        s->kind = Stmt::Kind::While;
        s->cond = parse_expr();
        expect(")");
        s->body = parse_stmt();
        return finish(s);
      }
      if (kw == "do") {
        advance();
        Stmt* s = unit_->make_stmt();
        s->kind = Stmt::Kind::DoWhile;
        s->body = parse_stmt();
        if (!is_kw("while")) syntax_error(cur().line, "expected while");
        advance();
        expect("(");
        s->cond = parse_expr();
        expect(")");
        expect(";");
        return finish(s);
      }
      if (kw == "for") return parse_for(first);
      if (kw == "switch") {
        advance();
        expect("(");
        Stmt* s = unit_->make_stmt();
        s->kind = Stmt::Kind::Switch;
        s->expr = parse_expr();
        expect(")");
        if (!is_punct("{"))
          syntax_error(cur().line, "switch body must be a block");
        s->body = parse_compound();
        return finish(s);
      }
      if (kw == "return") {
        advance();
        Stmt* s = unit_->make_stmt();
        s->kind = Stmt::Kind::Return;
        if (!is_punct(";")) s->expr = parse_expr();
        expect(";");
        return finish(s);
      }
      if (kw == "break") {
        advance();
        expect(";");
        Stmt* s = unit_->make_stmt();
        s->kind = Stmt::Kind::Break;
        return finish(s);
      }
      if (kw == "continue") {
        advance();
        expect(";");
        Stmt* s = unit_->make_stmt();
        s->kind = Stmt::Kind::Continue;
        return finish(s);
      }
      if (kw == "goto") {
        advance();
        Stmt* s = unit_->make_stmt();
        s->kind = Stmt::Kind::Goto;
        s->label = expect_ident("label");
        expect(";");
        return finish(s);
      }
      if (kw == "case") {
        advance();
        Stmt* s = unit_->make_stmt();
        s->kind = Stmt::Kind::Case;
        s->expr = parse_cond_expr();
        expect(":");
        s->body = parse_stmt();
        if (s->body->kind == Stmt::Kind::Decl)
          syntax_error(first.line, "a label may not precede a declaration");
        return finish(s);
      }
      if (kw == "default") {
        advance();
        expect(":");
        Stmt* s = unit_->make_stmt();
        s->kind = Stmt::Kind::Default;
        s->body = parse_stmt();
        if (s->body->kind == Stmt::Kind::Decl)
          syntax_error(first.line, "a label may not precede a declaration");
        return finish(s);
      }
      if (kw == "asm" || kw == "__asm__")
        unsupported(first.line, "inline assembly");
      // Label: ident ':' (but not '::', C has none).
      if (!kKeywords.count(kw) && peek().is(":")) {
        Stmt* s = unit_->make_stmt();
        s->kind = Stmt::Kind::Label;
        s->label = kw;
        advance();
        advance();
        s->body = parse_stmt();
        if (s->body->kind == Stmt::Kind::Decl)
          syntax_error(first.line, "a label may not precede a declaration");
        return finish(s);
      }
    }
    Stmt* s = unit_->make_stmt();
    s->kind = Stmt::Kind::ExprStmt;
    s->expr = parse_expr();
    expect(";");
    return finish(s);
  }

  Stmt* parse_if(const Token& first) {
    advance();
    expect("(");
    Stmt* s = unit_->make_stmt();
    s->kind = Stmt::Kind::If;
    s->cond = parse_expr();
    expect(")");
    s->body = parse_stmt();
    if (is_kw("else")) {
      advance();
      s->orelse = parse_stmt();
    }
    s->span = span_between(first, toks_[pos_ - 1]);
    return s;
  }

  Stmt* parse_for(const Token& first) {
    advance();
    expect("(");
    Stmt* s = unit_->make_stmt();
    s->kind = Stmt::Kind::For;
    push_scope();
    if (!is_punct(";")) {
      if (starts_type()) {
        Specifiers spec = parse_specifiers();
        if (spec.is_static || spec.is_typedef || spec.base->is_record())
          unsupported(cur().line, "declaration form in for-init");
        for (;;) {
          Declarator d = parse_declarator(spec.base, true);
          if (is_punct("=")) {
            advance();
            d.init = parse_initializer();
          }
          s->decl_group.push_back(std::move(d));
          if (is_punct(",")) { advance(); continue; }
          break;
        }
      } else {
        s->init_expr = parse_expr();
      }
    }
    expect(";");
    if (!is_punct(";")) s->cond = parse_expr();
    expect(";");
    if (!is_punct(")")) s->step = parse_expr();
    expect(")");
    s->body = parse_stmt();
    pop_scope();
    s->span = span_between(first, toks_[pos_ - 1]);
    return s;
  }

  // --- expressions ---
  // Precedence climbing over the C binary operator table.

  struct OpInfo {
    const char* tok;
    BinOp op;
    int prec;
  };
  static constexpr OpInfo kBinOps[] = {
      {"||", BinOp::LogOr, 1},  {"&&", BinOp::LogAnd, 2},
      {"|", BinOp::BitOr, 3},   {"^", BinOp::BitXor, 4},
      {"&", BinOp::BitAnd, 5},  {"==", BinOp::Eq, 6},
      {"!=", BinOp::Ne, 6},     {"<", BinOp::Lt, 7},
      {">", BinOp::Gt, 7},      {"<=", BinOp::Le, 7},
      {">=", BinOp::Ge, 7},     {"<<", BinOp::Shl, 8},
      {">>", BinOp::Shr, 8},    {"+", BinOp::Add, 9},
      {"-", BinOp::Sub, 9},     {"*", BinOp::Mul, 10},
      {"/", BinOp::Div, 10},    {"%", BinOp::Mod, 10},
  };

  const OpInfo* match_binop() const {
    if (cur().kind != Token::Kind::Punct) return nullptr;
    for (const auto& info : kBinOps)
      if (cur().text == info.tok) return &info;
    return nullptr;
  }

  Expr* parse_expr() {  // comma level
    Expr* e = parse_assign_expr();
    while (is_punct(",")) {
      advance();
      Expr* rhs = parse_assign_expr();
      Expr* c = unit_->make_expr();
      c->kind = Expr::Kind::Comma;
      c->a = e;
      c->b = rhs;
      c->span = {e->span.line, e->span.start, rhs->span.end};
      e = c;
    }
    return e;
  }

  static const std::map<std::string, AssignOp>& assign_ops() {
    static const std::map<std::string, AssignOp> m = {
        {"=", AssignOp::Assign}, {"+=", AssignOp::Add}, {"-=", AssignOp::Sub},
        {"*=", AssignOp::Mul},   {"/=", AssignOp::Div}, {"%=", AssignOp::Mod},
        {"<<=", AssignOp::Shl},  {">>=", AssignOp::Shr}, {"&=", AssignOp::And},
        {"^=", AssignOp::Xor},   {"|=", AssignOp::Or},
    };
    return m;
  }

  Expr* parse_assign_expr() {
    Expr* lhs = parse_cond_expr();
    if (cur().kind == Token::Kind::Punct) {
      auto it = assign_ops().find(cur().text);
      if (it != assign_ops().end()) {
        advance();
        Expr* rhs = parse_assign_expr();
        Expr* e = unit_->make_expr();
        e->kind = Expr::Kind::Assign;
        e->assign_op = it->second;
        e->a = lhs;
        e->b = rhs;
        e->span = {lhs->span.line, lhs->span.start, rhs->span.end};
        return e;
      }
    }
    return lhs;
  }

  Expr* parse_cond_expr() {
    Expr* c = parse_binary(1);
    if (is_punct("?")) {
      advance();
      Expr* t = parse_expr();
      expect(":");
      Expr* f = parse_assign_expr();
      Expr* e = unit_->make_expr();
      e->kind = Expr::Kind::Cond;
      e->a = c;
      e->b = t;
      e->c = f;
      e->span = {c->span.line, c->span.start, f->span.end};
      return e;
    }
    return c;
  }

  Expr* parse_binary(int min_prec) {
    Expr* lhs = parse_unary();
    for (;;) {
      const OpInfo* info = match_binop();
      if (!info || info->prec < min_prec) return lhs;
      advance();
      Expr* rhs = parse_binary(info->prec + 1);
      Expr* e = unit_->make_expr();
      e->kind = Expr::Kind::Binary;
      e->bin_op = info->op;
      e->a = lhs;
      e->b = rhs;
      e->span = {lhs->span.line, lhs->span.start, rhs->span.end};
      lhs = e;
    }
  }

  bool starts_type_name() const {
    if (cur().kind != Token::Kind::Ident) return false;
    const std::string& s = cur().text;
    if (s == "const" || s == "struct" || s == "void" || s == "char" ||
        s == "short" || s == "int" || s == "long" || s == "float" ||
        s == "double" || s == "signed" || s == "unsigned" || s == "union" ||
        s == "enum" || s == "volatile")
      return true;
    return lookup_typedef(s) != nullptr;
  }

  const TypeDesc* parse_type_name() {
    Specifiers spec = parse_specifiers();
    if (spec.is_static || spec.is_typedef)
      syntax_error(cur().line, "storage class in type name");
    Declarator d = parse_declarator(spec.base, /*need_name=*/false);
    if (!d.name.empty())
      syntax_error(cur().line, "unexpected name in type");
    return d.type;
  }

  Expr* parse_unary() {
    const Token& t = cur();
    auto unary = [&](UnOp op) {
      advance();
      Expr* a = parse_unary();
      Expr* e = unit_->make_expr();
      e->kind = Expr::Kind::Unary;
      e->un_op = op;
      e->a = a;
      e->span = {t.line, t.start, a->span.end};
      return e;
    };
    if (is_punct("*")) {
      advance();
      Expr* a = parse_unary();
      Expr* e = unit_->make_expr();
      e->kind = Expr::Kind::Deref;
      e->a = a;
      e->span = {t.line, t.start, a->span.end};
      return e;
    }
    if (is_punct("&")) return unary(UnOp::AddrOf);
    if (is_punct("+")) return unary(UnOp::Plus);
    if (is_punct("-")) return unary(UnOp::Minus);
    if (is_punct("!")) return unary(UnOp::Not);
    if (is_punct("~")) return unary(UnOp::BitNot);
    if (is_punct("++")) return unary(UnOp::PreInc);
    if (is_punct("--")) return unary(UnOp::PreDec);
    if (is_kw("sizeof")) {
      advance();
      Expr* e = unit_->make_expr();
      if (is_punct("(") && [&] {
            size_t save = pos_;
            advance();
            bool ty = starts_type_name();
            pos_ = save;
            return ty;
          }()) {
        advance();
        e->kind = Expr::Kind::SizeofType;
        e->cast_type = parse_type_name();
        const Token& close = cur();
        expect(")");
        e->span = span_between(t, close);
        return e;
      }
      e->kind = Expr::Kind::SizeofExpr;
      e->a = parse_unary();
      e->span = {t.line, t.start, e->a->span.end};
      return e;
    }
    if (is_punct("(")) {
      size_t save = pos_;
      advance();
      if (starts_type_name()) {
        const TypeDesc* ty = parse_type_name();
        expect(")");
        if (is_punct("{"))
          unsupported(t.line, "compound literal");
        Expr* a = parse_unary();
        Expr* e = unit_->make_expr();
        e->kind = Expr::Kind::Cast;
        e->cast_type = ty;
        e->a = a;
        e->span = {t.line, t.start, a->span.end};
        return e;
      }
      pos_ = save;
    }
    return parse_postfix();
  }

  Expr* parse_postfix() {
    Expr* e = parse_primary();
    for (;;) {
      const Token& t = cur();
      if (is_punct("[")) {
        advance();
        Expr* idx = parse_expr();
        const Token& close = cur();
        expect("]");
        Expr* n = unit_->make_expr();
        n->kind = Expr::Kind::Index;
        n->a = e;
        n->b = idx;
        n->span = {e->span.line, e->span.start, close.end};
        e = n;
        continue;
      }
      if (is_punct(".") || is_punct("->")) {
        bool arrow = cur().text == "->";
        advance();
        std::string field = expect_ident("field name");
        Expr* n = unit_->make_expr();
        n->kind = Expr::Kind::Member;
        n->a = e;
        n->name = field;
        n->arrow = arrow;
        n->span = {e->span.line, e->span.start, toks_[pos_ - 1].end};
        e = n;
        continue;
      }
      if (is_punct("++") || is_punct("--")) {
        bool inc = cur().text == "++";
        advance();
        Expr* n = unit_->make_expr();
        n->kind = Expr::Kind::Unary;
        n->un_op = inc ? UnOp::PostInc : UnOp::PostDec;
        n->a = e;
        n->span = {e->span.line, e->span.start, t.end};
        e = n;
        continue;
      }
      if (is_punct("(")) {
        if (e->kind != Expr::Kind::Var)
          unsupported(t.line, "call through expression");
        advance();
        Expr* n = unit_->make_expr();
        n->kind = Expr::Kind::Call;
        n->name = e->name;
        while (!is_punct(")")) {
          n->args.push_back(parse_assign_expr());
          if (is_punct(",")) { advance(); continue; }
          break;
        }
        const Token& close = cur();
        expect(")");
        n->span = {e->span.line, e->span.start, close.end};
        e = n;
        continue;
      }
      return e;
    }
  }

  Expr* parse_primary() {
    const Token& t = cur();
    if (is_punct("(")) {
      advance();
      Expr* inner = parse_expr();
      expect(")");
      // Redundant parentheses are dropped; the printer re-derives them.
      return inner;
    }
    if (t.kind == Token::Kind::Number || t.kind == Token::Kind::CharLit) {
      Expr* e = unit_->make_expr();
      e->kind = Expr::Kind::Literal;
      e->lexeme = t.text;
      e->span = span_from(t);
      advance();
      return e;
    }
    if (t.kind == Token::Kind::StringLit) {
      Expr* e = unit_->make_expr();
      e->kind = Expr::Kind::String;
      e->lexeme = t.text;
      e->span = span_from(t);
      advance();
      return e;
    }
    if (t.kind == Token::Kind::Ident && !kKeywords.count(t.text)) {
      Expr* e = unit_->make_expr();
      e->kind = Expr::Kind::Var;
      e->name = t.text;
      e->span = span_from(t);
      advance();
      return e;
    }
    syntax_error(t.line, "unexpected token '" + t.text + "'");
  }
};

}  // namespace

bool include_allowlisted(std::string_view hdr) {
  for (const char* h : kAllowedIncludes)
    if (hdr == h) return true;
  return false;
}

ParseResult parse_function(std::string_view src) {
  ParseResult out;
  LexResult lr = lex(src);
  if (!lr.ok) {
    Diagnostic d;
    d.kind = Diagnostic::Kind::Syntax;
    d.line = lr.error_line;
    d.message = lr.error;
    out.diags.push_back(std::move(d));
    return out;
  }
  Parser p(src, lr.tokens);
  try {
    out.unit = p.run();
  } catch (ParseError& e) {
    out.diags.push_back(std::move(e.diag));
  }
  return out;
}

}  // namespace cobble
