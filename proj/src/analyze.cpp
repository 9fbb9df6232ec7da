#include "cobble/analyze.hpp"

#include <algorithm>
#include <cassert>
#include <cstdlib>
#include <cstring>
#include <set>

#include "cobble/lexer.hpp"
#include "cobble/parser.hpp"
#include "cobble/printer.hpp"

namespace cobble {

namespace {

struct SemError {
  Diagnostic d;
};

[[noreturn]] void fail(int line, std::string msg) {
  Diagnostic d;
  d.kind = Diagnostic::Kind::Syntax;
  d.line = line;
  d.message = std::move(msg);
  throw SemError{std::move(d)};
}

[[noreturn]] void unsupported(int line, std::string construct) {
  Diagnostic d;
  d.kind = Diagnostic::Kind::Unsupported;
  d.line = line;
  d.construct = std::move(construct);
  throw SemError{std::move(d)};
}

int decode_escape(std::string_view s, size_t* i, int line) {
  // s[*i] is the char after the backslash.
  char c = s[(*i)++];
  switch (c) {
    case 'n': return '\n';
    case 't': return '\t';
    case 'r': return '\r';
    case 'a': return '\a';
    case 'b': return '\b';
    case 'f': return '\f';
    case 'v': return '\v';
    case '\\': return '\\';
    case '\'': return '\'';
    case '"': return '"';
    case '?': return '?';
    case 'x': {
      int v = 0;
      bool any = false;
      while (*i < s.size() && isxdigit((unsigned char)s[*i])) {
        char d = s[(*i)++];
        v = v * 16 + (isdigit((unsigned char)d) ? d - '0'
                                                : tolower(d) - 'a' + 10);
        any = true;
      }
      if (!any) fail(line, "bad hex escape");
      return v & 0xff;
    }
    default:
      if (c >= '0' && c <= '7') {
        int v = c - '0';
        for (int k = 0; k < 2 && *i < s.size() && s[*i] >= '0' && s[*i] <= '7';
             k++)
          v = v * 8 + (s[(*i)++] - '0');
        return v & 0xff;
      }
      fail(line, "bad escape sequence");
  }
}

}  // namespace

const char* context_tag(BasicExprContext c) {
  switch (c) {
    case BasicExprContext::Rvalue: return "rvalue";
    case BasicExprContext::LvalueTarget: return "lvalue-target";
    case BasicExprContext::AddressOfOperand: return "address-of-operand";
    case BasicExprContext::SizeofOperand: return "sizeof-operand";
  }
  return "?";
}

std::optional<LiteralInfo> classify_literal(std::string_view lexeme) {
  if (lexeme.empty()) return std::nullopt;
  LiteralInfo out;
  if (lexeme[0] == '\'') {
    // Character constant, type int.
    std::string_view body = lexeme.substr(1, lexeme.size() - 2);
    if (body.empty()) return std::nullopt;
    size_t i = 0;
    int v;
    if (body[0] == '\\') {
      i = 1;
      try {
        v = decode_escape(body, &i, 0);
      } catch (SemError&) {
        return std::nullopt;
      }
      // Octal/hex escapes above 127 wrap like (char) on this target.
      if (v > 127) v -= 256;
    } else {
      v = (unsigned char)body[0];
      i = 1;
    }
    if (i != body.size()) return std::nullopt;  // multi-char constant
    out.type = Scalar::I32;
    out.value = v;
    return out;
  }

  std::string s(lexeme);
  bool hex = s.size() > 1 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X');
  bool is_float = false;
  if (hex) {
    is_float = s.find('.') != std::string::npos ||
               s.find('p') != std::string::npos ||
               s.find('P') != std::string::npos;
  } else {
    is_float = s.find('.') != std::string::npos ||
               s.find('e') != std::string::npos ||
               s.find('E') != std::string::npos ||
               s.back() == 'f' || s.back() == 'F';
  }
  if (is_float) {
    Scalar t = Scalar::F64;
    std::string num = s;
    char suf = num.back();
    if (suf == 'f' || suf == 'F') {
      t = Scalar::F32;
      num.pop_back();
    } else if (suf == 'l' || suf == 'L') {
      return std::nullopt;  // long double literal
    }
    errno = 0;
    char* end = nullptr;
    double v = strtod(num.c_str(), &end);
    if (end != num.c_str() + num.size()) return std::nullopt;
    out.type = t;
    out.fvalue = t == Scalar::F32 ? (double)(float)v : v;
    return out;
  }

  // Integer: strip suffix, then apply the C99 type ladder.
  int n_u = 0, n_l = 0;
  size_t endpos = s.size();
  while (endpos > 0) {
    char c = s[endpos - 1];
    if (c == 'u' || c == 'U') {
      n_u++;
      endpos--;
    } else if (c == 'l' || c == 'L') {
      n_l++;
      endpos--;
    } else {
      break;
    }
  }
  if (n_u > 1 || n_l > 2) return std::nullopt;
  std::string num = s.substr(0, endpos);
  errno = 0;
  char* end = nullptr;
  unsigned long long v = strtoull(num.c_str(), &end, 0);
  if (errno == ERANGE || end != num.c_str() + num.size()) return std::nullopt;
  bool uns = n_u > 0;
  bool longish = n_l > 0;
  auto fits = [&](Scalar t) { return value_fits(t, int128(v)); };
  Scalar t;
  if (uns) {
    t = (!longish && fits(Scalar::U32)) ? Scalar::U32 : Scalar::U64;
  } else if (hex || (num.size() > 1 && num[0] == '0')) {
    // Hex and octal may fall into unsigned types.
    if (!longish && fits(Scalar::I32)) t = Scalar::I32;
    else if (!longish && fits(Scalar::U32)) t = Scalar::U32;
    else if (fits(Scalar::I64)) t = Scalar::I64;
    else t = Scalar::U64;
  } else {
    if (!longish && fits(Scalar::I32)) t = Scalar::I32;
    else if (fits(Scalar::I64)) t = Scalar::I64;
    else t = Scalar::U64;  // no signed type holds it; matches gcc + warning
  }
  out.type = t;
  out.value = int128(v);
  return out;
}

namespace {

class Analyzer {
 public:
  Analyzer(SourceUnit& u, FunctionInfo& info) : u_(u), info_(info) {}

  void run() {
    setup_file_scope();
    walk_function();
    finish();
  }

 private:
  SourceUnit& u_;
  FunctionInfo& info_;
  std::vector<std::map<std::string, Symbol*>> scopes_;
  std::map<std::string, Symbol*> lib_;
  Stmt* cur_stmt_ = nullptr;
  int sizeof_depth_ = 0;
  int cond_depth_ = 0;  // nesting inside &&/|| RHS or ?: arms
  // Per-statement side-effect scan results.
  bool region_has_call_ = false;
  bool region_has_nested_se_ = false;
  Expr* allowed_se_ = nullptr;  // the one permitted top-level write
  std::vector<std::pair<Symbol*, bool>> region_writes_;  // (sym, top-level)
  std::vector<Expr*> region_rvalues_;
  std::set<std::string> labels_;
  std::vector<std::pair<std::string, int>> gotos_;

  Symbol* new_sym(Symbol::Kind kind, std::string name, const TypeDesc* type) {
    info_.symbols.emplace_back();
    Symbol* s = &info_.symbols.back();
    s->kind = kind;
    s->name = std::move(name);
    s->type = type;
    return s;
  }

  void push_scope() { scopes_.emplace_back(); }
  void pop_scope() { scopes_.pop_back(); }

  Symbol* lookup(const std::string& n) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto f = it->find(n);
      if (f != it->end()) return f->second;
    }
    auto f = lib_.find(n);
    return f == lib_.end() ? nullptr : f->second;
  }

  void declare(Symbol* s, int line) {
    auto& scope = scopes_.back();
    if (scope.count(s->name))
      fail(line, "redeclaration of '" + s->name + "'");
    scope[s->name] = s;
  }

  const TypeDesc* ptr_void() { return u_.types.pointer(u_.types.scalar(Scalar::Void)); }

  void add_lib(const char* name, std::vector<const TypeDesc*> params,
               const TypeDesc* ret) {
    Symbol* s = new_sym(Symbol::Kind::Library, name, nullptr);
    s->sig_params = std::move(params);
    s->sig_ret = ret;
    lib_[name] = s;
  }

  void setup_file_scope() {
    push_scope();
    const TypeDesc* pv = ptr_void();
    const TypeDesc* u64 = u_.types.scalar(Scalar::U64);
    const TypeDesc* i32 = u_.types.scalar(Scalar::I32);
    const TypeDesc* vd = u_.types.scalar(Scalar::Void);
    for (const auto& item : u_.preamble) {
      if (item.kind != PreambleItem::Kind::Include) continue;
      if (item.header == "stdlib.h") {
        add_lib("malloc", {u64}, pv);
        add_lib("realloc", {pv, u64}, pv);
        add_lib("free", {pv}, vd);
        add_lib("abs", {i32}, i32);
      } else if (item.header == "string.h") {
        add_lib("memset", {pv, i32, u64}, pv);
        add_lib("memcpy", {pv, pv, u64}, pv);
      }
    }
    for (auto& item : u_.preamble) {
      if (item.kind != PreambleItem::Kind::Var) continue;
      check_var_type(item.var, item.span.line);
      Symbol* s = new_sym(Symbol::Kind::FileVar, item.var.name, item.var.type);
      s->is_static = item.var.is_static;
      s->decl_line = item.span.line;
      s->writes_observable = false;  // file state persists across calls
      declare(s, item.span.line);
      info_.file_vars.push_back(s);
      info_.global_refs[s->name].push_back(item.var.name_span);
      if (item.var.init) {
        // File-scope initializers must be constant; gcc enforces that.
        type_init(item.var.init, item.var.type, BasicExprContext::Rvalue);
      }
    }
    FunctionDef* fn = u_.fn;
    Symbol* self = new_sym(Symbol::Kind::Function, fn->name, nullptr);
    for (const auto& p : fn->params) self->sig_params.push_back(p.type);
    self->sig_ret = fn->return_type;
    declare(self, fn->span.line);
    info_.self = self;
    info_.global_refs[fn->name].push_back(fn->name_span);
  }

  void check_var_type(const Declarator& d, int line) {
    const TypeDesc* t = d.type;
    while (t->is_array()) t = t->elem;
    if (t->is_void()) fail(line, "variable of void type");
    if (t->is_record() && t->record->fields.empty())
      fail(line, "variable of incomplete struct type");
  }

  void walk_function() {
    FunctionDef* fn = u_.fn;
    push_scope();
    int idx = 0;
    for (const auto& p : fn->params) {
      if (p.type->is_void()) fail(fn->span.line, "parameter of void type");
      Symbol* s = new_sym(Symbol::Kind::Param, p.name, p.type);
      s->param_index = idx++;
      declare(s, fn->span.line);
      info_.params.push_back(s);
    }
    walk_block(fn->body, nullptr, 0);
    pop_scope();
    for (const auto& [label, line] : gotos_)
      if (!labels_.count(label)) fail(line, "unknown label '" + label + "'");
  }

  void walk_block(Stmt* block, Stmt* parent, int index) {
    info_.stmts.push_back(block);
    StmtNote& n = info_.notes[block];
    n.parent_block = parent;
    n.index_in_block = index;
    push_scope();
    for (size_t i = 0; i < block->stmts.size(); i++) {
      Stmt* c = block->stmts[i];
      walk_stmt(c, block, (int)i);
    }
    pop_scope();
  }

  // Scans the statement region that runs unconditionally at statement
  // entry; conclusions feed probe eligibility and the write discipline.
  void begin_region(Expr* allowed) {
    region_has_call_ = false;
    region_has_nested_se_ = false;
    region_writes_.clear();
    region_rvalues_.clear();
    allowed_se_ = allowed;
  }

  void settle_region(Stmt* s, StmtNote& note, Expr* post_target,
                     const Symbol* decl_sym) {
    // Pre-probes need the whole region free of calls and hidden stores
    // (a mid-statement store would let probe-time and eval-time values
    // diverge). Post-logging the settled target is safe regardless.
    bool eligible = !region_has_call_ && !region_has_nested_se_;
    note.probe_eligible = eligible;
    if (eligible)
      for (Expr* e : region_rvalues_) note.pre_exprs.push_back(e);
    note.post_target = post_target;
    note.decl_sym = decl_sym;
    for (auto& [sym, top] : region_writes_) {
      if (!sym) continue;
      if (!top) sym->writes_observable = false;
    }
    (void)s;
  }

  // Writes outside any probed region (loop conditions, steps) are never
  // observed.
  void type_unobserved(Expr* e) {
    begin_region(nullptr);
    type_expr(e, BasicExprContext::Rvalue);
    for (auto& [sym, top] : region_writes_)
      if (sym) sym->writes_observable = false;
  }

  void walk_stmt(Stmt* s, Stmt* parent, int index) {
    info_.stmts.push_back(s);
    StmtNote& note = info_.notes[s];
    note.parent_block = parent;
    note.index_in_block = index;
    cur_stmt_ = s;

    switch (s->kind) {
      case Stmt::Kind::Compound:
        info_.stmts.pop_back();  // walk_block records it
        walk_block(s, parent, index);
        return;
      case Stmt::Kind::Empty:
      case Stmt::Kind::RecordDef:
      case Stmt::Kind::Break:
      case Stmt::Kind::Continue:
        return;
      case Stmt::Kind::Goto:
        info_.has_goto = true;
        gotos_.push_back({s->label, s->span.line});
        return;
      case Stmt::Kind::Label:
        labels_.insert(s->label);
        walk_stmt(s->body, parent, index);
        cur_stmt_ = s;
        return;
      case Stmt::Kind::Decl: {
        check_var_type(s->decl, s->span.line);
        begin_region(nullptr);
        // A shadowing declaration changes what the name means mid-line; a
        // probe placed before the statement would read the outer binding.
        bool shadows = lookup(s->decl.name) != nullptr;
        Symbol* sym = new_sym(Symbol::Kind::Local, s->decl.name, s->decl.type);
        sym->decl_line = s->span.line;
        sym->is_static = s->decl.is_static;
        sym->has_init = s->decl.init != nullptr;
        declare(sym, s->span.line);
        info_.locals.push_back(sym);
        if (s->decl.init)
          type_init(s->decl.init, s->decl.type, BasicExprContext::Rvalue);
        bool scalar_arith = s->decl.type->is_arith();
        if (sym->is_static) {
          // Initialized once per process, not per execution of the line;
          // a post-log would misattribute later values to the init.
          sym->writes_observable = false;
          settle_region(s, note, nullptr, nullptr);
        } else {
          settle_region(s, note,
                        /*post_target=*/nullptr,
                        s->decl.init && scalar_arith ? sym : nullptr);
        }
        if (shadows) {
          note.probe_eligible = false;
          note.pre_exprs.clear();
        }
        return;
      }
      case Stmt::Kind::ExprStmt: {
        Expr* top = s->expr;
        Expr* allowed = nullptr;
        if (top->kind == Expr::Kind::Assign) allowed = top;
        if (top->kind == Expr::Kind::Unary &&
            (top->un_op == UnOp::PreInc || top->un_op == UnOp::PreDec ||
             top->un_op == UnOp::PostInc || top->un_op == UnOp::PostDec))
          allowed = top;
        begin_region(allowed);
        type_expr(top, BasicExprContext::Rvalue);
        Expr* post = nullptr;
        if (allowed) {
          Expr* target = allowed->a;
          if (target->is_basic() && target->type && target->type->is_arith())
            post = target;
        }
        settle_region(s, note, post, nullptr);
        return;
      }
      case Stmt::Kind::Return: {
        begin_region(nullptr);
        const TypeDesc* rt = u_.fn->return_type;
        if (s->expr) {
          const TypeDesc* t = type_expr(s->expr, BasicExprContext::Rvalue);
          if (rt->is_void()) fail(s->span.line, "returning a value from void");
          check_assignable(rt, t, s->expr, s->span.line, "return");
        } else if (!rt->is_void()) {
          fail(s->span.line, "missing return value");
        }
        settle_region(s, note, nullptr, nullptr);
        return;
      }
      case Stmt::Kind::If: {
        begin_region(nullptr);
        require_scalar(type_expr(s->cond, BasicExprContext::Rvalue),
                       s->cond->span.line, "if condition");
        settle_region(s, note, nullptr, nullptr);
        info_.branches++;
        walk_stmt(s->body, parent, index);
        if (s->orelse) {
          walk_stmt(s->orelse, parent, index);
          // An else-if prints unbraced after `else`; a probe inserted
          // before its `if` token would become the else body.
          if (s->orelse->kind == Stmt::Kind::If) {
            info_.notes[s->orelse].probe_eligible = false;
            info_.notes[s->orelse].pre_exprs.clear();
          }
        }
        cur_stmt_ = s;
        return;
      }
      case Stmt::Kind::Switch: {
        info_.has_switch = true;
        begin_region(nullptr);
        const TypeDesc* t = type_expr(s->expr, BasicExprContext::Rvalue);
        if (!t->is_integer()) fail(s->span.line, "switch on non-integer");
        settle_region(s, note, nullptr, nullptr);
        walk_stmt(s->body, parent, index);
        cur_stmt_ = s;
        return;
      }
      case Stmt::Kind::Case: {
        info_.branches++;
        type_unobserved(s->expr);
        walk_stmt(s->body, parent, index);
        cur_stmt_ = s;
        return;
      }
      case Stmt::Kind::Default:
        walk_stmt(s->body, parent, index);
        cur_stmt_ = s;
        return;
      case Stmt::Kind::While:
      case Stmt::Kind::DoWhile: {
        info_.branches++;
        type_unobserved(s->cond);
        require_scalar(s->cond->type, s->cond->span.line, "loop condition");
        walk_stmt(s->body, parent, index);
        cur_stmt_ = s;
        return;
      }
      case Stmt::Kind::For: {
        info_.branches++;
        push_scope();
        begin_region(nullptr);
        if (!s->decl_group.empty()) {
          for (auto& d : s->decl_group) {
            check_var_type(d, s->span.line);
            Symbol* sym = new_sym(Symbol::Kind::Local, d.name, d.type);
            sym->decl_line = s->span.line;
            sym->has_init = d.init != nullptr;
            declare(sym, s->span.line);
            info_.locals.push_back(sym);
            if (d.init) type_init(d.init, d.type, BasicExprContext::Rvalue);
            // The loop header reruns; init value does not pin the var.
            sym->writes_observable = false;
          }
        } else if (s->init_expr) {
          Expr* allowed =
              s->init_expr->kind == Expr::Kind::Assign ? s->init_expr : nullptr;
          allowed_se_ = allowed;
          type_expr(s->init_expr, BasicExprContext::Rvalue);
        }
        settle_region(s, note, nullptr, nullptr);
        // A for header carries no post-log, so its init writes are never
        // observed; cond/step writes are plainly unobserved as well.
        for (auto& [wsym, wtop] : region_writes_)
          if (wsym) wsym->writes_observable = false;
        if (s->cond) {
          type_unobserved(s->cond);
          require_scalar(s->cond->type, s->cond->span.line, "loop condition");
        }
        if (s->step) type_unobserved(s->step);
        walk_stmt(s->body, parent, index);
        pop_scope();
        cur_stmt_ = s;
        return;
      }
    }
  }

  // --- expression typing ---

  const TypeDesc* decay(const TypeDesc* t) {
    return t->is_array() ? u_.types.pointer(t->elem) : t;
  }

  void require_scalar(const TypeDesc* t, int line, const char* what) {
    if (!(t->is_arith() || t->is_pointer()))
      fail(line, std::string(what) + " is not scalar");
  }

  bool ptr_compat(const TypeDesc* a, const TypeDesc* b) {
    if (a->elem->is_void() || b->elem->is_void()) return true;
    return a->elem == b->elem;
  }

  bool is_zero_literal(const Expr* e) {
    if (e->kind != Expr::Kind::Literal) return false;
    auto li = classify_literal(e->lexeme);
    return li && scalar_is_integer(li->type) && li->value == 0;
  }

  void check_assignable(const TypeDesc* to, const TypeDesc* from,
                        const Expr* rhs, int line, const char* what) {
    from = decay(from);
    if (to->is_arith() && from->is_arith()) return;
    if (to->is_pointer() && from->is_pointer()) {
      if (!ptr_compat(to, from))
        fail(line, std::string("incompatible pointer types in ") + what);
      return;
    }
    if (to->is_pointer() && from->is_integer()) {
      if (rhs && is_zero_literal(rhs)) return;
      fail(line, std::string("integer to pointer in ") + what);
    }
    if (to->is_record() && from->is_record() && to->record == from->record)
      return;
    fail(line, std::string("incompatible types in ") + what);
  }

  void type_init(Expr* init, const TypeDesc* declared, BasicExprContext ctx) {
    if (init->kind == Expr::Kind::InitList) {
      if (declared->is_array()) {
        for (Expr* el : init->args) type_init(el, declared->elem, ctx);
      } else if (declared->is_record()) {
        const auto& fields = declared->record->fields;
        if (init->args.size() > fields.size())
          fail(init->span.line, "too many struct initializers");
        for (size_t i = 0; i < init->args.size(); i++)
          type_init(init->args[i], fields[i].type, ctx);
      } else {
        if (init->args.size() != 1)
          fail(init->span.line, "scalar initializer list");
        type_init(init->args[0], declared, ctx);
      }
      init->type = declared;
      return;
    }
    if (declared->is_array() && init->kind == Expr::Kind::String) {
      init->type = u_.types.pointer(u_.types.scalar(Scalar::I8));
      return;
    }
    const TypeDesc* t = type_expr(init, ctx);
    check_assignable(declared, t, init, init->span.line, "initialization");
  }

  Symbol* base_lvalue_symbol(Expr* e) {
    switch (e->kind) {
      case Expr::Kind::Var:
        return const_cast<Symbol*>(e->sym);
      case Expr::Kind::Index:
        // Only array indexing stays within the named object.
        return e->a->type && e->a->type->is_array() ? base_lvalue_symbol(e->a)
                                                    : nullptr;
      case Expr::Kind::Member:
        return e->arrow ? nullptr : base_lvalue_symbol(e->a);
      default:
        return nullptr;
    }
  }

  bool is_lvalue(const Expr* e) {
    switch (e->kind) {
      case Expr::Kind::Var:
        return e->sym && e->sym->kind != Symbol::Kind::Function &&
               e->sym->kind != Symbol::Kind::Library;
      case Expr::Kind::Index:
      case Expr::Kind::Deref:
      case Expr::Kind::Member:
        return true;
      default:
        return false;
    }
  }

  void note_write(Expr* target, Expr* via) {
    Symbol* sym = base_lvalue_symbol(target);
    region_writes_.push_back({sym, via == allowed_se_});
    if (via != allowed_se_) region_has_nested_se_ = true;
  }

  void record_basic(Expr* e, BasicExprContext ctx) {
    if (sizeof_depth_ > 0) ctx = BasicExprContext::SizeofOperand;
    info_.basic_exprs.push_back({e, ctx, cur_stmt_});
    // Short-circuit RHS and ?: arms may be skipped at runtime, so a probe
    // evaluating them at statement entry could read what the program
    // never reads; only unconditional operands are probe material.
    if (ctx == BasicExprContext::Rvalue && e->type && e->type->is_arith() &&
        cond_depth_ == 0)
      region_rvalues_.push_back(e);
  }

  const TypeDesc* type_expr(Expr* e, BasicExprContext ctx) {
    const TypeDesc* t = type_expr_inner(e, ctx);
    e->type = t;
    if (e->is_basic()) record_basic(e, ctx);
    return t;
  }

  const TypeDesc* type_expr_inner(Expr* e, BasicExprContext ctx) {
    int line = e->span.line;
    switch (e->kind) {
      case Expr::Kind::Var: {
        Symbol* sym = lookup(e->name);
        if (!sym) fail(line, "unknown identifier '" + e->name + "'");
        if (sym->kind == Symbol::Kind::Function ||
            sym->kind == Symbol::Kind::Library)
          unsupported(line, "function used as value");
        e->sym = sym;
        if (sym->kind == Symbol::Kind::FileVar)
          info_.global_refs[sym->name].push_back(e->span);
        return sym->type;
      }
      case Expr::Kind::Literal: {
        auto li = classify_literal(e->lexeme);
        if (!li) fail(line, "bad literal '" + e->lexeme + "'");
        return u_.types.scalar(li->type);
      }
      case Expr::Kind::String:
        return u_.types.pointer(u_.types.scalar(Scalar::I8));
      case Expr::Kind::Index: {
        const TypeDesc* base = type_expr(e->a, BasicExprContext::Rvalue);
        const TypeDesc* idx = type_expr(e->b, BasicExprContext::Rvalue);
        const TypeDesc* bd = decay(base);
        if (!bd->is_pointer() || bd->elem->is_void())
          fail(line, "indexing a non-array");
        if (!idx->is_integer()) fail(line, "non-integer index");
        if (!base->is_array()) mark_escape(e->a);
        return bd->elem;
      }
      case Expr::Kind::Deref: {
        const TypeDesc* t = decay(type_expr(e->a, BasicExprContext::Rvalue));
        if (!t->is_pointer() || t->elem->is_void())
          fail(line, "dereferencing a non-pointer");
        return t->elem;
      }
      case Expr::Kind::Member: {
        const TypeDesc* base = type_expr(e->a, BasicExprContext::Rvalue);
        const TypeDesc* rec = base;
        if (e->arrow) {
          rec = decay(base);
          if (!rec->is_pointer() || !rec->elem->is_record())
            fail(line, "-> on non-struct-pointer");
          rec = rec->elem;
        }
        if (!rec->is_record()) fail(line, ". on non-struct");
        if (rec->record->fields.empty())
          fail(line, "use of incomplete struct " + rec->record->tag);
        const RecordField* f = rec->record->find(e->name);
        if (!f) fail(line, "no field '" + e->name + "' in struct " +
                               rec->record->tag);
        return f->type;
      }
      case Expr::Kind::Unary:
        return type_unary(e, ctx);
      case Expr::Kind::Binary:
        return type_binary(e);
      case Expr::Kind::Assign: {
        const TypeDesc* lt = type_expr(e->a, BasicExprContext::LvalueTarget);
        if (!is_lvalue(e->a)) fail(line, "assignment to non-lvalue");
        if (lt->is_array()) fail(line, "assignment to array");
        note_write(e->a, e);
        const TypeDesc* rt = type_expr(e->b, BasicExprContext::Rvalue);
        if (e->assign_op == AssignOp::Assign) {
          check_assignable(lt, rt, e->b, line, "assignment");
        } else if (e->assign_op == AssignOp::Add ||
                   e->assign_op == AssignOp::Sub) {
          bool ok = (lt->is_arith() && decay(rt)->is_arith()) ||
                    (lt->is_pointer() && rt->is_integer());
          if (!ok) fail(line, "bad compound assignment operands");
        } else {
          bool shift_or_bit = e->assign_op != AssignOp::Mul &&
                              e->assign_op != AssignOp::Div;
          if (!(lt->is_arith() && decay(rt)->is_arith()))
            fail(line, "bad compound assignment operands");
          if (shift_or_bit && (!lt->is_integer() || !rt->is_integer()))
            fail(line, "bitwise compound assignment on non-integer");
        }
        return lt;
      }
      case Expr::Kind::Cond: {
        info_.branches++;
        const TypeDesc* c = type_expr(e->a, BasicExprContext::Rvalue);
        require_scalar(c, line, "?: condition");
        cond_depth_++;
        const TypeDesc* t1 = decay(type_expr(e->b, BasicExprContext::Rvalue));
        const TypeDesc* t2 = decay(type_expr(e->c, BasicExprContext::Rvalue));
        cond_depth_--;
        if (t1->is_arith() && t2->is_arith())
          return u_.types.scalar(scalar_usual_arith(t1->scalar, t2->scalar));
        if (t1->is_pointer() && t2->is_pointer()) {
          if (!ptr_compat(t1, t2)) fail(line, "mismatched ?: pointers");
          return t1->elem->is_void() ? t2 : t1;
        }
        if (t1->is_pointer() && is_zero_literal(e->c)) return t1;
        if (t2->is_pointer() && is_zero_literal(e->b)) return t2;
        if (t1->is_record() && t2->is_record() && t1->record == t2->record)
          return t1;
        if (t1->is_void() && t2->is_void()) return t1;
        fail(line, "mismatched ?: branches");
      }
      case Expr::Kind::Comma: {
        type_expr(e->a, BasicExprContext::Rvalue);
        return type_expr(e->b, BasicExprContext::Rvalue);
      }
      case Expr::Kind::Call:
        return type_call(e);
      case Expr::Kind::Cast: {
        const TypeDesc* to = e->cast_type;
        const TypeDesc* from = decay(type_expr(e->a, BasicExprContext::Rvalue));
        if (to->is_void()) return to;
        if (to->is_record() || from->is_record())
          fail(line, "cast involving struct");
        if (from->is_void()) fail(line, "cast from void");
        if (to->is_array()) fail(line, "cast to array");
        return to;
      }
      case Expr::Kind::SizeofExpr: {
        sizeof_depth_++;
        type_expr(e->a, BasicExprContext::SizeofOperand);
        sizeof_depth_--;
        return u_.types.scalar(Scalar::U64);
      }
      case Expr::Kind::SizeofType:
        return u_.types.scalar(Scalar::U64);
      case Expr::Kind::InitList:
        fail(line, "initializer list outside declaration");
    }
    fail(line, "unexpected expression");
  }

  // Marks the base object whose storage address escapes.
  void mark_escape(Expr* e) {
    if (Symbol* s = base_lvalue_symbol(e)) s->address_taken = true;
  }

  const TypeDesc* type_unary(Expr* e, BasicExprContext ctx) {
    int line = e->span.line;
    (void)ctx;
    switch (e->un_op) {
      case UnOp::AddrOf: {
        const TypeDesc* t =
            type_expr(e->a, BasicExprContext::AddressOfOperand);
        if (!is_lvalue(e->a)) fail(line, "taking address of non-lvalue");
        mark_escape(e->a);
        return u_.types.pointer(t);
      }
      case UnOp::Plus:
      case UnOp::Minus: {
        const TypeDesc* t = type_expr(e->a, BasicExprContext::Rvalue);
        if (!t->is_arith()) fail(line, "unary +/- on non-arithmetic");
        return u_.types.scalar(scalar_promote(t->scalar));
      }
      case UnOp::BitNot: {
        const TypeDesc* t = type_expr(e->a, BasicExprContext::Rvalue);
        if (!t->is_integer()) fail(line, "~ on non-integer");
        return u_.types.scalar(scalar_promote(t->scalar));
      }
      case UnOp::Not: {
        const TypeDesc* t = type_expr(e->a, BasicExprContext::Rvalue);
        require_scalar(decay(t), line, "! operand");
        return u_.types.scalar(Scalar::I32);
      }
      case UnOp::PreInc:
      case UnOp::PreDec:
      case UnOp::PostInc:
      case UnOp::PostDec: {
        const TypeDesc* t = type_expr(e->a, BasicExprContext::LvalueTarget);
        if (!is_lvalue(e->a)) fail(line, "++/-- on non-lvalue");
        if (!(t->is_arith() || t->is_pointer()))
          fail(line, "++/-- on unsupported type");
        note_write(e->a, e);
        return t;
      }
    }
    fail(line, "unexpected unary operator");
  }

  const TypeDesc* type_binary(Expr* e) {
    int line = e->span.line;
    bool short_circuit =
        e->bin_op == BinOp::LogAnd || e->bin_op == BinOp::LogOr;
    const TypeDesc* a = decay(type_expr(e->a, BasicExprContext::Rvalue));
    if (short_circuit) cond_depth_++;
    const TypeDesc* b = decay(type_expr(e->b, BasicExprContext::Rvalue));
    if (short_circuit) cond_depth_--;
    if (e->a->type->is_array()) mark_escape(e->a);
    if (e->b->type->is_array()) mark_escape(e->b);
    switch (e->bin_op) {
      case BinOp::Add:
        if (a->is_pointer() && b->is_integer()) return a;
        if (b->is_pointer() && a->is_integer()) return b;
        break;
      case BinOp::Sub:
        if (a->is_pointer() && b->is_integer()) return a;
        if (a->is_pointer() && b->is_pointer()) {
          if (!ptr_compat(a, b)) fail(line, "subtracting unrelated pointers");
          return u_.types.scalar(Scalar::I64);
        }
        break;
      case BinOp::Shl:
      case BinOp::Shr:
        if (!a->is_integer() || !b->is_integer())
          fail(line, "shift on non-integer");
        return u_.types.scalar(scalar_promote(a->scalar));
      case BinOp::Lt: case BinOp::Gt: case BinOp::Le: case BinOp::Ge:
      case BinOp::Eq: case BinOp::Ne: {
        bool ok = (a->is_arith() && b->is_arith()) ||
                  (a->is_pointer() && b->is_pointer() && ptr_compat(a, b)) ||
                  (a->is_pointer() && is_zero_literal(e->b)) ||
                  (b->is_pointer() && is_zero_literal(e->a));
        if (!ok) fail(line, "bad comparison operands");
        return u_.types.scalar(Scalar::I32);
      }
      case BinOp::LogAnd:
      case BinOp::LogOr:
        require_scalar(a, line, "logical operand");
        require_scalar(b, line, "logical operand");
        return u_.types.scalar(Scalar::I32);
      case BinOp::Mod:
      case BinOp::BitAnd: case BinOp::BitXor: case BinOp::BitOr:
        if (!a->is_integer() || !b->is_integer())
          fail(line, "integer operator on non-integer");
        return u_.types.scalar(scalar_usual_arith(a->scalar, b->scalar));
      default:
        break;
    }
    if (!a->is_arith() || !b->is_arith())
      fail(line, "bad arithmetic operands");
    return u_.types.scalar(scalar_usual_arith(a->scalar, b->scalar));
  }

  const TypeDesc* type_call(Expr* e) {
    int line = e->span.line;
    region_has_call_ = true;
    Symbol* sym = lookup(e->name);
    if (!sym) unsupported(line, "call to undefined function '" + e->name + "'");
    if (sym->kind != Symbol::Kind::Function &&
        sym->kind != Symbol::Kind::Library)
      fail(line, "call to non-function '" + e->name + "'");
    if (sym->kind == Symbol::Kind::Function) {
      // Self recursion: record the reference for renaming.
      SourceSpan name_span = e->span;
      name_span.end = name_span.start + e->name.size();
      info_.global_refs[e->name].push_back(name_span);
    }
    if (e->args.size() != sym->sig_params.size())
      fail(line, "wrong argument count for '" + e->name + "'");
    for (size_t i = 0; i < e->args.size(); i++) {
      const TypeDesc* at = type_expr(e->args[i], BasicExprContext::Rvalue);
      if (e->args[i]->type->is_array()) mark_escape(e->args[i]);
      check_assignable(sym->sig_params[i], at, e->args[i], line, "argument");
    }
    return sym->sig_ret;
  }

  void finish() {
    // Source order: by start, parents before their children.
    std::stable_sort(info_.basic_exprs.begin(), info_.basic_exprs.end(),
                     [](const BasicExprRef& x, const BasicExprRef& y) {
                       if (x.expr->span.start != y.expr->span.start)
                         return x.expr->span.start < y.expr->span.start;
                       return x.expr->span.end > y.expr->span.end;
                     });
    const SourceSpan& sp = u_.fn->span;
    info_.loc = 1;
    for (size_t i = sp.start; i < sp.end && i < u_.text.size(); i++)
      if (u_.text[i] == '\n') info_.loc++;
  }
};

}  // namespace

AnalyzeOutcome analyze_unit(SourceUnit& u) {
  AnalyzeOutcome out;
  Analyzer a(u, out.info);
  try {
    a.run();
    out.ok = true;
  } catch (SemError& e) {
    out.diags.push_back(std::move(e.d));
    out.ok = false;
  }
  return out;
}

std::vector<BasicExprRef> enumerate_basic_exprs(SourceUnit& u) {
  AnalyzeOutcome out = analyze_unit(u);
  return std::move(out.info.basic_exprs);
}

ParseResult rename_globals(const SourceUnit& u, const FunctionInfo& info,
                           std::string_view prefix) {
  struct Edit {
    size_t start, end;
    std::string text;
  };
  std::vector<Edit> edits;
  std::set<std::string> new_names;
  for (const auto& [name, spans] : info.global_refs) {
    std::string renamed = std::string(prefix) + "_" + name;
    new_names.insert(renamed);
    for (const auto& sp : spans) edits.push_back({sp.start, sp.end, renamed});
  }
  std::set<const RecordType*> file_recs(u.file_records.begin(),
                                        u.file_records.end());
  for (const auto& [sp, rec] : u.tag_mentions) {
    if (!file_recs.count(rec)) continue;
    std::string renamed = std::string(prefix) + "_" + rec->tag;
    edits.push_back({sp.start, sp.end, renamed});
    new_names.insert(renamed);
  }

  // Capture guard: no pre-existing identifier may equal a new name.
  LexResult lr = lex(u.text);
  for (const auto& tok : lr.tokens) {
    if (tok.kind == Token::Kind::Ident && new_names.count(tok.text)) {
      ParseResult bad;
      Diagnostic d;
      d.kind = Diagnostic::Kind::Unsupported;
      d.line = tok.line;
      d.construct = "identifier colliding with rename prefix";
      bad.diags.push_back(std::move(d));
      return bad;
    }
  }

  std::sort(edits.begin(), edits.end(),
            [](const Edit& a, const Edit& b) { return a.start > b.start; });
  std::string text = u.text;
  size_t prev_start = std::string::npos;
  for (const auto& e : edits) {
    if (e.start == prev_start) continue;  // duplicate span recorded twice
    prev_start = e.start;
    text.replace(e.start, e.end - e.start, e.text);
  }
  return parse_function(text);
}

FrontResult front_process(std::string_view src) {
  FrontResult out;
  ParseResult first = parse_function(src);
  if (!first.ok()) {
    out.diags = std::move(first.diags);
    return out;
  }
  std::string normalized = print_unit(*first.unit);
  ParseResult second = parse_function(normalized);
  if (!second.ok()) {
    out.diags = std::move(second.diags);
    Diagnostic d;
    d.kind = Diagnostic::Kind::Syntax;
    d.line = 0;
    d.message = "normalized form failed to reparse";
    out.diags.push_back(std::move(d));
    return out;
  }
  AnalyzeOutcome ao = analyze_unit(*second.unit);
  if (!ao.ok) {
    out.diags = std::move(ao.diags);
    return out;
  }
  out.unit = std::move(second.unit);
  out.info = std::move(ao.info);
  return out;
}

}  // namespace cobble
