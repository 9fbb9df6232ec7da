#include "cobble/synth.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "cobble/analyze.hpp"
#include "cobble/hashing.hpp"
#include "cobble/lexer.hpp"
#include "cobble/printer.hpp"
#include "cobble/textedit.hpp"

namespace cobble {

namespace {

// ---------------------------------------------------------------- choices

class RngChoices final : public Choices {
 public:
  RngChoices(uint64_t seed, double p_synth, double p_call)
      : rng_(seed), p_synth_(p_synth), p_call_(p_call) {}

  int global_count(int lo, int hi) override {
    if (hi <= lo) return lo;
    return lo + (int)rng_.below((uint64_t)(hi - lo + 1));
  }
  Scalar global_type() override {
    static const Scalar kInts[8] = {Scalar::I8,  Scalar::I16, Scalar::I32,
                                    Scalar::I64, Scalar::U8,  Scalar::U16,
                                    Scalar::U32, Scalar::U64};
    return kInts[rng_.below(8)];
  }
  ScalarValue global_init(Scalar t) override {
    long long v = scalar_is_signed(t) ? (long long)rng_.below(17) - 8
                                      : (long long)rng_.below(17);
    return ScalarValue::of_int(t, v);
  }
  size_t pick_seed(size_t n) override { return rng_.below(n); }
  size_t pick_profile(size_t n) override { return rng_.below(n); }
  size_t pick_target(size_t n) override { return rng_.below(n); }
  bool do_rewrite() override { return rng_.unit() < p_synth_; }
  bool rewrite_is_call() override { return rng_.unit() < p_call_; }
  size_t pick_callee(size_t n) override { return rng_.below(n); }
  bool write_not_read() override { return rng_.below(2) == 0; }
  size_t pick_global(size_t n) override { return rng_.below(n); }
  bool use_var(bool have_vars) override {
    bool coin = rng_.below(4) != 0;  // favor data flow over literals
    return have_vars && coin;
  }
  size_t pick_var(size_t n) override { return rng_.below(n); }
  size_t pick_delta_op(size_t n) override { return rng_.below(n); }
  uint64_t mutation_constant() override { return rng_.next(); }

 private:
  SplitMix64 rng_;
  double p_synth_;
  double p_call_;
};

// ------------------------------------------------------- exact simulation

// An integer expression's type and mathematical value (unsigned values
// in [0, 2^w)). Every candidate rewrite is simulated here; anything the
// C standard leaves undefined or implementation-defined is inadmissible.
struct Sim {
  Scalar type = Scalar::I32;
  int128 val = 0;
};

std::optional<int128> convert_value(Scalar to, int128 v) {
  if (!scalar_is_signed(to)) return wrap_unsigned(to, v);
  if (value_fits(to, v)) return v;
  return std::nullopt;  // out-of-range signed conversion
}

std::optional<Sim> sim_binop(char op, Sim a, Sim b) {
  Scalar c = scalar_usual_arith(a.type, b.type);
  auto av = convert_value(c, a.val);
  auto bv = convert_value(c, b.val);
  if (!av || !bv) return std::nullopt;
  int128 r = 0;
  if (op == '+') {
    r = *av + *bv;
  } else if (op == '-') {
    r = *av - *bv;
  } else {  // '^' acts on the two's-complement representation
    int w = scalar_bit_width(c);
    uint128 mask = ((uint128)1 << w) - 1;
    uint128 bits = (((uint128)*av) ^ ((uint128)*bv)) & mask;
    if (scalar_is_signed(c) && (bits >> (w - 1)) & 1)
      r = (int128)(bits | ~mask);
    else
      r = (int128)bits;
  }
  if (scalar_is_signed(c)) {
    if (!value_fits(c, r)) return std::nullopt;  // signed overflow
  } else {
    r = wrap_unsigned(c, r);
  }
  return Sim{c, r};
}

// The type c_literal()'s rendering carries in source.
Sim lit_sim(const ScalarValue& v) {
  if (!scalar_is_signed(v.type)) return {Scalar::U64, v.exact()};
  int128 x = v.exact();
  bool wide = x > (int128)2147483647LL || x < -(int128)2147483648LL;
  return {wide ? Scalar::I64 : Scalar::I32, x};
}

std::optional<ScalarValue> make_k(int128 k) {
  if (k >= 0 && k <= scalar_max(Scalar::I64))
    return ScalarValue::of_int(Scalar::I64, k);
  if (k >= 0 && k <= scalar_max(Scalar::U64))
    return ScalarValue::of_int(Scalar::U64, k);
  return std::nullopt;
}

bool is_primary(const std::string& s) {
  if (s.empty()) return false;
  for (char ch : s)
    if (!isalnum((unsigned char)ch) && ch != '_') return false;
  return true;
}

std::string cast_text(Scalar t, const std::string& inner) {
  return "(" + scalar_c_type(t) + ")(" + inner + ")";
}

struct Form {
  std::string text;  // evaluates to the target value with its exact type
};

// Admissible rewrites of `base` (whose text binds at least as tightly as
// an additive operand) into exactly `target`: plain, +K, -K, ^K, each
// cast-wrapped when the simulated type differs from the target's.
std::vector<Form> delta_forms(const std::string& base_text, Sim base,
                              const ScalarValue& target) {
  std::vector<Form> out;
  Scalar tt = target.type;
  int128 tv = target.exact();
  auto finish = [&](Sim r, const std::string& text) {
    if (r.type == tt && r.val == tv) {
      out.push_back({text});
      return;
    }
    auto cv = convert_value(tt, r.val);
    if (cv && *cv == tv) out.push_back({cast_text(tt, text)});
  };
  finish(base, base_text);
  auto try_op = [&](char op, int128 k) {
    if (k <= 0) return;
    auto kv = make_k(k);
    if (!kv) return;
    auto r = sim_binop(op, base, lit_sim(*kv));
    if (!r) return;
    finish(*r, base_text + " " + op + " " + c_literal(*kv));
  };
  try_op('+', tv - base.val);
  try_op('-', base.val - tv);
  if (base.type == tt && base.val >= 0 && tv >= 0)
    try_op('^', base.val ^ tv);
  return out;
}

std::string splice(const std::string& core) {
  return is_primary(core) ? core : "(" + core + ")";
}

uint64_t bits64(const ScalarValue& v) {
  int128 x = v.exact();
  return scalar_is_signed(v.type) ? (uint64_t)(int64_t)x : (uint64_t)x;
}

std::string hex_ull(uint64_t v) {
  char buf[32];
  snprintf(buf, sizeof buf, "0x%016llxULL", (unsigned long long)v);
  return buf;
}

// ------------------------------------------------------------ entry cache

struct Matched {
  const Expr* expr = nullptr;
  const Stmt* stmt = nullptr;
  int line = 0;
  std::string text;
  bool stable = false;
  ScalarValue value;  // valid when stable
};

struct KnownVar {
  const Symbol* sym = nullptr;
  const Stmt* decl_stmt = nullptr;  // null for parameters
  ScalarValue value;
};

using Chain = std::vector<std::pair<const Stmt*, size_t>>;

struct EntryAnalysis {
  const FunctionEntry* entry = nullptr;
  FrontResult front;
  std::set<std::string> idents;
  std::map<const Stmt*, Chain> chains;
  std::map<size_t, std::vector<Matched>> matched;
  std::map<size_t, std::vector<KnownVar>> known;
};

void build_chains(const Stmt* s, Chain& stack,
                  std::map<const Stmt*, Chain>& out) {
  out[s] = stack;
  if (s->kind == Stmt::Kind::Compound) {
    for (size_t i = 0; i < s->stmts.size(); i++) {
      stack.push_back({s, i});
      build_chains(s->stmts[i], stack, out);
      stack.pop_back();
    }
    return;
  }
  if (s->body) build_chains(s->body, stack, out);
  if (s->orelse) build_chains(s->orelse, stack, out);
}

std::unique_ptr<EntryAnalysis> build_entry_analysis(const FunctionEntry& e,
                                                    std::string& error) {
  auto an = std::make_unique<EntryAnalysis>();
  an->entry = &e;
  an->front = front_process(e.text);
  if (!an->front.ok()) {
    error = "entry " + e.id + " no longer parses";
    return nullptr;
  }
  if (an->front.unit->text != e.text) {
    error = "entry " + e.id + " is not in normalized form";
    return nullptr;
  }
  LexResult lx = lex(e.text);
  for (const Token& t : lx.tokens)
    if (t.kind == Token::Kind::Ident) an->idents.insert(t.text);
  Chain stack;
  build_chains(an->front.unit->fn->body, stack, an->chains);
  return an;
}

const std::vector<Matched>& matched_for(EntryAnalysis& an, size_t pidx) {
  auto it = an.matched.find(pidx);
  if (it != an.matched.end()) return it->second;
  std::vector<Matched>& out = an.matched[pidx];
  const Profile& prof = an.entry->profiles[pidx];
  std::map<std::pair<int, std::string>, const LineObservation*> idx;
  for (const LineObservation& o : prof.observations)
    idx[{o.line, o.expr_text}] = &o;
  for (const Stmt* s : an.front.info.stmts) {
    auto nit = an.front.info.notes.find(s);
    if (nit == an.front.info.notes.end() || !nit->second.probe_eligible)
      continue;
    for (const Expr* e : nit->second.pre_exprs) {
      if (!e->type || !e->type->is_integer()) continue;
      std::string text = print_expr(e);
      auto oit = idx.find({s->span.line, text});
      if (oit == idx.end() || oit->second->values.empty()) continue;
      Matched m;
      m.expr = e;
      m.stmt = s;
      m.line = s->span.line;
      m.text = text;
      m.stable = oit->second->stable();
      if (m.stable) m.value = oit->second->values[0];
      out.push_back(std::move(m));
    }
  }
  return out;
}

const std::vector<KnownVar>& known_for(EntryAnalysis& an, size_t pidx) {
  auto it = an.known.find(pidx);
  if (it != an.known.end()) return it->second;
  std::vector<KnownVar>& out = an.known[pidx];
  const FunctionInfo& info = an.front.info;
  const Profile& prof = an.entry->profiles[pidx];

  std::map<std::string, int> name_count;
  for (const Symbol& s : info.symbols) name_count[s.name]++;

  // Every runtime observation of a bare name, across all lines.
  auto name_values = [&](const std::string& name,
                         std::vector<const ScalarValue*>& vals) {
    for (const LineObservation& o : prof.observations)
      if (o.expr_text == name)
        for (const ScalarValue& v : o.values) vals.push_back(&v);
  };
  auto all_equal = [](const std::vector<const ScalarValue*>& vals,
                      const ScalarValue& want) {
    for (const ScalarValue* v : vals)
      if (!v->same_value(want)) return false;
    return true;
  };

  bool opaque_flow = info.has_goto || info.has_switch;

  for (const Symbol* p : info.params) {
    if (!p->type->is_integer() || p->address_taken || !p->writes_observable)
      continue;
    if (name_count[p->name] != 1) continue;
    if (p->param_index < 0 || (size_t)p->param_index >= prof.input.size())
      continue;
    const InputValue& iv = prof.input[p->param_index];
    if (iv.is_buffer) continue;
    std::vector<const ScalarValue*> vals;
    name_values(p->name, vals);
    if (!all_equal(vals, iv.scalar)) continue;
    out.push_back({p, nullptr, iv.scalar});
  }
  if (!opaque_flow) {
    // Map each local to its declaration statement.
    std::map<const Symbol*, const Stmt*> decl_of;
    for (const Stmt* s : info.stmts) {
      auto nit = info.notes.find(s);
      if (nit != info.notes.end() && nit->second.decl_sym)
        decl_of[nit->second.decl_sym] = s;
    }
    for (const Symbol* l : info.locals) {
      if (!l->type->is_integer() || l->address_taken || l->is_static ||
          !l->writes_observable || !l->has_init)
        continue;
      if (name_count[l->name] != 1) continue;
      auto dit = decl_of.find(l);
      if (dit == decl_of.end()) continue;
      const Stmt* decl = dit->second;
      std::vector<const ScalarValue*> vals;
      name_values(l->name, vals);
      if (vals.empty()) continue;  // declaration never executed
      // The declaration's own post-log must be among them.
      bool decl_seen = false;
      for (const LineObservation& o : prof.observations)
        if (o.line == decl->span.line && o.expr_text == l->name &&
            !o.values.empty())
          decl_seen = true;
      if (!decl_seen) continue;
      if (!all_equal(vals, *vals[0])) continue;
      out.push_back({l, decl, *vals[0]});
    }
  }
  return out;
}

// True when `site` sits after `decl` inside the declaring block.
bool in_scope(const EntryAnalysis& an, const Stmt* decl, const Stmt* site) {
  auto nit = an.front.info.notes.find(decl);
  if (nit == an.front.info.notes.end()) return false;
  // A null parent_block means the function body compound.
  const Stmt* blk = nit->second.parent_block
                        ? nit->second.parent_block
                        : an.front.unit->fn->body;
  int didx = nit->second.index_in_block;
  auto cit = an.chains.find(site);
  if (cit == an.chains.end()) return false;
  for (const auto& [b, i] : cit->second)
    if (b == blk && (int)i > didx) return true;
  return false;
}

}  // namespace

// ------------------------------------------------------------ public bits

std::string synthesize_expression(const ScalarValue& target,
                                  const std::vector<VarBinding>& vars,
                                  Choices& ch) {
  bool uv = ch.use_var(!vars.empty());
  if (uv && !vars.empty()) {
    const VarBinding& v = vars[ch.pick_var(vars.size())];
    Sim base{v.value.type, v.value.exact()};
    std::vector<Form> forms = delta_forms(v.name, base, target);
    if (!forms.empty()) return forms[ch.pick_delta_op(forms.size())].text;
  }
  return c_literal(target);
}

namespace {

// ------------------------------------------------------------ synthesizer

constexpr const char* kAuditHelpers =
    "static long long __aud_i(int id, long long v) {\n"
    "    fprintf(stderr, \"A\\t%d\\t%lld\\n\", id, v);\n"
    "    return v;\n"
    "}\n"
    "static unsigned long long __aud_u(int id, unsigned long long v) {\n"
    "    fprintf(stderr, \"A\\t%d\\t%llu\\n\", id, v);\n"
    "    return v;\n"
    "}\n";

constexpr const char* kChecksumStep =
    "static void __cs_step(unsigned long long *h, unsigned long long w) {\n"
    "    int i;\n"
    "    for (i = 0; i < 8; i++) {\n"
    "        *h = (*h ^ ((w >> (8 * i)) & 0xffULL)) * 1099511628211ULL;\n"
    "    }\n"
    "}\n";

class Synthesizer {
 public:
  Synthesizer(const CodeDb& db, const SynthesisConfig& cfg, Choices& ch)
      : db_(db), cfg_(cfg), ch_(ch) {}

  SynthesisResult run() {
    SynthesisResult res;
    setup_globals();
    if (!pick_seed_entry()) {
      res.error = error_;
      return res;
    }
    for (int it = 0; it < cfg_.iterations && error_.empty(); it++) {
      size_t ti = ch_.pick_target(slots_.size());
      scan_target(ti);
    }
    if (!error_.empty()) {
      res.error = error_;
      return res;
    }
    res.program = emit();
    res.ok = true;
    return res;
  }

 private:
  struct Slot {
    const FunctionEntry* entry = nullptr;
    EntryAnalysis* an = nullptr;
    size_t profile = 0;
    std::vector<TextEdit> edits;
    std::vector<std::pair<size_t, size_t>> consumed;
    int seq = 0;
  };

  void setup_globals() {
    int n = ch_.global_count(cfg_.globals_min, cfg_.globals_max);
    for (int k = 0; k < n; k++) {
      Scalar t = ch_.global_type();
      globals_.push_back({"g" + std::to_string(k), t, ch_.global_init(t)});
    }
  }

  EntryAnalysis* analysis_for(const FunctionEntry* e) {
    auto it = cache_.find(e->id);
    if (it != cache_.end()) return it->second.get();
    auto an = build_entry_analysis(*e, error_);
    EntryAnalysis* raw = an.get();
    if (raw) cache_[e->id] = std::move(an);
    return raw;
  }

  bool push_slot(const FunctionEntry* e, size_t profile) {
    EntryAnalysis* an = analysis_for(e);
    if (!an) return false;
    Slot s;
    s.entry = e;
    s.an = an;
    s.profile = profile;
    slots_.push_back(std::move(s));
    in_flist_.insert(e->id);
    return true;
  }

  bool pick_seed_entry() {
    const FunctionEntry* seed = nullptr;
    if (!cfg_.forced_seed_id.empty()) {
      seed = db_.find(cfg_.forced_seed_id);
      if (!seed || !entry_seed_eligible(*seed) || seed->profiles.empty()) {
        error_ = "forced seed " + cfg_.forced_seed_id +
                 " is missing or not seed-eligible";
        return false;
      }
    } else {
      std::vector<const FunctionEntry*> pool;
      for (const auto& [id, e] : db_.entries())
        if (entry_seed_eligible(e) && !e.profiles.empty()) pool.push_back(&e);
      if (pool.empty()) {
        error_ = "no seed-eligible entry in database";
        return false;
      }
      seed = pool[ch_.pick_seed(pool.size())];
    }
    return push_slot(seed, ch_.pick_profile(seed->profiles.size()));
  }

  bool consumed_overlap(const Slot& slot, size_t start, size_t end) const {
    for (const auto& [s, e] : slot.consumed)
      if (start < e && s < end) return true;
    return false;
  }

  // Variables with known values, visible and in scope at `site`.
  std::vector<VarBinding> v_at(size_t ti, const Stmt* site) {
    Slot& slot = slots_[ti];
    std::vector<VarBinding> out;
    for (const KnownVar& kv : known_for(*slot.an, slot.profile)) {
      if (kv.decl_stmt && !in_scope(*slot.an, kv.decl_stmt, site)) continue;
      out.push_back({kv.sym->name, kv.value});
    }
    return out;
  }

  bool ident_clash(const Slot& slot, const std::string& name) const {
    return slot.an->idents.count(name) != 0;
  }

  // Shared tail: stage the splice edit, consume the span, log.
  void apply_expr_rewrite(size_t ti, const Matched& m,
                          const std::string& core, Scalar aud_type,
                          const std::string& predicted) {
    Slot& slot = slots_[ti];
    int id = next_audit_++;
    std::string inserted = core;
    if (cfg_.audit) {
      if (m.stable) {
        bool u = !scalar_is_signed(aud_type);
        inserted = cast_text(
            aud_type,
            std::string(u ? "__aud_u" : "__aud_i") + "(" +
                std::to_string(id) + ", " +
                (u ? "(unsigned long long)(" : "(long long)(") + core + "))");
      } else {
        // core is "<expr> + <cast>(<adjustment>)": wrap the adjustment.
        inserted = m.text + " + " +
                   cast_text(m.expr->type->scalar,
                             "__aud_i(" + std::to_string(id) +
                                 ", (long long)(" + unstable_adj_ + "))");
      }
    }
    slot.edits.push_back({m.expr->span.start, m.expr->span.end,
                          splice(inserted), slot.seq++});
    slot.consumed.push_back({m.expr->span.start, m.expr->span.end});
    Replacement r;
    r.entry_ordinal = (int)ti;
    r.entry_id = slot.entry->id;
    r.line = m.line;
    r.old_text = slot.an->front.unit->span_text(m.expr->span);
    r.new_text = core;
    r.predicted = predicted;
    r.audit_id = id;
    log_.push_back(std::move(r));
  }

  void try_call(size_t ti, const Matched& m) {
    std::vector<const FunctionEntry*> pool;
    for (const auto& [id, e] : db_.entries())
      if (entry_call_insertable(e) && !e.profiles.empty() &&
          !in_flist_.count(id))
        pool.push_back(&e);
    if (pool.empty()) return;
    const FunctionEntry* callee = pool[ch_.pick_callee(pool.size())];
    size_t pidx = ch_.pick_profile(callee->profiles.size());
    const Profile& cp = callee->profiles[pidx];
    if (ident_clash(slots_[ti], callee->fn_name)) return;
    if (cfg_.audit && (ident_clash(slots_[ti], "__aud_i") ||
                       ident_clash(slots_[ti], "__aud_u")))
      return;

    std::vector<VarBinding> vars = v_at(ti, m.stmt);
    std::string call = callee->fn_name + "(";
    for (size_t j = 0; j < callee->shape.params.size(); j++) {
      if (j) call += ", ";
      call += synthesize_expression(cp.input[j].scalar, vars, ch_);
    }
    call += ")";

    std::string core, predicted;
    if (m.stable) {
      Sim base{callee->shape.ret, cp.output.exact()};
      std::vector<Form> forms = delta_forms(call, base, m.value);
      if (forms.empty()) return;
      core = forms[ch_.pick_delta_op(forms.size())].text;
      predicted = m.value.decimal();
    } else {
      unstable_adj_ = call + " - " + c_literal(cp.output);
      core = m.text + " + " + cast_text(m.expr->type->scalar, unstable_adj_);
      predicted = "0";
    }
    apply_expr_rewrite(ti, m, core, m.expr->type->scalar, predicted);
    if (!push_slot(callee, pidx)) return;  // error_ set
  }

  void try_global(size_t ti, const Matched& m) {
    if (globals_.empty()) return;
    const GlobalVar& g = globals_[ch_.pick_global(globals_.size())];
    if (ident_clash(slots_[ti], g.name)) return;
    if (cfg_.audit && (ident_clash(slots_[ti], "__aud_i") ||
                       ident_clash(slots_[ti], "__aud_u")))
      return;

    if (m.stable && ch_.write_not_read() && try_write(ti, m, g)) return;

    std::string core, predicted;
    if (m.stable) {
      Sim base{g.type, g.init.exact()};
      std::vector<Form> forms = delta_forms(g.name, base, m.value);
      if (forms.empty()) return;
      core = forms[ch_.pick_delta_op(forms.size())].text;
      predicted = m.value.decimal();
    } else {
      unstable_adj_ = g.name + " - " + c_literal(g.init);
      core = m.text + " + " + cast_text(m.expr->type->scalar, unstable_adj_);
      predicted = "0";
    }
    apply_expr_rewrite(ti, m, core, m.expr->type->scalar, predicted);
  }

  // Write-share: insert "g = g + (v - val);" after the statement. The
  // addend is provably zero, so g keeps its initializer value.
  bool try_write(size_t ti, const Matched& m, const GlobalVar& g) {
    Slot& slot = slots_[ti];
    if (m.expr->kind != Expr::Kind::Var) return false;
    const Stmt* s = m.stmt;
    if (s->kind != Stmt::Kind::ExprStmt && s->kind != Stmt::Kind::Decl)
      return false;
    // Must sit directly in a compound so a statement can follow it.
    auto cit = slot.an->chains.find(s);
    if (cit == slot.an->chains.end() || cit->second.empty()) return false;
    const auto& [blk, idx] = cit->second.back();
    if (blk->stmts[idx] != s) return false;
    // The statement must not write the variable we read back.
    auto nit = slot.an->front.info.notes.find(s);
    if (nit != slot.an->front.info.notes.end()) {
      const StmtNote& note = nit->second;
      if (note.post_target && note.post_target->kind == Expr::Kind::Var &&
          note.post_target->name == m.text)
        return false;
      if (note.decl_sym && note.decl_sym->name == m.text) return false;
    }

    std::string val_lit = c_literal(m.value);
    Sim gs{g.type, g.init.exact()};
    Sim vs{m.value.type, m.value.exact()};
    std::string rhs;
    // Prefer the plain spelling when it is exact and defined.
    auto s1 = sim_binop('+', gs, vs);
    auto s2 = s1 ? sim_binop('-', *s1, lit_sim(m.value)) : std::nullopt;
    auto fin = s2 ? convert_value(g.type, s2->val) : std::nullopt;
    if (fin && *fin == g.init.exact()) {
      rhs = g.name + " + " + m.text + " - " + val_lit;
    } else {
      rhs = g.name + " + " +
            cast_text(g.type, m.text + " - " + val_lit);
    }
    int id = next_audit_++;
    std::string stmt_text = g.name + " = " + rhs + ";";
    std::string inserted = stmt_text;
    if (cfg_.audit) {
      bool u = !scalar_is_signed(g.type);
      inserted = g.name + " = " +
                 cast_text(g.type, std::string(u ? "__aud_u" : "__aud_i") +
                                       "(" + std::to_string(id) + ", " +
                                       (u ? "(unsigned long long)("
                                          : "(long long)(") +
                                       rhs + "))") +
                 ";";
    }
    slot.edits.push_back({s->span.end, s->span.end, " " + inserted,
                          slot.seq++});
    Replacement r;
    r.entry_ordinal = (int)ti;
    r.entry_id = slot.entry->id;
    r.line = s->span.line;
    r.old_text = "";
    r.new_text = stmt_text;
    r.predicted = g.init.decimal();
    r.audit_id = id;
    log_.push_back(std::move(r));
    return true;
  }

  void scan_target(size_t ti) {
    EntryAnalysis* an = slots_[ti].an;
    size_t profile = slots_[ti].profile;
    const std::vector<Matched>& ms = matched_for(*an, profile);
    for (const Matched& m : ms) {
      if (!error_.empty()) return;
      if (consumed_overlap(slots_[ti], m.expr->span.start, m.expr->span.end))
        continue;
      if (!ch_.do_rewrite()) continue;
      if (ch_.rewrite_is_call())
        try_call(ti, m);
      else
        try_global(ti, m);
    }
  }

  SynthesizedProgram emit() {
    SynthesizedProgram prog;
    std::string out = "#include <stdio.h>\n\n";
    if (cfg_.audit) {
      out += kAuditHelpers;
      out += "\n";
    }
    out += kChecksumStep;
    out += "\n";
    for (const GlobalVar& g : globals_) {
      out += scalar_c_type(g.type) + " " + g.name + " = " +
             c_literal(g.init) + ";\n";
    }
    out += "\n";
    for (size_t k = slots_.size(); k-- > 0;) {
      Slot& slot = slots_[k];
      std::vector<TextEdit> edits = slot.edits;
      out += apply_edits(slot.entry->text, std::move(edits));
      if (out.back() != '\n') out += "\n";
      out += "\n";
    }

    out += "int main(void) {\n";
    for (size_t k = 0; k < slots_.size(); k++) {
      const Slot& slot = slots_[k];
      const Profile& p = slot.entry->profiles[slot.profile];
      std::string args;
      for (size_t j = 0; j < p.input.size(); j++) {
        const InputValue& iv = p.input[j];
        std::string arg;
        if (iv.is_buffer) {
          std::string name =
              "__b" + std::to_string(k) + "_" + std::to_string(j);
          std::string init;
          for (size_t x = 0; x < iv.elements.size(); x++) {
            if (x) init += ", ";
            init += c_literal(iv.elements[x]);
          }
          out += "    " + scalar_c_type(iv.elem) + " " + name + "[" +
                 std::to_string(iv.elements.size()) + "] = { " + init +
                 " };\n";
          arg = name;
        } else {
          arg = c_literal(iv.scalar);
        }
        if (j) args += ", ";
        args += arg;
      }
      out += "    " + scalar_c_type(slot.entry->shape.ret) + " __r" +
             std::to_string(k) + " = " + slot.entry->fn_name + "(" + args +
             ");\n";
    }

    auto fold_cast = [](Scalar t) {
      return scalar_is_signed(t)
                 ? std::string("(unsigned long long)(long long)")
                 : std::string("(unsigned long long)");
    };

    out += "    unsigned long long __mix = 1099511628211ULL;\n";
    uint64_t mix = 1099511628211ULL;
    for (size_t k = 0; k < slots_.size(); k++) {
      const Slot& slot = slots_[k];
      const ScalarValue& rv = slot.entry->profiles[slot.profile].output;
      out += "    __mix = (__mix ^ " + fold_cast(slot.entry->shape.ret) +
             "__r" + std::to_string(k) + ") * 1099511628211ULL;\n";
      mix = (mix ^ bits64(rv)) * 1099511628211ULL;
    }

    std::vector<ScalarValue> final_globals;
    for (const GlobalVar& g : globals_) {
      uint64_t ck = ch_.mutation_constant();
      uint64_t mask = scalar_is_signed(g.type)
                          ? (uint64_t)scalar_max(g.type)
                          : (uint64_t)wrap_unsigned(g.type, -1);
      out += "    " + g.name + " = (" + scalar_c_type(g.type) + ")((" +
             fold_cast(g.type) + g.name + " + (__mix ^ " + hex_ull(ck) +
             ")) & " + hex_ull(mask) + ");\n";
      uint64_t nv = (bits64(g.init) + (mix ^ ck)) & mask;
      final_globals.push_back(ScalarValue::of_int(g.type, (int128)nv));
    }

    out += "    unsigned long long __cs = 14695981039346656037ULL;\n";
    uint64_t cs = kFnvOffset;
    for (size_t k = 0; k < slots_.size(); k++) {
      const Slot& slot = slots_[k];
      const ScalarValue& rv = slot.entry->profiles[slot.profile].output;
      out += "    __cs_step(&__cs, " + fold_cast(slot.entry->shape.ret) +
             "__r" + std::to_string(k) + ");\n";
      cs = fnv1a64_word(bits64(rv), cs);
    }
    for (size_t k = 0; k < globals_.size(); k++) {
      out += "    __cs_step(&__cs, " + fold_cast(globals_[k].type) +
             globals_[k].name + ");\n";
      cs = fnv1a64_word(bits64(final_globals[k]), cs);
    }
    out += "    printf(\"checksum = %016llx\\n\", __cs);\n";
    out += "    return 0;\n}\n";

    prog.text = std::move(out);
    for (const Slot& s : slots_) {
      prog.f_list.push_back(s.entry->id);
      prog.profile_choice.push_back(s.profile);
    }
    prog.globals = globals_;
    prog.log = log_;
    prog.predicted_checksum = cs;
    return prog;
  }

  const CodeDb& db_;
  const SynthesisConfig& cfg_;
  Choices& ch_;
  std::map<std::string, std::unique_ptr<EntryAnalysis>> cache_;
  std::vector<Slot> slots_;
  std::set<std::string> in_flist_;
  std::vector<GlobalVar> globals_;
  std::vector<Replacement> log_;
  int next_audit_ = 0;
  std::string error_;
  std::string unstable_adj_;  // adjustment text of the rewrite being built
};

}  // namespace

SynthesisResult synthesize_with(const CodeDb& db, const SynthesisConfig& cfg,
                                Choices& choices) {
  Synthesizer s(db, cfg, choices);
  return s.run();
}

SynthesisResult synthesize(const CodeDb& db, const SynthesisConfig& cfg) {
  RngChoices ch(cfg.rng_seed, cfg.p_synth, cfg.p_call);
  return synthesize_with(db, cfg, ch);
}

AuditReplay run_audit_replay(const SynthesizedProgram& prog,
                             const CompilerSpec& compiler,
                             const std::string& work_dir) {
  AuditReplay rep;
  std::string dir = make_temp_dir("cobble.replay", work_dir);
  if (dir.empty()) {
    rep.detail = "cannot create work dir";
    return rep;
  }
  struct Cleanup {
    std::string d;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(d, ec);
    }
  } cleanup{dir};

  std::string src = dir + "/prog.c";
  std::string exe = dir + "/prog";
  if (!write_text_file(src, prog.text)) {
    rep.detail = "cannot write " + src;
    return rep;
  }
  std::vector<std::string> argv{compiler.path};
  for (const auto& f : compiler.extra_flags) argv.push_back(f);
  for (const char* f : {"-std=c99", "-O0", "-w"}) argv.push_back(f);
  argv.push_back(src);
  argv.push_back("-o");
  argv.push_back(exe);
  RunLimits clim;
  clim.wall_seconds = 120;
  clim.memory_bytes = 0;
  RunResult cr = run_process(argv, clim);
  if (!cr.ok()) {
    rep.detail = "compile failed: " + cr.err.substr(0, 800);
    return rep;
  }
  RunLimits rlim;
  rlim.wall_seconds = 20;
  RunResult rr = run_process({exe}, rlim);
  if (!rr.ok()) {
    rep.detail = "run failed";
    return rep;
  }

  std::map<int, std::vector<std::string>> seen;
  std::istringstream in(rr.err);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("A\t", 0) != 0) continue;
    size_t t = line.find('\t', 2);
    if (t == std::string::npos) continue;
    seen[atoi(line.c_str() + 2)].push_back(line.substr(t + 1));
  }
  std::set<int> known_ids;
  for (const Replacement& r : prog.log) {
    known_ids.insert(r.audit_id);
    auto it = seen.find(r.audit_id);
    if (it == seen.end()) {
      rep.detail = "audit id " + std::to_string(r.audit_id) +
                   " never logged (entry " + r.entry_id + ")";
      return rep;
    }
    for (const std::string& got : it->second) {
      if (got != r.predicted) {
        rep.detail = "audit id " + std::to_string(r.audit_id) + " logged " +
                     got + ", predicted " + r.predicted;
        return rep;
      }
    }
  }
  for (const auto& [id, vals] : seen) {
    if (!known_ids.count(id)) {
      rep.detail = "unexpected audit id " + std::to_string(id);
      return rep;
    }
  }
  unsigned long long printed = 0;
  if (sscanf(rr.out.c_str(), "checksum = %llx", &printed) != 1) {
    rep.detail = "missing checksum line";
    return rep;
  }
  if (printed != prog.predicted_checksum) {
    char buf[64];
    snprintf(buf, sizeof buf, "checksum %016llx, predicted %016llx", printed,
             (unsigned long long)prog.predicted_checksum);
    rep.detail = buf;
    return rep;
  }
  rep.ok = true;
  return rep;
}

}  // namespace cobble
