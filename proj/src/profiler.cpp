#include "cobble/profiler.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>

#include "cobble/hashing.hpp"
#include "cobble/printer.hpp"
#include "cobble/textedit.hpp"

namespace fs = std::filesystem;

namespace cobble {

bool LineObservation::stable() const {
  for (size_t i = 1; i < values.size(); i++)
    if (!values[i].same_value(values[0])) return false;
  return !values.empty();
}

namespace {

constexpr const char* kProbePrologue = R"(#include <stdio.h>
#include <stdlib.h>
static unsigned long long __cb_n = 0;
static void __cb_tick(void) {
    __cb_n++;
    if (__cb_n > 200000ULL) {
        fprintf(stderr, "OVFL\n");
        exit(3);
    }
}
static void __cb_pi(int line, unsigned long long h, long long v) {
    __cb_tick();
    fprintf(stderr, "P\t%d\t%016llx\t%lld\n", line, h, v);
}
static void __cb_pu(int line, unsigned long long h, unsigned long long v) {
    __cb_tick();
    fprintf(stderr, "P\t%d\t%016llx\t%llu\n", line, h, v);
}
static void __cb_pf(int line, unsigned long long h, float v) {
    union { float f; unsigned int b; } u;
    u.f = v;
    __cb_tick();
    fprintf(stderr, "P\t%d\t%016llx\tf32:%08x\n", line, h, u.b);
}
static void __cb_pd(int line, unsigned long long h, double v) {
    union { double f; unsigned long long b; } u;
    u.f = v;
    __cb_tick();
    fprintf(stderr, "P\t%d\t%016llx\tf64:%016llx\n", line, h, u.b);
}
)";

std::string run_detail(const RunResult& r) {
  if (!r.started) return "spawn failed: " + r.spawn_error;
  if (r.timed_out) return "timed out";
  if (r.term_signal) return "killed by signal " + std::to_string(r.term_signal);
  return "exit code " + std::to_string(r.exit_code);
}

std::string clip(const std::string& s, size_t n = 2000) {
  if (s.size() <= n) return s;
  return s.substr(0, n) + "...[truncated]";
}

// Probe call text for one expression; value routed by scalar class.
std::string probe_call(int line, uint64_t hash, Scalar t,
                       const std::string& expr_text) {
  char head[64];
  snprintf(head, sizeof head, "(%d, 0x%016llxULL, ", line,
           (unsigned long long)hash);
  std::string fn, cast;
  if (t == Scalar::F32) {
    fn = "__cb_pf";
    cast = "(float)";
  } else if (t == Scalar::F64) {
    fn = "__cb_pd";
    cast = "(double)";
  } else if (t == Scalar::U64) {
    fn = "__cb_pu";
    cast = "(unsigned long long)";
  } else {
    fn = "__cb_pi";
    cast = "(long long)";
  }
  return fn + head + cast + "(" + expr_text + "));";
}

// True when re-evaluating the subtree cannot run code or store anything.
bool expr_is_pure(const Expr* e) {
  if (!e) return true;
  switch (e->kind) {
    case Expr::Kind::Call:
    case Expr::Kind::Assign:
      return false;
    case Expr::Kind::Unary:
      if (e->un_op == UnOp::PreInc || e->un_op == UnOp::PreDec ||
          e->un_op == UnOp::PostInc || e->un_op == UnOp::PostDec)
        return false;
      break;
    default:
      break;
  }
  if (!expr_is_pure(e->a) || !expr_is_pure(e->b) || !expr_is_pure(e->c))
    return false;
  for (const Expr* arg : e->args)
    if (!expr_is_pure(arg)) return false;
  return true;
}

std::string extern_decl(const FunctionDef& fn) {
  std::string params;
  if (fn.params.empty()) {
    params = "void";
  } else {
    for (size_t i = 0; i < fn.params.size(); i++) {
      if (i) params += ", ";
      params += type_c_text(fn.params[i].type, fn.params[i].name);
    }
  }
  return "extern " +
         type_c_text(fn.return_type, fn.name + "(" + params + ")") + ";";
}

struct ArgSet {
  std::string decls;  // buffer array declarations, indented one level
  std::string args;   // comma-joined argument list
};

ArgSet materialize_args(const InputVector& input, const std::string& suffix) {
  ArgSet as;
  for (size_t i = 0; i < input.size(); i++) {
    const InputValue& v = input[i];
    std::string arg;
    if (v.is_buffer) {
      std::string name = "__cb_b" + std::to_string(i) + suffix;
      std::string init;
      for (size_t j = 0; j < v.elements.size(); j++) {
        if (j) init += ", ";
        init += c_literal(v.elements[j]);
      }
      as.decls += "    " + scalar_c_type(v.elem) + " " + name + "[" +
                  std::to_string(v.elements.size()) + "] = { " + init +
                  " };\n";
      arg = name;
    } else {
      arg = c_literal(v.scalar);
    }
    if (i) as.args += ", ";
    as.args += arg;
  }
  return as;
}

// RET line statements for one invocation, exact for every return type.
std::string ret_print_block(Scalar ret, const std::string& var,
                            const std::string& tag) {
  std::string out;
  if (ret == Scalar::F32) {
    out += "    { union { float f; unsigned int b; } __u" + tag + "; __u" +
           tag + ".f = " + var + "; printf(\"RET\\tf32:%08x\\n\", __u" + tag +
           ".b); }\n";
  } else if (ret == Scalar::F64) {
    out += "    { union { double f; unsigned long long b; } __u" + tag +
           "; __u" + tag + ".f = " + var +
           "; printf(\"RET\\tf64:%016llx\\n\", __u" + tag + ".b); }\n";
  } else if (ret == Scalar::U64) {
    out += "    printf(\"RET\\t%llu\\n\", " + var + ");\n";
  } else {
    out += "    printf(\"RET\\t%lld\\n\", (long long)" + var + ");\n";
  }
  return out;
}

std::string ret_capture_type(Scalar ret) {
  if (ret == Scalar::F32) return "float";
  if (ret == Scalar::F64) return "double";
  if (ret == Scalar::U64) return "unsigned long long";
  return "long long";
}

struct Workspace {
  std::string dir;
  bool owned = false;
  explicit Workspace(const ProfilerConfig& cfg) {
    dir = make_temp_dir("cobble.prof", cfg.work_dir);
    owned = true;
  }
  ~Workspace() {
    if (owned && !dir.empty()) {
      std::error_code ec;
      fs::remove_all(dir, ec);
    }
  }
};

RunResult compile_file(const ProfilerConfig& cfg,
                       const std::vector<std::string>& flags,
                       const std::string& src, const std::string& out) {
  std::vector<std::string> argv{cfg.compiler.path};
  for (const auto& f : cfg.compiler.extra_flags) argv.push_back(f);
  for (const auto& f : flags) argv.push_back(f);
  argv.push_back(src);
  argv.push_back("-o");
  argv.push_back(out);
  RunLimits lim;
  lim.wall_seconds = cfg.compile_seconds;
  lim.memory_bytes = 0;  // toolchains manage their own memory
  return run_process(argv, lim);
}

}  // namespace

ValidationReport validate_syntax(const SourceUnit& u,
                                 const ProfilerConfig& cfg) {
  ValidationReport rep;
  rep.stage = ValidationReport::Stage::Syntax;
  Workspace ws{cfg};
  if (ws.dir.empty()) {
    rep.detail = "cannot create work dir";
    return rep;
  }
  std::string text = u.text;
  if (!text.empty() && text.back() != '\n') text += "\n";
  text += "\n" + extern_decl(*u.fn) + "\n";
  std::string src = ws.dir + "/unit.c";
  std::string obj = ws.dir + "/unit.o";
  if (!write_text_file(src, text)) {
    rep.detail = "cannot write " + src;
    return rep;
  }
  std::vector<std::string> flags{"-std=c99", "-O0", "-c"};
  for (const auto& w : cfg.warning_flags) flags.push_back(w);
  RunResult r = compile_file(cfg, flags, src, obj);
  if (r.ok()) {
    rep.pass = true;
  } else {
    rep.detail = run_detail(r) + ": " + clip(r.err);
  }
  return rep;
}

ValidationReport validate_syntax_text(std::string_view code,
                                      const ProfilerConfig& cfg) {
  FrontResult fr = front_process(code);
  if (!fr.ok()) {
    ValidationReport rep;
    rep.stage = ValidationReport::Stage::Syntax;
    std::string msgs;
    for (const Diagnostic& d : fr.diags) {
      if (!msgs.empty()) msgs += "; ";
      msgs += d.kind == Diagnostic::Kind::Unsupported
                  ? "unsupported " + d.construct
                  : d.message;
    }
    rep.detail = "parse failed: " + msgs;
    return rep;
  }
  return validate_syntax(*fr.unit, cfg);
}

ValidationReport run_sanitized(const SourceUnit& u, const FunctionInfo& info,
                               const InputVector& input,
                               const ProfilerConfig& cfg) {
  ValidationReport rep;
  rep.stage = ValidationReport::Stage::Sanitize;
  Workspace ws{cfg};
  if (ws.dir.empty()) {
    rep.detail = "cannot create work dir";
    return rep;
  }
  ArgSet as = materialize_args(input, "");
  std::string text = u.text;
  if (!text.empty() && text.back() != '\n') text += "\n";
  text += "\nint main(void) {\n" + as.decls + "    " + u.fn->name + "(" +
          as.args + ");\n    return 0;\n}\n";
  std::string src = ws.dir + "/san.c";
  std::string exe = ws.dir + "/san";
  if (!write_text_file(src, text)) {
    rep.detail = "cannot write " + src;
    return rep;
  }
  std::string fsan = "-fsanitize=";
  for (size_t i = 0; i < cfg.sanitizers.size(); i++) {
    if (i) fsan += ",";
    fsan += cfg.sanitizers[i];
  }
  std::vector<std::string> flags{"-std=c99", "-O0", "-g"};
  if (!cfg.sanitizers.empty()) {
    flags.push_back(fsan);
    flags.push_back("-fno-sanitize-recover=all");
  }
  RunResult cr = compile_file(cfg, flags, src, exe);
  if (!cr.ok()) {
    rep.detail = "driver compile failed: " + run_detail(cr) + ": " +
                 clip(cr.err);
    return rep;
  }
  RunLimits lim = cfg.run_limits;
  lim.memory_bytes = 0;  // sanitizers reserve vast address space
  RunResult rr = run_process({exe}, lim, "",
                             {"ASAN_OPTIONS=detect_leaks=0"});
  bool report_seen = rr.err.find("runtime error:") != std::string::npos ||
                     rr.err.find("AddressSanitizer") != std::string::npos;
  if (rr.ok() && !report_seen) {
    rep.pass = true;
  } else {
    rep.detail = run_detail(rr) + ": " + clip(rr.err, 800);
  }
  (void)info;
  return rep;
}

namespace {

// One planned probe, still tied to its statement for edit placement.
struct RawProbe {
  const Stmt* stmt = nullptr;
  bool pre = false;  // insert before the statement (else after)
  int line = 0;
  std::string text;
  Scalar type = Scalar::I32;
};

std::vector<RawProbe> collect_probes(const FunctionInfo& info) {
  std::vector<RawProbe> out;
  for (const Stmt* s : info.stmts) {
    auto it = info.notes.find(s);
    if (it == info.notes.end()) continue;
    const StmtNote& note = it->second;
    int line = s->span.line;
    if (note.probe_eligible && !note.pre_exprs.empty()) {
      std::set<std::string> seen;
      for (const Expr* e : note.pre_exprs) {
        std::string text = print_expr(e);
        if (!seen.insert(text).second) continue;
        out.push_back({s, true, line, text, e->type->scalar});
      }
    }
    if (note.post_target && note.post_target->type &&
        note.post_target->type->is_arith() &&
        expr_is_pure(note.post_target)) {
      out.push_back({s, false, line, print_expr(note.post_target),
                     note.post_target->type->scalar});
    } else if (note.decl_sym && note.decl_sym->type->is_arith()) {
      out.push_back(
          {s, false, line, note.decl_sym->name, note.decl_sym->type->scalar});
    }
  }
  return out;
}

}  // namespace

std::vector<ProbeSite> enumerate_probe_sites(const FunctionInfo& info) {
  std::vector<ProbeSite> out;
  for (const RawProbe& rp : collect_probes(info))
    out.push_back({rp.line, rp.text, rp.type});
  return out;
}

std::string build_instrumented_unit(
    const SourceUnit& u, const FunctionInfo& info,
    std::map<std::pair<int, uint64_t>, ProbeSite>& sites) {
  std::vector<TextEdit> edits;
  int seq = 0;
  for (const RawProbe& rp : collect_probes(info)) {
    uint64_t h = fnv1a64(rp.text);
    sites[{rp.line, h}] = ProbeSite{rp.line, rp.text, rp.type};
    std::string call = probe_call(rp.line, h, rp.type, rp.text);
    if (rp.pre) {
      edits.push_back(
          {rp.stmt->span.start, rp.stmt->span.start, call + " ", seq++});
    } else {
      edits.push_back(
          {rp.stmt->span.end, rp.stmt->span.end, " " + call, seq++});
    }
  }
  std::string body = apply_edits(u.text, std::move(edits));
  std::string out = kProbePrologue;
  out += "\n";
  out += body;
  if (out.back() != '\n') out += "\n";
  return out;
}

namespace {

struct StderrParse {
  bool ok = false;
  bool overflow = false;
  std::string error;
  std::vector<std::string> seg1;  // raw P records, first invocation
  std::vector<std::string> seg2;
};

StderrParse parse_probe_stream(const std::string& err) {
  StderrParse p;
  int seg = 0;
  std::istringstream in(err);
  std::string line;
  while (std::getline(in, line)) {
    if (line == "OVFL") {
      p.overflow = true;
      return p;
    }
    if (line == "B\t1") {
      seg = 1;
      continue;
    }
    if (line == "B\t2") {
      seg = 2;
      continue;
    }
    if (line.rfind("P\t", 0) == 0) {
      if (seg == 1)
        p.seg1.push_back(line);
      else if (seg == 2)
        p.seg2.push_back(line);
      else {
        p.error = "probe record outside invocation markers";
        return p;
      }
    }
    // Anything else on stderr is tolerated (loader noise etc.).
  }
  if (seg != 2) {
    p.error = "missing invocation markers";
    return p;
  }
  p.ok = true;
  return p;
}

struct StdoutParse {
  bool ok = false;
  std::string error;
  std::string ret1, ret2;  // raw value field texts
  unsigned long long cnt1 = 0, cnt2 = 0;
};

StdoutParse parse_driver_stdout(const std::string& out) {
  StdoutParse p;
  std::vector<std::string> rets;
  std::vector<unsigned long long> cnts;
  std::istringstream in(out);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("RET\t", 0) == 0) rets.push_back(line.substr(4));
    if (line.rfind("CNT\t", 0) == 0)
      cnts.push_back(strtoull(line.c_str() + 4, nullptr, 10));
  }
  if (rets.size() != 2 || cnts.size() != 2) {
    p.error = "malformed driver output";
    return p;
  }
  p.ret1 = rets[0];
  p.ret2 = rets[1];
  p.cnt1 = cnts[0];
  p.cnt2 = cnts[1];
  p.ok = true;
  return p;
}

std::optional<ScalarValue> parse_value_field(Scalar t,
                                             const std::string& field) {
  if (field.rfind("f32:", 0) == 0 || field.rfind("f64:", 0) == 0)
    return parse_scalar_value(t, "", field.substr(4));
  return parse_scalar_value(t, field);
}

}  // namespace

ProfileOutcome profile_function(const SourceUnit& u, const FunctionInfo& info,
                                const InputVector& input,
                                const ProfilerConfig& cfg) {
  ProfileOutcome out;
  if (u.text.find("__cb_") != std::string::npos) {
    out.detail = "instrumentation name collision (__cb_ prefix in source)";
    return out;
  }
  Workspace ws{cfg};
  if (ws.dir.empty()) {
    out.detail = "cannot create work dir";
    return out;
  }
  std::map<std::pair<int, uint64_t>, ProbeSite> sites;
  std::string text = build_instrumented_unit(u, info, sites);

  Scalar ret = u.fn->return_type->scalar;
  std::string rtype = ret_capture_type(ret);
  std::string drv = "\nint main(void) {\n";
  for (int k = 1; k <= 2; k++) {
    std::string tag = std::to_string(k);
    ArgSet as = materialize_args(input, "_" + tag);
    drv += "    {\n";
    drv += "    fprintf(stderr, \"B\\t" + tag + "\\n\");\n";
    drv += as.decls;
    if (ret == Scalar::Void) {
      drv += "    " + u.fn->name + "(" + as.args + ");\n";
      drv += "    printf(\"RET\\t0\\n\");\n";
    } else {
      drv += "    " + rtype + " __cb_r" + tag + " = " + u.fn->name + "(" +
             as.args + ");\n";
      drv += ret_print_block(ret, "__cb_r" + tag, tag);
    }
    drv += "    printf(\"CNT\\t%llu\\n\", __cb_n);\n";
    drv += "    }\n";
  }
  drv += "    return 0;\n}\n";
  text += drv;

  std::string src = ws.dir + "/prof.c";
  std::string exe = ws.dir + "/prof";
  if (!write_text_file(src, text)) {
    out.detail = "cannot write " + src;
    return out;
  }
  RunResult cr = compile_file(cfg, {"-std=c99", "-O0"}, src, exe);
  if (!cr.ok()) {
    out.detail = "instrumented compile failed: " + run_detail(cr) + ": " +
                 clip(cr.err, 800);
    return out;
  }

  RunResult r1 = run_process({exe}, cfg.run_limits);
  RunResult r2 = run_process({exe}, cfg.run_limits);
  for (const RunResult* r : {&r1, &r2}) {
    if (!r->ok()) {
      out.detail = "instrumented run failed: " + run_detail(*r);
      if (r->err.find("OVFL") != std::string::npos)
        out.detail = "probe record cap exceeded";
      return out;
    }
  }
  StderrParse e1 = parse_probe_stream(r1.err);
  StderrParse e2 = parse_probe_stream(r2.err);
  if (e1.overflow || e2.overflow) {
    out.detail = "probe record cap exceeded";
    return out;
  }
  if (!e1.ok || !e2.ok) {
    out.detail = "probe stream: " + (e1.ok ? e2.error : e1.error);
    return out;
  }
  StdoutParse o1 = parse_driver_stdout(r1.out);
  StdoutParse o2 = parse_driver_stdout(r2.out);
  if (!o1.ok || !o2.ok) {
    out.detail = "driver stdout: " + (o1.ok ? o2.error : o1.error);
    return out;
  }
  if (e1.seg1 != e2.seg1 || o1.ret1 != o2.ret1) {
    out.detail = "nondeterministic run (first-invocation logs differ)";
    out.entry_fatal = true;
    return out;
  }

  Profile prof;
  prof.input = input;
  prof.idempotent = (e1.seg1 == e1.seg2) && (o1.ret1 == o1.ret2);
  std::optional<ScalarValue> retval =
      ret == Scalar::Void ? ScalarValue::of_int(Scalar::I32, 0)
                          : parse_value_field(ret, o1.ret1);
  if (!retval) {
    out.detail = "unparseable return value '" + o1.ret1 + "'";
    return out;
  }
  prof.output = *retval;

  // Observations keyed (line, text) in first-appearance order.
  std::vector<LineObservation> obs;
  for (const std::string& rec : e1.seg1) {
    // P \t line \t hash \t value
    size_t t1 = rec.find('\t');
    size_t t2 = rec.find('\t', t1 + 1);
    size_t t3 = rec.find('\t', t2 + 1);
    if (t1 == std::string::npos || t2 == std::string::npos ||
        t3 == std::string::npos) {
      out.detail = "malformed probe record";
      return out;
    }
    int line = atoi(rec.c_str() + t1 + 1);
    uint64_t hash = strtoull(rec.c_str() + t2 + 1, nullptr, 16);
    std::string field = rec.substr(t3 + 1);
    auto site = sites.find({line, hash});
    if (site == sites.end()) {
      out.detail = "unknown probe hash";
      return out;
    }
    std::optional<ScalarValue> v = parse_value_field(site->second.type, field);
    if (!v) {
      out.detail = "unparseable probe value '" + field + "'";
      return out;
    }
    LineObservation* slot = nullptr;
    for (auto& o : obs) {
      if (o.line == line && o.expr_text == site->second.expr_text) {
        slot = &o;
        break;
      }
    }
    if (!slot) {
      obs.push_back(LineObservation{line, site->second.expr_text, {}});
      slot = &obs.back();
    }
    slot->values.push_back(*v);
  }
  prof.observations = std::move(obs);
  out.profile = std::move(prof);
  out.ok = true;
  return out;
}

CandidateResult profile_candidate(const SourceUnit& u,
                                  const FunctionInfo& info,
                                  uint64_t input_seed,
                                  const ProfilerConfig& cfg) {
  CandidateResult res;
  std::vector<const TypeDesc*> ptypes;
  for (const Symbol* p : info.params) ptypes.push_back(p->type);
  FnShape shape = shape_of(ptypes, u.fn->return_type);
  for (int attempt = 0; attempt < cfg.attempts; attempt++) {
    if ((int)res.profiles.size() >= cfg.max_profiles) break;
    InputVector input = generate_input(shape, input_seed, attempt);
    ValidationReport san = run_sanitized(u, info, input, cfg);
    res.trail.push_back(san);
    if (!san.pass) continue;
    ProfileOutcome po = profile_function(u, info, input, cfg);
    if (po.entry_fatal) {
      res.profiles.clear();
      res.reject_reason = po.detail;
      return res;
    }
    ValidationReport prep;
    prep.stage = ValidationReport::Stage::Profile;
    prep.pass = po.ok;
    prep.detail = po.detail;
    res.trail.push_back(prep);
    if (!po.ok) continue;
    if (!po.profile.idempotent) {
      res.profiles.clear();
      res.reject_reason = "non-idempotent across consecutive invocations";
      return res;
    }
    res.profiles.push_back(std::move(po.profile));
  }
  return res;
}

}  // namespace cobble
