#pragma once

// Shared fixtures: scratch dirs, a deterministic family of pipeline-safe
// C functions, and direct (library-level) database construction.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cobble/analyze.hpp"
#include "cobble/codedb.hpp"
#include "cobble/hashing.hpp"
#include "cobble/inputgen.hpp"
#include "cobble/profiler.hpp"
#include "cobble/subprocess.hpp"
#include "cobble/synth.hpp"

namespace cobble::testutil {

namespace fs = std::filesystem;

class TempDir {
 public:
  explicit TempDir(const std::string& hint = "cobble.test")
      : path_(make_temp_dir(hint)) {}
  ~TempDir() {
    if (path_.empty()) return;
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::string& path() const { return path_; }
  std::string file(const std::string& rel) const {
    return (fs::path(path_) / rel).string();
  }

 private:
  std::string path_;
};

inline RunResult run_cobble(const std::vector<std::string>& args,
                            int wall_seconds = 600,
                            const std::string& cwd = "") {
  std::vector<std::string> argv{COBBLE_BIN};
  for (const std::string& a : args) argv.push_back(a);
  RunLimits lim;
  lim.wall_seconds = wall_seconds;
  lim.memory_bytes = 0;
  lim.max_capture_bytes = 16 << 20;
  return run_process(argv, lim, cwd);
}

// A family of UB-free numeric functions that pass the whole validation
// pipeline for (nearly) every generated input. Index k varies both the
// template and its constants, so texts (and entry ids) are distinct.
inline std::string template_function(size_t k) {
  long long c1 = (long long)(k * 7 + 3) % 50;
  long long c2 = (long long)(k * 13 + 5) % 90 + 1;
  std::string K1 = std::to_string(c1), K2 = std::to_string(c2);
  switch (k % 8) {
    case 0:
      return "int calc" + std::to_string(k) +
             "(int a, int b) {\n"
             "    int c = a / 7 % 1000 + " + K1 + ";\n"
             "    int d = c * 3 - b / 5 % 500;\n"
             "    if (d > " + K2 + ") {\n"
             "        d = d % 97;\n"
             "    }\n"
             "    return d - c;\n"
             "}\n";
    case 1:
      return "int calc" + std::to_string(k) +
             "(int n) {\n"
             "    int i;\n"
             "    int s = " + K1 + ";\n"
             "    for (i = 0; i < (n & 7) + 2; i++) {\n"
             "        s = s + i * 2;\n"
             "    }\n"
             "    return s;\n"
             "}\n";
    case 2:
      return "unsigned long calc" + std::to_string(k) +
             "(unsigned long x, unsigned int y) {\n"
             "    unsigned long r = x ^ (x >> 13);\n"
             "    r = r * 2654435761UL + y;\n"
             "    return r ^ " + K2 + "UL;\n"
             "}\n";
    case 3:
      return "int calc" + std::to_string(k) +
             "(int *p, int n) {\n"
             "    int s = " + K1 + ";\n"
             "    int i;\n"
             "    for (i = 0; i < 2; i++) {\n"
             "        s = s + (p[i] & 255);\n"
             "    }\n"
             "    return s + (n & 15);\n"
             "}\n";
    case 4:
      return "short calc" + std::to_string(k) +
             "(short a, signed char b) {\n"
             "    int t = a + b * 3;\n"
             "    t = t % " + K2 + ";\n"
             "    return (short)(t);\n"
             "}\n";
    case 5:
      return "int calc" + std::to_string(k) +
             "(int a, int b, int c) {\n"
             "    int m = a > b ? (a & 1023) : (b & 1023);\n"
             "    if (c % 3 == 0) {\n"
             "        m = m + 17;\n"
             "    } else {\n"
             "        m = m - " + K1 + ";\n"
             "    }\n"
             "    return m * 2 + " + K2 + ";\n"
             "}\n";
    case 6:
      return "long long calc" + std::to_string(k) +
             "(long long a, int b) {\n"
             "    long long t = (a & 16777215LL) >> 3;\n"
             "    t = t + b % 1000 + " + K1 + ";\n"
             "    if (t < 0) {\n"
             "        t = -(t / 2);\n"
             "    }\n"
             "    return t + " + K2 + ";\n"
             "}\n";
    default:
      return "unsigned int calc" + std::to_string(k) +
             "(unsigned int s) {\n"
             "    unsigned int r = " + K1 + "u;\n"
             "    switch (s & 3u) {\n"
             "    case 0u:\n"
             "        r = r + 1u;\n"
             "        break;\n"
             "    case 1u:\n"
             "        r = r + " + K2 + "u;\n"
             "        break;\n"
             "    default:\n"
             "        r = r - 3u;\n"
             "        break;\n"
             "    }\n"
             "    return r;\n"
             "}\n";
  }
}

inline ProfilerConfig quick_profiler_config(const std::string& work_dir,
                                            bool sanitize = true,
                                            int max_profiles = 2) {
  ProfilerConfig cfg;
  cfg.compiler.name = "cc";
  cfg.compiler.path = "cc";
  probe_compiler(cfg.compiler);
  if (!sanitize) cfg.sanitizers.clear();
  cfg.work_dir = work_dir;
  cfg.attempts = 4;
  cfg.max_profiles = max_profiles;
  return cfg;
}

// Validates, profiles (random inputs), and admits one function text.
// Returns the reason on rejection.
inline std::optional<std::string> admit_one(CodeDb& db,
                                            const std::string& text,
                                            const ProfilerConfig& cfg,
                                            uint64_t input_seed,
                                            std::string* id_out = nullptr) {
  FrontResult fr = front_process(text);
  if (!fr.ok()) return "parse";
  ValidationReport vs = validate_syntax(*fr.unit, cfg);
  if (!vs.pass) return "syntax: " + vs.detail;
  CandidateResult cr = profile_candidate(*fr.unit, fr.info, input_seed, cfg);
  if (cr.profiles.empty())
    return cr.reject_reason.empty() ? "no profile" : cr.reject_reason;
  AdmitResult adm =
      admit_function("test", *fr.unit, fr.info, std::move(cr.profiles));
  if (!adm.ok) return adm.reason;
  if (!db.put_entry(adm.entry)) return "duplicate";
  if (id_out) *id_out = adm.entry.id;
  return std::nullopt;
}

// Profiles one function with explicitly chosen inputs and admits it.
inline std::optional<std::string> admit_with_inputs(
    CodeDb& db, const std::string& text,
    const std::vector<InputVector>& inputs, const ProfilerConfig& cfg,
    std::string* id_out = nullptr) {
  FrontResult fr = front_process(text);
  if (!fr.ok()) return "parse";
  ValidationReport vs = validate_syntax(*fr.unit, cfg);
  if (!vs.pass) return "syntax: " + vs.detail;
  std::vector<Profile> profiles;
  for (const InputVector& in : inputs) {
    ValidationReport sr = run_sanitized(*fr.unit, fr.info, in, cfg);
    if (!sr.pass) return "sanitize: " + sr.detail;
    ProfileOutcome po = profile_function(*fr.unit, fr.info, in, cfg);
    if (!po.ok) return "profile: " + po.detail;
    profiles.push_back(std::move(po.profile));
  }
  AdmitResult adm =
      admit_function("test", *fr.unit, fr.info, std::move(profiles));
  if (!adm.ok) return adm.reason;
  if (!db.put_entry(adm.entry)) return "duplicate";
  if (id_out) *id_out = adm.entry.id;
  return std::nullopt;
}

inline InputVector scalar_args(const std::vector<long long>& vals,
                               Scalar t = Scalar::I32) {
  InputVector in;
  for (long long v : vals) {
    InputValue iv;
    iv.scalar = ScalarValue::of_int(t, v);
    in.push_back(iv);
  }
  return in;
}

// Builds a database of `count` admitted template functions (ids differ
// per k). Returns the number admitted.
inline size_t build_template_db(CodeDb& db, size_t count,
                                const ProfilerConfig& cfg,
                                uint64_t seed = 1) {
  size_t admitted = 0;
  for (size_t k = 0; admitted < count && k < count * 3 + 64; k++) {
    std::string text = template_function(k);
    if (!admit_one(db, text, cfg, mix_seed(seed, k))) admitted++;
  }
  db.finalize();
  return admitted;
}

// Scripted decision source: replays an exact sequence of (hook, value)
// pairs and records any divergence from the expected hook order. Tests
// assert errors() empty and exhausted() afterwards, which pins the hook
// call order as a contract.
class ScriptedChoices : public Choices {
 public:
  struct Step {
    std::string hook;
    uint64_t value = 0;
  };

  explicit ScriptedChoices(std::vector<Step> script)
      : script_(std::move(script)) {}

  const std::vector<std::string>& errors() const { return errors_; }
  bool exhausted() const { return at_ == script_.size(); }
  size_t position() const { return at_; }

  int global_count(int lo, int hi) override {
    uint64_t v = take("global_count");
    if ((int)v < lo || (int)v > hi)
      errors_.push_back("global_count out of range");
    return (int)v;
  }
  Scalar global_type() override { return (Scalar)take("global_type"); }
  ScalarValue global_init(Scalar t) override {
    return ScalarValue::of_int(t, (int128)(int64_t)take("global_init"));
  }
  size_t pick_seed(size_t n) override { return idx("pick_seed", n); }
  size_t pick_profile(size_t n) override { return idx("pick_profile", n); }
  size_t pick_target(size_t n) override { return idx("pick_target", n); }
  bool do_rewrite() override { return take("do_rewrite") != 0; }
  bool rewrite_is_call() override { return take("rewrite_is_call") != 0; }
  size_t pick_callee(size_t n) override { return idx("pick_callee", n); }
  bool write_not_read() override { return take("write_not_read") != 0; }
  size_t pick_global(size_t n) override { return idx("pick_global", n); }
  bool use_var(bool) override { return take("use_var") != 0; }
  size_t pick_var(size_t n) override { return idx("pick_var", n); }
  size_t pick_delta_op(size_t n) override { return idx("pick_delta_op", n); }
  uint64_t mutation_constant() override { return take("mutation_constant"); }

 private:
  uint64_t take(const std::string& hook) {
    if (at_ >= script_.size()) {
      errors_.push_back("script exhausted at hook " + hook);
      return 0;
    }
    const Step& s = script_[at_++];
    if (s.hook != hook) {
      errors_.push_back("step " + std::to_string(at_ - 1) + ": expected " +
                        s.hook + ", synthesizer asked " + hook);
      return 0;
    }
    return s.value;
  }
  size_t idx(const std::string& hook, size_t n) {
    uint64_t v = take(hook);
    if (n == 0 || v >= n) {
      if (errors_.empty() || errors_.back().find(hook) == std::string::npos)
        errors_.push_back(hook + " index " + std::to_string(v) +
                          " out of " + std::to_string(n));
      return 0;
    }
    return v;
  }

  std::vector<Step> script_;
  size_t at_ = 0;
  std::vector<std::string> errors_;
};

// Worked two-function example: a seed whose locals d/e have known values
// and a callee with scalar int parameters, profiled on chosen inputs so
// rewrite arithmetic is easy to follow by hand.
inline const char* fig_seed_text() {
  return
      "int func2(int d) {\n"
      "    int e = d + 1;\n"
      "    int s = d;\n"
      "    s = s + e;\n"
      "    return s;\n"
      "}\n";
}

inline const char* fig_callee_text() {
  return
      "int func1(int a, int b) {\n"
      "    int t = a * 2;\n"
      "    if (b > 0) {\n"
      "        t = t + b;\n"
      "    }\n"
      "    return t + b;\n"
      "}\n";
}

struct FigDb {
  std::string seed_id;    // func2, profiled on d=1 (returns 3)
  std::string callee_id;  // func1, profiled on (1, 0) (returns 2)
};

// Admits the two example functions into `db`. Returns std::nullopt and
// fills `out` on success, the failure reason otherwise.
inline std::optional<std::string> build_fig_db(CodeDb& db,
                                               const ProfilerConfig& cfg,
                                               FigDb& out) {
  auto err = admit_with_inputs(db, fig_seed_text(), {scalar_args({1})}, cfg,
                               &out.seed_id);
  if (err) return "seed: " + *err;
  err = admit_with_inputs(db, fig_callee_text(), {scalar_args({1, 0})}, cfg,
                          &out.callee_id);
  if (err) return "callee: " + *err;
  db.finalize();
  return std::nullopt;
}

// The exact decision script that turns the example database into the
// worked program: one shared global g0 = 4, the seed's d on line 3
// rewritten to a call returning the same value, e on line 4 read back
// from the global, and a zero-sum write of the global inserted in the
// callee. `seed_index` is the seed's position in the id-sorted pool.
inline std::vector<ScriptedChoices::Step> fig_script(size_t seed_index,
                                                     uint64_t mutation = 7) {
  using Step = ScriptedChoices::Step;
  return std::vector<Step>{
      {"global_count", 1},
      {"global_type", (uint64_t)Scalar::I32},
      {"global_init", 4},
      {"pick_seed", seed_index},
      {"pick_profile", 0},
      // Iteration 1: scan the seed. Matched: d@2 d@3 s@4 e@4 s@5.
      {"pick_target", 0},
      {"do_rewrite", 0},       // d@2 skipped
      {"do_rewrite", 1},       // d@3 rewritten...
      {"rewrite_is_call", 1},  // ...as a call
      {"pick_callee", 0},
      {"pick_profile", 0},
      {"use_var", 1},          // argument a := d (value 1 = wanted 1)
      {"pick_var", 0},
      {"pick_delta_op", 0},
      {"use_var", 1},          // argument b := e - 2 (2 - 2 = wanted 0)
      {"pick_var", 1},
      {"pick_delta_op", 0},
      {"pick_delta_op", 0},    // massage: call - 1 over call ^ 3
      {"do_rewrite", 0},       // s@4 skipped
      {"do_rewrite", 1},       // e@4 rewritten...
      {"rewrite_is_call", 0},  // ...from the global
      {"pick_global", 0},
      {"write_not_read", 0},   // read form
      {"pick_delta_op", 0},    // g0 - 2 over g0 ^ 6
      {"do_rewrite", 0},       // s@5 skipped
      // Iteration 2: scan the callee. Matched: a@2 b@3 t@6 b@6.
      {"pick_target", 1},
      {"do_rewrite", 1},       // a@2 becomes a global write site
      {"rewrite_is_call", 0},
      {"pick_global", 0},
      {"write_not_read", 1},   // insert g0 = g0 + a - 1;
      {"do_rewrite", 0},       // b@3 skipped
      {"do_rewrite", 0},       // t@6 skipped
      {"do_rewrite", 0},       // b@6 skipped
      {"mutation_constant", mutation},
  };
}

}  // namespace cobble::testutil
