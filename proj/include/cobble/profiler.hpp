#pragma once

#include <map>
#include <utility>
#include <string>
#include <vector>

#include "cobble/analyze.hpp"
#include "cobble/inputgen.hpp"
#include "cobble/subprocess.hpp"

namespace cobble {

struct ProfilerConfig {
  CompilerSpec compiler{"cc", "cc", {}, ""};
  std::vector<std::string> warning_flags = {"-Wall", "-Wextra", "-Werror"};
  std::vector<std::string> sanitizers = {"address", "undefined"};
  int compile_seconds = 200;
  RunLimits run_limits{10, 1LL << 30, 8 << 20};
  std::string work_dir;  // private scratch; a temp dir is made when empty
  int attempts = 5;      // K random inputs per candidate
  int max_profiles = 3;  // stop after M surviving profiles
};

struct ValidationReport {
  enum class Stage { Syntax, Sanitize, Profile };
  Stage stage = Stage::Syntax;
  bool pass = false;
  std::string detail;  // nonempty on fail
};

struct LineObservation {
  int line = 0;
  std::string expr_text;  // normalized rendering
  std::vector<ScalarValue> values;  // one per probe event, in order
  bool stable() const;  // exactly one distinct value
};

struct Profile {
  InputVector input;
  ScalarValue output;
  std::vector<LineObservation> observations;
  bool idempotent = false;
};

// Compiles the normalized unit plus an extern redeclaration of its
// function at -O0 with the configured warning set as errors.
ValidationReport validate_syntax(const SourceUnit& u,
                                 const ProfilerConfig& cfg);
// Same gate starting from raw text; unparseable input fails at the
// syntax stage without reaching a compiler.
ValidationReport validate_syntax_text(std::string_view code,
                                      const ProfilerConfig& cfg);

// Builds a one-call driver, compiles with the configured sanitizers
// (abort-on-report), runs under limits; pass iff clean exit.
ValidationReport run_sanitized(const SourceUnit& u, const FunctionInfo& info,
                               const InputVector& input,
                               const ProfilerConfig& cfg);

struct ProfileOutcome {
  bool ok = false;
  Profile profile;
  std::string detail;  // rejection reason when !ok
  bool entry_fatal = false;  // nondeterminism/non-idempotence: drop the
                             // whole candidate, not just this input
};

// Instruments the function with line probes, runs the driver twice in
// one process (idempotence) and the whole process twice (determinism),
// and assembles per-line observations from the first invocation.
ProfileOutcome profile_function(const SourceUnit& u, const FunctionInfo& info,
                                const InputVector& input,
                                const ProfilerConfig& cfg);

struct CandidateResult {
  std::vector<Profile> profiles;
  std::vector<ValidationReport> trail;  // stage reports in pipeline order
  std::string reject_reason;  // set when the candidate is dropped outright
};

// The K-attempt / M-success loop over generated inputs. Assumes
// validate_syntax already passed for the unit.
CandidateResult profile_candidate(const SourceUnit& u,
                                  const FunctionInfo& info,
                                  uint64_t input_seed,
                                  const ProfilerConfig& cfg);

// Exposed for tests: instrumented unit text and the probe key table
// ((line, expr-text hash) -> expression text/type) it logs with. The
// same spelling can name differently-typed bindings on different lines,
// so the line is part of the key.
struct ProbeSite {
  int line = 0;
  std::string expr_text;
  Scalar type = Scalar::I32;
};
std::string build_instrumented_unit(const SourceUnit& u,
                                    const FunctionInfo& info,
                                    std::map<std::pair<int, uint64_t>, ProbeSite>& sites);

// The probe plan for a function, in instrumentation order. Two analyses
// of layout-identical units (e.g. before and after renaming) enumerate
// matching plans position by position.
std::vector<ProbeSite> enumerate_probe_sites(const FunctionInfo& info);

}  // namespace cobble
