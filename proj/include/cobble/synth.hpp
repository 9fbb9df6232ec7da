#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cobble/codedb.hpp"
#include "cobble/inputgen.hpp"
#include "cobble/subprocess.hpp"
#include "cobble/types.hpp"

namespace cobble {

// Every decision a synthesis run makes, as a virtual seam. The default
// implementation draws from a seeded generator; tests substitute scripts
// that force exact choices. Hook call order per rewrite attempt is part
// of the contract:
//   do_rewrite -> rewrite_is_call ->
//     call path:   pick_callee, pick_profile, then per argument
//                  use_var [, pick_var [, pick_delta_op]], and for a
//                  stable target one final pick_delta_op over the
//                  admissible massage forms;
//     global path: pick_global, then write_not_read (stable targets
//                  only) and for a read rewrite one pick_delta_op.
// Hooks are never invoked when their precondition fails (e.g. an empty
// callee pool skips the attempt before pick_callee).
class Choices {
 public:
  virtual ~Choices() = default;
  virtual int global_count(int lo, int hi) = 0;
  virtual Scalar global_type() = 0;
  virtual ScalarValue global_init(Scalar t) = 0;
  virtual size_t pick_seed(size_t n) = 0;
  virtual size_t pick_profile(size_t n) = 0;
  virtual size_t pick_target(size_t n) = 0;
  virtual bool do_rewrite() = 0;       // per matched expression
  virtual bool rewrite_is_call() = 0;  // call insertion vs global share
  virtual size_t pick_callee(size_t n) = 0;
  virtual bool write_not_read() = 0;
  virtual size_t pick_global(size_t n) = 0;
  virtual bool use_var(bool have_vars) = 0;  // variable vs literal operand
  virtual size_t pick_var(size_t n) = 0;
  virtual size_t pick_delta_op(size_t n) = 0;  // among admissible forms
  virtual uint64_t mutation_constant() = 0;    // per-global driver mixing
};

struct SynthesisConfig {
  int iterations = 100;  // N
  double p_synth = 0.2;
  double p_call = 0.5;
  uint64_t rng_seed = 0;
  int globals_min = 1;
  int globals_max = 8;
  bool audit = false;          // wrap rewrites in replay logging
  std::string forced_seed_id;  // nonempty: start from this entry
};

// A shared global the generator declares. Its runtime value equals the
// initializer at every point inside the stitched functions: the only
// entry-internal writes add zero, and the driver mutates it only after
// all calls return.
struct GlobalVar {
  std::string name;
  Scalar type = Scalar::I32;
  ScalarValue init;
};

// One applied rewrite, in audit-id order.
struct Replacement {
  int entry_ordinal = 0;  // position in f_list
  std::string entry_id;
  int line = 0;           // entry-local line in the pristine entry text
  std::string old_text;   // "" for an inserted statement
  std::string new_text;   // audit wrapper excluded
  std::string predicted;  // decimal value the logged expression takes
  int audit_id = -1;
};

struct SynthesizedProgram {
  std::string text;
  std::vector<std::string> f_list;  // entry ids, seed first
  std::vector<size_t> profile_choice;  // chosen profile per f_list entry
  std::vector<GlobalVar> globals;
  std::vector<Replacement> log;
  // The checksum the program must print: folds the profiled return
  // values and the post-mutation global values. Rewrites are exact, so
  // this is valid for every synthesized program.
  uint64_t predicted_checksum = 0;
};

struct SynthesisResult {
  bool ok = false;
  std::string error;  // nonempty when !ok (e.g. no seed-eligible entry)
  SynthesizedProgram program;
};

SynthesisResult synthesize(const CodeDb& db, const SynthesisConfig& cfg);
SynthesisResult synthesize_with(const CodeDb& db, const SynthesisConfig& cfg,
                                Choices& choices);

// Builds an expression over the given variables and literals, using
// {+, -, ^} with exact-value checks, that evaluates to `target` with its
// exact type. Always succeeds (literal fallback). Integer targets only.
struct VarBinding {
  std::string name;
  ScalarValue value;
};
std::string synthesize_expression(const ScalarValue& target,
                                  const std::vector<VarBinding>& vars,
                                  Choices& choices);

// Compiles an audit-mode program at -O0, runs it, and checks that every
// logged rewrite value matches its prediction, that every audit id
// appears, and that the checksum line matches the predicted checksum.
struct AuditReplay {
  bool ok = false;
  std::string detail;
};
AuditReplay run_audit_replay(const SynthesizedProgram& prog,
                             const CompilerSpec& compiler,
                             const std::string& work_dir = "");

}  // namespace cobble
