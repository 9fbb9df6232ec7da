#pragma once

#include <map>
#include <string>
#include <thread>
#include <vector>

#include "cobble/subprocess.hpp"

namespace cobble {

// One (compiler, optimization level) cell of the test matrix.
struct CompileOutcome {
  enum class Status { Ok, Error, Crash, Timeout };
  Status status = Status::Ok;
  int exit_code = 0;
  std::string detail;  // clipped compiler stderr
};

struct RunOutcome {
  enum class Status { Ok, Crash, Timeout, Skipped };
  Status status = Status::Skipped;
  int exit_code = 0;
  int term_signal = 0;
  std::string stdout_text;
};

struct Cell {
  std::string compiler;  // CompilerSpec name
  std::string level;     // "O0".."O3", "Os"
  CompileOutcome compile;
  RunOutcome run;
};

// Ordered by reporting precedence: the first matching class wins.
enum class Verdict {
  CompilerCrash,            // a compiler died or reported an internal error
  SynthesisDefect,          // a compiler rejected the program
  MiscompilationCandidate,  // successful runs disagree on stdout
  HangCandidate,            // some (but not all) runs timed out
  Pass,
};
const char* verdict_name(Verdict v);

struct DiffConfig {
  std::vector<CompilerSpec> compilers;
  std::vector<std::string> levels{"O0", "O1", "Os", "O2", "O3"};
  int compile_seconds = 60;
  int run_seconds = 10;
  std::string work_dir;  // parent for scratch dirs; "" = system temp
};

struct DiffResult {
  Verdict verdict = Verdict::Pass;
  std::string bucket;  // deterministic id; empty for Pass
  std::vector<Cell> cells;
};

// Compiles and runs the program across the full matrix and classifies
// the outcome. Buckets depend only on compiler names and normalized
// diagnostics, so re-testing the same program reproduces the same id.
DiffResult differential_test(const std::string& program_text,
                             const DiffConfig& cfg);

// Writes bug artifacts under out_dir/<bucket>/<n>/ (prog.c, matrix.json,
// env.txt, interesting.sh) and, when a reducer command is configured,
// launches "<reducer> <prog.c> <interesting.sh>" in the background.
class BugSink {
 public:
  BugSink(std::string out_dir, std::vector<CompilerSpec> compilers,
          std::string reducer = "")
      : out_dir_(std::move(out_dir)),
        compilers_(std::move(compilers)),
        reducer_(std::move(reducer)) {}
  ~BugSink() { wait(); }

  // Returns the artifact directory, or "" for Pass results.
  std::string report(const std::string& program_text, const DiffResult& r);

  // Joins all in-flight reducer processes.
  void wait();

 private:
  std::string out_dir_;
  std::vector<CompilerSpec> compilers_;
  std::string reducer_;
  std::vector<std::thread> reducers_;
};

}  // namespace cobble
