#pragma once

#include <string>
#include <vector>

namespace cobble {

struct RunLimits {
  int wall_seconds = 10;
  long long memory_bytes = 1LL << 30;  // address-space cap; <= 0 disables
  size_t max_capture_bytes = 8 << 20;  // stdout/stderr each truncated here
};

struct RunResult {
  bool started = false;    // fork+exec succeeded
  bool timed_out = false;  // killed at the wall-clock limit
  int exit_code = -1;      // valid when term_signal == 0 and !timed_out
  int term_signal = 0;     // nonzero when the child died on a signal
  std::string out;
  std::string err;
  std::string spawn_error;  // why started == false

  bool ok() const {
    return started && !timed_out && term_signal == 0 && exit_code == 0;
  }
};

// Runs argv[0] with the given arguments in its own process group,
// capturing stdout/stderr via temporary files (no pipe-buffer stalls).
// On timeout the whole group gets SIGKILL. `env_extra` entries are
// "NAME=value" strings added to the child environment.
RunResult run_process(const std::vector<std::string>& argv,
                      const RunLimits& limits, const std::string& cwd = "",
                      const std::vector<std::string>& env_extra = {});

// One compiler under test or in service roles (validation, profiling).
struct CompilerSpec {
  std::string name;        // display name, e.g. "gcc"
  std::string path;        // executable (PATH lookup allowed)
  std::vector<std::string> extra_flags;
  std::string version;     // first line of `--version`, set by probe
};

// Fills spec.version; false when the executable cannot be run.
bool probe_compiler(CompilerSpec& spec);

// Creates a fresh private directory under the system temp root (or under
// `parent` when given) and returns its path.
std::string make_temp_dir(const std::string& hint,
                          const std::string& parent = "");

// Small file helpers shared by the pipeline.
bool write_text_file(const std::string& path, const std::string& text);
bool read_text_file(const std::string& path, std::string& out);

}  // namespace cobble
