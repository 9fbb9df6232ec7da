#include <gtest/gtest.h>

#include <chrono>
#include <csignal>
#include <filesystem>

#include "cobble/subprocess.hpp"

#include "test_util.hpp"

namespace cobble {
namespace {

using testutil::TempDir;

TEST(Subprocess, CapturesStdoutStderrAndExitCode) {
  RunResult r = run_process(
      {"sh", "-c", "echo out-line; echo err-line >&2; exit 3"}, RunLimits{});
  EXPECT_TRUE(r.started);
  EXPECT_FALSE(r.timed_out);
  EXPECT_EQ(r.term_signal, 0);
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(r.out, "out-line\n");
  EXPECT_EQ(r.err, "err-line\n");
  EXPECT_FALSE(r.ok());

  EXPECT_TRUE(run_process({"true"}, RunLimits{}).ok());
}

TEST(Subprocess, TimeoutKillsProcess) {
  RunLimits lim;
  lim.wall_seconds = 1;
  auto t0 = std::chrono::steady_clock::now();
  RunResult r = run_process({"sleep", "30"}, lim);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  EXPECT_TRUE(r.started);
  EXPECT_TRUE(r.timed_out);
  EXPECT_LT(secs, 10);
  EXPECT_FALSE(r.ok());
}

TEST(Subprocess, SignalReported) {
  RunResult r = run_process({"sh", "-c", "kill -SEGV $$"}, RunLimits{});
  EXPECT_TRUE(r.started);
  EXPECT_FALSE(r.timed_out);
  EXPECT_EQ(r.term_signal, SIGSEGV);
}

TEST(Subprocess, SpawnFailureReported) {
  RunResult r = run_process({"/nonexistent/definitely-missing"}, RunLimits{});
  EXPECT_FALSE(r.started);
  EXPECT_FALSE(r.spawn_error.empty());
  EXPECT_FALSE(r.ok());
}

TEST(Subprocess, CwdAndEnvExtra) {
  TempDir td;
  RunResult r = run_process({"sh", "-c", "pwd; printf '%s\\n' \"$COBBLE_X\""},
                            RunLimits{}, td.path().string(),
                            {"COBBLE_X=hello"});
  ASSERT_TRUE(r.started);
  std::string canon =
      std::filesystem::canonical(td.path()).string() + "\nhello\n";
  EXPECT_EQ(r.out, canon);
}

TEST(Subprocess, MemoryLimitEnforced) {
  RunLimits lim;
  lim.memory_bytes = 64LL << 20;  // 64 MB
  lim.wall_seconds = 20;
  // Try to allocate-and-touch 256 MB; must fail under the cap.
  RunResult r = run_process(
      {"python3", "-c", "x = bytearray(256 * 1024 * 1024); print('grew')"},
      lim);
  ASSERT_TRUE(r.started);
  EXPECT_TRUE(r.exit_code != 0 || r.term_signal != 0);
  EXPECT_EQ(r.out.find("grew"), std::string::npos);
}

TEST(Subprocess, CaptureTruncated) {
  RunLimits lim;
  lim.max_capture_bytes = 1024;
  RunResult r =
      run_process({"sh", "-c", "yes x | head -c 100000; true"}, lim);
  ASSERT_TRUE(r.started);
  EXPECT_LE(r.out.size(), 2048u);  // cap plus any truncation marker
}

TEST(Subprocess, ProbeCompiler) {
  CompilerSpec spec;
  spec.name = "cc";
  spec.path = "cc";
  EXPECT_TRUE(probe_compiler(spec));
  EXPECT_FALSE(spec.version.empty());
  EXPECT_EQ(spec.version.find('\n'), std::string::npos);

  CompilerSpec bad;
  bad.name = "nope";
  bad.path = "/nonexistent/cc";
  EXPECT_FALSE(probe_compiler(bad));
}

TEST(Subprocess, TempDirAndFileHelpers) {
  std::string d = make_temp_dir("cobble-test");
  ASSERT_FALSE(d.empty());
  EXPECT_TRUE(std::filesystem::is_directory(d));
  std::string p = d + "/t.txt";
  EXPECT_TRUE(write_text_file(p, "hello\n"));
  std::string back;
  EXPECT_TRUE(read_text_file(p, back));
  EXPECT_EQ(back, "hello\n");
  EXPECT_FALSE(read_text_file(d + "/missing.txt", back));
  std::filesystem::remove_all(d);
}

}  // namespace
}  // namespace cobble
