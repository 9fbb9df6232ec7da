#include "cobble/subprocess.hpp"

#include <fcntl.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace cobble {

static std::string read_capped(const std::string& path, size_t cap) {
  std::ifstream in(path, std::ios::binary);
  std::string data;
  data.resize(cap);
  in.read(data.data(), (std::streamsize)cap);
  data.resize((size_t)in.gcount());
  return data;
}

RunResult run_process(const std::vector<std::string>& argv,
                      const RunLimits& limits, const std::string& cwd,
                      const std::vector<std::string>& env_extra) {
  RunResult res;
  if (argv.empty()) {
    res.spawn_error = "empty argv";
    return res;
  }

  static std::atomic<unsigned> counter{0};
  std::string tag = std::to_string(getpid()) + "." +
                    std::to_string(counter.fetch_add(1));
  fs::path tmp = fs::temp_directory_path();
  std::string out_path = (tmp / ("cobble.out." + tag)).string();
  std::string err_path = (tmp / ("cobble.err." + tag)).string();

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  pid_t pid = fork();
  if (pid < 0) {
    res.spawn_error = std::string("fork: ") + strerror(errno);
    return res;
  }
  if (pid == 0) {
    setpgid(0, 0);
    int ofd = open(out_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    int efd = open(err_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (ofd >= 0) dup2(ofd, STDOUT_FILENO);
    if (efd >= 0) dup2(efd, STDERR_FILENO);
    if (ofd >= 0) close(ofd);
    if (efd >= 0) close(efd);
    if (!cwd.empty() && chdir(cwd.c_str()) != 0) _exit(127);
    for (const auto& kv : env_extra) putenv(strdup(kv.c_str()));
    if (limits.memory_bytes > 0) {
      rlimit rl{(rlim_t)limits.memory_bytes, (rlim_t)limits.memory_bytes};
      setrlimit(RLIMIT_AS, &rl);
    }
    if (limits.wall_seconds > 0) {
      // CPU backstop slightly above the wall limit; the parent loop is
      // the primary enforcement.
      rlimit rl{(rlim_t)(limits.wall_seconds + 5),
                (rlim_t)(limits.wall_seconds + 5)};
      setrlimit(RLIMIT_CPU, &rl);
    }
    execvp(cargv[0], cargv.data());
    _exit(127);
  }

  res.started = true;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::seconds(limits.wall_seconds > 0
                                           ? limits.wall_seconds
                                           : 1000000);
  int status = 0;
  for (;;) {
    pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) {
      status = 0;
      break;
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      res.timed_out = true;
      kill(-pid, SIGKILL);
      kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (!res.timed_out) {
    if (WIFEXITED(status)) {
      res.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
      res.term_signal = WTERMSIG(status);
    }
  }
  res.out = read_capped(out_path, limits.max_capture_bytes);
  res.err = read_capped(err_path, limits.max_capture_bytes);
  std::error_code ec;
  fs::remove(out_path, ec);
  fs::remove(err_path, ec);
  return res;
}

bool probe_compiler(CompilerSpec& spec) {
  RunLimits lim;
  lim.wall_seconds = 20;
  lim.memory_bytes = 0;
  RunResult r = run_process({spec.path, "--version"}, lim);
  if (!r.ok()) return false;
  std::string first = r.out.substr(0, r.out.find('\n'));
  if (first.empty()) return false;
  spec.version = first;
  return true;
}

std::string make_temp_dir(const std::string& hint,
                          const std::string& parent) {
  fs::path base = parent.empty() ? fs::temp_directory_path()
                                 : fs::path(parent);
  std::error_code ec;
  fs::create_directories(base, ec);
  std::string templ = (base / (hint + ".XXXXXX")).string();
  std::vector<char> buf(templ.begin(), templ.end());
  buf.push_back('\0');
  char* got = mkdtemp(buf.data());
  return got ? std::string(got) : std::string();
}

bool write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out.write(text.data(), (std::streamsize)text.size());
  return (bool)out;
}

bool read_text_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

}  // namespace cobble
