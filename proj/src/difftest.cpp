#include "cobble/difftest.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <set>
#include <sstream>

#include "cobble/hashing.hpp"

#include "json.hpp"

namespace fs = std::filesystem;

namespace cobble {

namespace {

std::string clip(const std::string& s, size_t n = 4096) {
  if (s.size() <= n) return s;
  return s.substr(0, n) + "...[truncated]";
}

std::string lower(std::string s) {
  for (char& c : s) c = (char)tolower((unsigned char)c);
  return s;
}

bool looks_like_ice(const RunResult& rr) {
  if (rr.term_signal != 0) return true;
  if (rr.exit_code == 0) return false;
  std::string e = lower(rr.err);
  return e.find("internal compiler error") != std::string::npos ||
         e.find("submit a full bug report") != std::string::npos ||
         e.find("please submit a bug report") != std::string::npos;
}

// Collapse digits and path-like tokens so the same defect signature
// survives changes in line numbers, addresses, and temp file names.
std::string normalize_diag(const std::string& line) {
  std::istringstream in(line);
  std::string tok, out;
  while (in >> tok) {
    if (tok.find('/') != std::string::npos) {
      tok = "<path>";
    } else {
      std::string t;
      bool in_num = false;
      for (char c : tok) {
        if (isdigit((unsigned char)c)) {
          if (!in_num) t += '#';
          in_num = true;
        } else {
          in_num = false;
          t += c;
        }
      }
      tok = t;
    }
    if (!out.empty()) out += ' ';
    out += tok;
  }
  return out;
}

// The most informative line of a failing compile: the internal-error
// line when present, otherwise the first non-empty one.
std::string signature_line(const std::string& err) {
  std::istringstream in(err);
  std::string line, first;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first.empty()) first = line;
    std::string l = lower(line);
    if (l.find("internal compiler error") != std::string::npos)
      return line;
  }
  return first;
}

std::string cell_name(const Cell& c) { return c.compiler + ":" + c.level; }

const char* compile_status_name(CompileOutcome::Status s) {
  switch (s) {
    case CompileOutcome::Status::Ok: return "ok";
    case CompileOutcome::Status::Error: return "error";
    case CompileOutcome::Status::Crash: return "crash";
    case CompileOutcome::Status::Timeout: return "timeout";
  }
  return "?";
}

const char* run_status_name(RunOutcome::Status s) {
  switch (s) {
    case RunOutcome::Status::Ok: return "ok";
    case RunOutcome::Status::Crash: return "crash";
    case RunOutcome::Status::Timeout: return "timeout";
    case RunOutcome::Status::Skipped: return "skipped";
  }
  return "?";
}

struct Scratch {
  std::string dir;
  explicit Scratch(const std::string& parent)
      : dir(make_temp_dir("cobble.difftest", parent)) {}
  ~Scratch() {
    if (dir.empty()) return;
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::CompilerCrash: return "compiler-crash";
    case Verdict::SynthesisDefect: return "synthesis-defect";
    case Verdict::MiscompilationCandidate: return "miscompilation-candidate";
    case Verdict::HangCandidate: return "hang-candidate";
    case Verdict::Pass: return "pass";
  }
  return "?";
}

DiffResult differential_test(const std::string& program_text,
                             const DiffConfig& cfg) {
  DiffResult res;
  Scratch scratch(cfg.work_dir);
  if (scratch.dir.empty()) {
    res.verdict = Verdict::Pass;
    return res;
  }
  std::string src = scratch.dir + "/prog.c";
  if (!write_text_file(src, program_text)) return res;

  for (const CompilerSpec& cc : cfg.compilers) {
    for (const std::string& lvl : cfg.levels) {
      Cell cell;
      cell.compiler = cc.name;
      cell.level = lvl;
      std::string exe =
          scratch.dir + "/prog_" + cc.name + "_" + lvl;
      std::vector<std::string> argv{cc.path};
      for (const auto& f : cc.extra_flags) argv.push_back(f);
      argv.push_back("-std=c99");
      argv.push_back("-w");
      argv.push_back("-" + lvl);
      argv.push_back(src);
      argv.push_back("-o");
      argv.push_back(exe);
      RunLimits clim;
      clim.wall_seconds = cfg.compile_seconds;
      clim.memory_bytes = 0;
      RunResult cr = run_process(argv, clim, scratch.dir);
      if (cr.timed_out) {
        cell.compile.status = CompileOutcome::Status::Timeout;
      } else if (looks_like_ice(cr)) {
        cell.compile.status = CompileOutcome::Status::Crash;
      } else if (!cr.ok()) {
        cell.compile.status = CompileOutcome::Status::Error;
      } else {
        cell.compile.status = CompileOutcome::Status::Ok;
      }
      cell.compile.exit_code = cr.exit_code;
      cell.compile.detail = clip(cr.err);

      if (cell.compile.status == CompileOutcome::Status::Ok) {
        RunLimits rlim;
        rlim.wall_seconds = cfg.run_seconds;
        rlim.memory_bytes = 1LL << 30;
        RunResult rr = run_process({exe}, rlim, scratch.dir);
        if (rr.timed_out) {
          cell.run.status = RunOutcome::Status::Timeout;
        } else if (rr.term_signal != 0 || rr.exit_code != 0) {
          cell.run.status = RunOutcome::Status::Crash;
        } else {
          cell.run.status = RunOutcome::Status::Ok;
        }
        cell.run.exit_code = rr.exit_code;
        cell.run.term_signal = rr.term_signal;
        cell.run.stdout_text = clip(rr.out);
      }
      res.cells.push_back(std::move(cell));
    }
  }

  // Classification, in strict precedence order.
  for (const Cell& c : res.cells) {
    if (c.compile.status == CompileOutcome::Status::Crash) {
      res.verdict = Verdict::CompilerCrash;
      res.bucket = "crash-" + hex64(fnv1a64(
          c.compiler + "\n" + normalize_diag(signature_line(c.compile.detail))));
      return res;
    }
  }
  for (const Cell& c : res.cells) {
    if (c.compile.status == CompileOutcome::Status::Error) {
      res.verdict = Verdict::SynthesisDefect;
      res.bucket = "sd-" + hex64(fnv1a64(
          normalize_diag(signature_line(c.compile.detail))));
      return res;
    }
  }
  {
    std::map<std::string, std::vector<std::string>> groups;
    for (const Cell& c : res.cells)
      if (c.run.status == RunOutcome::Status::Ok)
        groups[c.run.stdout_text].push_back(cell_name(c));
    if (groups.size() > 1) {
      std::vector<std::string> parts;
      for (auto& [text, names] : groups) {
        std::sort(names.begin(), names.end());
        std::string p;
        for (const std::string& n : names) {
          if (!p.empty()) p += ",";
          p += n;
        }
        parts.push_back(p);
      }
      std::sort(parts.begin(), parts.end());
      std::string canon;
      for (const std::string& p : parts) {
        if (!canon.empty()) canon += ";";
        canon += p;
      }
      res.verdict = Verdict::MiscompilationCandidate;
      res.bucket = "mm-" + hex64(fnv1a64(canon));
      return res;
    }
  }
  {
    std::vector<std::string> hung;
    size_t executed = 0;
    for (const Cell& c : res.cells) {
      if (c.run.status == RunOutcome::Status::Skipped) continue;
      executed++;
      if (c.run.status == RunOutcome::Status::Timeout)
        hung.push_back(cell_name(c));
    }
    if (!hung.empty() && hung.size() < executed) {
      std::sort(hung.begin(), hung.end());
      std::string canon;
      for (const std::string& n : hung) {
        if (!canon.empty()) canon += ",";
        canon += n;
      }
      res.verdict = Verdict::HangCandidate;
      res.bucket = "hang-" + hex64(fnv1a64(canon));
      return res;
    }
  }
  res.verdict = Verdict::Pass;
  return res;
}

namespace {

const CompilerSpec* find_compiler(const std::vector<CompilerSpec>& cs,
                                  const std::string& name) {
  for (const CompilerSpec& c : cs)
    if (c.name == name) return &c;
  return nullptr;
}

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'')
      out += "'\\''";
    else
      out += c;
  }
  out += "'";
  return out;
}

std::string compile_cmd(const CompilerSpec& cc, const std::string& level,
                        const std::string& out_name) {
  std::string cmd = shell_quote(cc.path);
  for (const auto& f : cc.extra_flags) cmd += " " + shell_quote(f);
  cmd += " -std=c99 -w -" + level + " prog.c -o " + out_name;
  return cmd;
}

// A self-contained reproduction script for the bucketed defect: exits 0
// while the reduced prog.c still shows the same class of failure.
std::string interesting_script(const DiffResult& r,
                               const std::vector<CompilerSpec>& compilers,
                               int run_seconds) {
  std::string s = "#!/bin/sh\ncd \"$(dirname \"$0\")\"\n";
  auto cell_of = [&](CompileOutcome::Status st) -> const Cell* {
    for (const Cell& c : r.cells)
      if (c.compile.status == st) return &c;
    return nullptr;
  };
  switch (r.verdict) {
    case Verdict::CompilerCrash: {
      const Cell* c = cell_of(CompileOutcome::Status::Crash);
      const CompilerSpec* cc = c ? find_compiler(compilers, c->compiler) : nullptr;
      if (!cc) return s + "exit 1\n";
      s += compile_cmd(*cc, c->level, "/dev/null") + " 2> err.txt\n";
      s += "st=$?\n";
      s += "test $st -ge 126 && exit 0\n";
      s += "test $st -ne 0 && grep -qiE 'internal compiler error|submit a"
           "( full)? bug report' err.txt && exit 0\n";
      s += "exit 1\n";
      return s;
    }
    case Verdict::SynthesisDefect: {
      const Cell* c = cell_of(CompileOutcome::Status::Error);
      const CompilerSpec* cc = c ? find_compiler(compilers, c->compiler) : nullptr;
      if (!cc) return s + "exit 1\n";
      s += compile_cmd(*cc, c->level, "/dev/null") + "\n";
      s += "test $? -ne 0 && exit 0\nexit 1\n";
      return s;
    }
    case Verdict::MiscompilationCandidate: {
      // The first two cells whose successful outputs disagree.
      const Cell *a = nullptr, *b = nullptr;
      for (const Cell& c : r.cells) {
        if (c.run.status != RunOutcome::Status::Ok) continue;
        if (!a) {
          a = &c;
        } else if (c.run.stdout_text != a->run.stdout_text) {
          b = &c;
          break;
        }
      }
      const CompilerSpec* ca = a ? find_compiler(compilers, a->compiler) : nullptr;
      const CompilerSpec* cb = b ? find_compiler(compilers, b->compiler) : nullptr;
      if (!ca || !cb) return s + "exit 1\n";
      s += compile_cmd(*ca, a->level, "a.out.1") + " || exit 1\n";
      s += compile_cmd(*cb, b->level, "a.out.2") + " || exit 1\n";
      s += "o1=$(./a.out.1) || exit 1\n";
      s += "o2=$(./a.out.2) || exit 1\n";
      s += "test \"$o1\" != \"$o2\" && exit 0\nexit 1\n";
      return s;
    }
    case Verdict::HangCandidate: {
      const Cell* h = nullptr;
      const Cell* ok = nullptr;
      for (const Cell& c : r.cells) {
        if (c.run.status == RunOutcome::Status::Timeout && !h) h = &c;
        if (c.run.status == RunOutcome::Status::Ok && !ok) ok = &c;
      }
      const CompilerSpec* ch = h ? find_compiler(compilers, h->compiler) : nullptr;
      const CompilerSpec* co = ok ? find_compiler(compilers, ok->compiler) : nullptr;
      if (!ch || !co) return s + "exit 1\n";
      s += compile_cmd(*ch, h->level, "a.out.h") + " || exit 1\n";
      s += compile_cmd(*co, ok->level, "a.out.k") + " || exit 1\n";
      s += "timeout " + std::to_string(run_seconds) + " ./a.out.k > /dev/null || exit 1\n";
      s += "timeout " + std::to_string(run_seconds) + " ./a.out.h > /dev/null\n";
      s += "test $? -eq 124 && exit 0\nexit 1\n";
      return s;
    }
    case Verdict::Pass:
      break;
  }
  return s + "exit 1\n";
}

}  // namespace

std::string BugSink::report(const std::string& program_text,
                            const DiffResult& r) {
  if (r.verdict == Verdict::Pass || r.bucket.empty()) return "";
  fs::path bdir = fs::path(out_dir_) / r.bucket;
  std::error_code ec;
  fs::create_directories(bdir, ec);
  if (ec) return "";
  int n = 0;
  for (const auto& e : fs::directory_iterator(bdir, ec))
    if (e.is_directory()) n++;
  fs::path adir;
  for (int k = n + 1;; k++) {  // first free slot
    adir = bdir / std::to_string(k);
    if (!fs::exists(adir)) break;
  }
  fs::create_directories(adir, ec);
  if (ec) return "";

  write_text_file((adir / "prog.c").string(), program_text);

  nlohmann::json j;
  j["verdict"] = verdict_name(r.verdict);
  j["bucket"] = r.bucket;
  j["cells"] = nlohmann::json::array();
  for (const Cell& c : r.cells) {
    nlohmann::json jc;
    jc["compiler"] = c.compiler;
    jc["level"] = c.level;
    jc["compile"] = {{"status", compile_status_name(c.compile.status)},
                     {"exit_code", c.compile.exit_code},
                     {"detail", c.compile.detail}};
    jc["run"] = {{"status", run_status_name(c.run.status)},
                 {"exit_code", c.run.exit_code},
                 {"term_signal", c.run.term_signal},
                 {"stdout", c.run.stdout_text}};
    j["cells"].push_back(std::move(jc));
  }
  write_text_file((adir / "matrix.json").string(), j.dump(1) + "\n");

  std::string env;
  for (const CompilerSpec& cc : compilers_) {
    env += "compiler=" + cc.name + " path=" + cc.path;
    if (!cc.version.empty()) env += " version=" + cc.version;
    env += "\n";
  }
  write_text_file((adir / "env.txt").string(), env);

  std::string script = interesting_script(r, compilers_, 10);
  std::string spath = (adir / "interesting.sh").string();
  write_text_file(spath, script);
  fs::permissions(spath,
                  fs::perms::owner_all | fs::perms::group_read |
                      fs::perms::group_exec | fs::perms::others_read |
                      fs::perms::others_exec,
                  ec);

  if (!reducer_.empty()) {
    std::string prog = (adir / "prog.c").string();
    std::string reducer = reducer_;
    reducers_.emplace_back([reducer, prog, spath]() {
      RunLimits lim;
      lim.wall_seconds = 600;
      lim.memory_bytes = 0;
      run_process({reducer, prog, spath}, lim);
    });
  }
  return adir.string();
}

void BugSink::wait() {
  for (std::thread& t : reducers_)
    if (t.joinable()) t.join();
  reducers_.clear();
}

}  // namespace cobble
