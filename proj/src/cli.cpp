#include "cobble/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "cobble/analyze.hpp"
#include "cobble/codedb.hpp"
#include "cobble/corpus.hpp"
#include "cobble/difftest.hpp"
#include "cobble/hashing.hpp"
#include "cobble/inputgen.hpp"
#include "cobble/llm.hpp"
#include "cobble/profiler.hpp"
#include "cobble/subprocess.hpp"
#include "cobble/synth.hpp"

#include "CLI11.hpp"

namespace fs = std::filesystem;

namespace cobble {

namespace {

volatile std::sig_atomic_t g_interrupted = 0;
void on_sigint(int) { g_interrupted = 1; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// "name=path" or a bare path (name = basename).
bool parse_compiler(const std::string& text, CompilerSpec& out) {
  size_t eq = text.find('=');
  if (eq == std::string::npos) {
    out.path = text;
    out.name = fs::path(text).filename().string();
  } else {
    out.name = text.substr(0, eq);
    out.path = text.substr(eq + 1);
  }
  return !out.name.empty() && !out.path.empty();
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t c = s.find(',', pos);
    if (c == std::string::npos) c = s.size();
    std::string item = s.substr(pos, c - pos);
    if (!item.empty()) out.push_back(item);
    pos = c + 1;
  }
  return out;
}

std::string render_input(const InputVector& in) {
  std::string s = "[";
  for (size_t i = 0; i < in.size(); i++) {
    if (i) s += ",";
    if (in[i].is_buffer)
      s += "buf" + std::to_string(in[i].elements.size());
    else
      s += in[i].scalar.decimal();
  }
  return s + "]";
}

const char* stage_name(ValidationReport::Stage s) {
  switch (s) {
    case ValidationReport::Stage::Syntax: return "syntax";
    case ValidationReport::Stage::Sanitize: return "sanitize";
    case ValidationReport::Stage::Profile: return "profile";
  }
  return "?";
}

std::string first_line(const std::string& s) {
  size_t n = s.find('\n');
  std::string l = n == std::string::npos ? s : s.substr(0, n);
  if (l.size() > 200) l = l.substr(0, 200) + "...";
  return l;
}

// ------------------------------------------------------------- build-db

struct BuildDbArgs {
  std::string corpus;
  std::string out;
  std::string llm = "stub";
  std::string stub_dir;
  std::string endpoint;
  std::string model;
  std::string api_key_env;
  std::string prompt_template;
  std::string compiler = "cc";
  std::string sanitizers = "address,undefined";
  int retry = -1;
  int attempts = 5;
  int max_profiles = 3;
  uint64_t rng_seed = 0;
  uint64_t cap = 64 * 1024;
  uint64_t max_snippets = 0;
};

int cmd_build_db(const BuildDbArgs& a) {
  auto t0 = std::chrono::steady_clock::now();
  if (!fs::is_directory(a.corpus)) {
    std::cerr << "build-db: corpus directory not found: " << a.corpus
              << "\n";
    return 2;
  }
  CompilerSpec cc;
  if (!parse_compiler(a.compiler, cc) || !probe_compiler(cc)) {
    std::cerr << "build-db: cannot probe compiler: " << a.compiler << "\n";
    return 2;
  }

  LlmConfig lcfg;
  lcfg.mode = a.llm == "remote" ? LlmConfig::Mode::Remote
                                : LlmConfig::Mode::Stub;
  if (!a.stub_dir.empty()) lcfg.stub_dir = a.stub_dir;
  if (!a.endpoint.empty()) lcfg.endpoint = a.endpoint;
  if (!a.model.empty()) lcfg.model = a.model;
  if (!a.api_key_env.empty()) lcfg.api_key_env = a.api_key_env;
  if (!a.prompt_template.empty()) lcfg.prompt_template_path = a.prompt_template;
  if (a.retry >= 0) {
    std::vector<int> backoff;
    for (int k = 0; k < a.retry; k++)
      backoff.push_back(k < 3 ? (1000 << (2 * k)) : 16000);
    lcfg.retry_backoff_ms = backoff;
  }

  ProfilerConfig pcfg;
  pcfg.compiler = cc;
  pcfg.sanitizers.clear();
  if (a.sanitizers != "none")
    for (const std::string& s : split_csv(a.sanitizers))
      pcfg.sanitizers.push_back(s);
  pcfg.attempts = a.attempts;
  pcfg.max_profiles = a.max_profiles;

  std::string digest_src =
      "compiler=" + cc.path + ";version=" + cc.version + ";sanitizers=" +
      a.sanitizers + ";attempts=" + std::to_string(a.attempts) +
      ";max_profiles=" + std::to_string(a.max_profiles) + ";rng_seed=" +
      std::to_string(a.rng_seed) + ";llm=" + a.llm;
  auto db = CodeDb::create(a.out, hex64(fnv1a64(digest_src)));
  if (!db) {
    std::cerr << "build-db: cannot create database at " << a.out << "\n";
    return 1;
  }

  CorpusOptions copt;
  copt.max_file_bytes = (size_t)a.cap;
  CorpusScan scan = scan_corpus(a.corpus, copt);
  for (const std::string& p : scan.skipped)
    std::cerr << "build-db: path=" << p << " verdict=skipped reason=over-cap\n";

  size_t transform_fail = 0, align_fail = 0, io_violations = 0,
         syntax_fail = 0, profile_fail = 0, admit_fail = 0, duplicates = 0,
         admitted = 0, transformed = 0, considered = 0;

  std::signal(SIGINT, on_sigint);
  for (const Snippet& sn : scan.snippets) {
    if (g_interrupted) break;
    if (a.max_snippets && considered >= a.max_snippets) break;
    considered++;
    auto log_head = [&]() -> std::ostream& {
      return std::cerr << "build-db: path=" << sn.path << " id=" << sn.id;
    };

    TransformResult tr = transform_snippet(sn, lcfg);
    if (tr.error != TransformError::None || !tr.extracted_code) {
      transform_fail++;
      log_head() << " stage=transform verdict=fail error="
                 << transform_error_tag(tr.error) << "\n";
      continue;
    }
    transformed++;
    if (!tr.violations.empty()) {
      align_fail++;
      bool io = false;
      std::string vs;
      for (const std::string& v : tr.violations) {
        if (!vs.empty()) vs += ",";
        vs += v;
        if (v == "non-numeric-param" || v == "non-numeric-return") io = true;
      }
      if (io) io_violations++;
      log_head() << " stage=align verdict=fail violations=" << vs << "\n";
      continue;
    }

    FrontResult fr = front_process(*tr.extracted_code);
    if (!fr.ok()) {
      syntax_fail++;
      log_head() << " stage=syntax verdict=fail detail=parse\n";
      continue;
    }
    ValidationReport vs = validate_syntax(*fr.unit, pcfg);
    if (!vs.pass) {
      syntax_fail++;
      log_head() << " stage=syntax verdict=fail detail="
                 << first_line(vs.detail) << "\n";
      continue;
    }

    uint64_t input_seed = mix_seed(a.rng_seed, fnv1a64(sn.id));
    CandidateResult cr = profile_candidate(*fr.unit, fr.info, input_seed,
                                           pcfg);
    std::vector<const TypeDesc*> ptypes;
    for (const Symbol* p : fr.info.params) ptypes.push_back(p->type);
    FnShape shape = shape_of(ptypes, fr.info.self->sig_ret
                                         ? fr.info.self->sig_ret
                                         : fr.info.self->type);
    int attempt = -1;
    for (const ValidationReport& r : cr.trail) {
      if (r.stage == ValidationReport::Stage::Sanitize) attempt++;
      log_head() << " stage=" << stage_name(r.stage)
                 << " attempt=" << (attempt < 0 ? 0 : attempt) << " input="
                 << render_input(generate_input(shape, input_seed,
                                                attempt < 0 ? 0 : attempt))
                 << " verdict=" << (r.pass ? "pass" : "fail");
      if (!r.pass) std::cerr << " detail=" << first_line(r.detail);
      std::cerr << "\n";
    }
    if (cr.profiles.empty()) {
      profile_fail++;
      log_head() << " verdict=rejected reason="
                 << (cr.reject_reason.empty() ? "no surviving profile"
                                              : first_line(cr.reject_reason))
                 << "\n";
      continue;
    }

    AdmitResult adm = admit_function(sn.path, *fr.unit, fr.info,
                                     std::move(cr.profiles));
    if (!adm.ok) {
      admit_fail++;
      log_head() << " stage=admit verdict=fail reason="
                 << first_line(adm.reason) << "\n";
      continue;
    }
    if (!db->put_entry(adm.entry)) {
      duplicates++;
      log_head() << " verdict=duplicate entry=" << adm.entry.id << "\n";
      continue;
    }
    admitted++;
    log_head() << " verdict=admitted entry=" << adm.entry.id
               << " profiles=" << adm.entry.profiles.size()
               << " loc=" << adm.entry.metrics.loc << "\n";
  }
  db->finalize();

  double rate = transformed ? (double)io_violations / (double)transformed
                            : 0.0;
  char ratebuf[32];
  snprintf(ratebuf, sizeof ratebuf, "%.3f", rate);
  std::cout << "build-db: snippets=" << scan.snippets.size()
            << " considered=" << considered << " over_cap="
            << scan.skipped.size() << " transform_fail=" << transform_fail
            << " align_fail=" << align_fail << " syntax_fail=" << syntax_fail
            << " profile_fail=" << profile_fail << " admit_fail="
            << admit_fail << " duplicates=" << duplicates << " admitted="
            << admitted << " io_violation_rate=" << ratebuf
            << " interrupted=" << (g_interrupted ? 1 : 0) << " seconds="
            << (int)seconds_since(t0) << "\n";
  return 0;
}

// ----------------------------------------------------------- synthesize

struct SynthArgs {
  std::string db;
  std::string out;
  std::string seed_entry;
  int iters = 100;
  uint64_t rng_seed = 0;
  double p_synth = 0.2;
  double p_call = 0.5;
  int globals_min = 1;
  int globals_max = 8;
  bool audit = false;
};

int cmd_synthesize(const SynthArgs& a) {
  auto t0 = std::chrono::steady_clock::now();
  auto db = CodeDb::open(a.db);
  if (!db) {
    std::cerr << "synthesize: cannot open database: " << a.db << "\n";
    return 1;
  }
  SynthesisConfig cfg;
  cfg.iterations = a.iters;
  cfg.rng_seed = a.rng_seed;
  cfg.p_synth = a.p_synth;
  cfg.p_call = a.p_call;
  cfg.globals_min = a.globals_min;
  cfg.globals_max = a.globals_max;
  cfg.audit = a.audit;
  cfg.forced_seed_id = a.seed_entry;
  SynthesisResult res = synthesize(*db, cfg);
  if (!res.ok) {
    std::cerr << "synthesize: " << res.error << "\n";
    return 1;
  }
  if (a.out == "-") {
    std::cout << res.program.text;
  } else if (!write_text_file(a.out, res.program.text)) {
    std::cerr << "synthesize: cannot write " << a.out << "\n";
    return 1;
  }
  if (a.audit && a.out != "-") {
    std::string log;
    for (const Replacement& r : res.program.log) {
      log += "R\t" + r.entry_id + "\t" + std::to_string(r.line) + "\t" +
             r.old_text + "\t" + r.new_text + "\t" + r.predicted + "\n";
    }
    if (!write_text_file(a.out + ".replacements", log)) {
      std::cerr << "synthesize: cannot write " << a.out << ".replacements\n";
      return 1;
    }
  }
  char csbuf[32];
  snprintf(csbuf, sizeof csbuf, "%016llx",
           (unsigned long long)res.program.predicted_checksum);
  std::cout << "synthesize: out=" << a.out << " functions="
            << res.program.f_list.size() << " globals="
            << res.program.globals.size() << " rewrites="
            << res.program.log.size() << " predicted_checksum=" << csbuf
            << " seconds=" << (int)seconds_since(t0) << "\n";
  return 0;
}

// ----------------------------------------------------------------- fuzz

struct FuzzArgs {
  std::string db;
  std::string compilers;
  std::string levels = "O0,O1,Os,O2,O3";
  std::string out_dir;
  std::string reducer;
  int jobs = 1;
  int rounds = 1;
  int mutants = 10;
  int iters = 100;
  uint64_t rng_seed = 0;
  double p_synth = 0.2;
  double p_call = 0.5;
  int run_seconds = 10;
  int compile_seconds = 60;
};

int cmd_fuzz(const FuzzArgs& a) {
  auto t0 = std::chrono::steady_clock::now();
  auto db = CodeDb::open(a.db);
  if (!db) {
    std::cerr << "fuzz: cannot open database: " << a.db << "\n";
    return 1;
  }
  DiffConfig dcfg;
  for (const std::string& spec : split_csv(a.compilers)) {
    CompilerSpec cc;
    if (!parse_compiler(spec, cc)) {
      std::cerr << "fuzz: bad compiler spec: " << spec << "\n";
      return 2;
    }
    if (!probe_compiler(cc)) {
      std::cerr << "fuzz: cannot probe compiler: " << cc.path << "\n";
      return 2;
    }
    dcfg.compilers.push_back(std::move(cc));
  }
  if (dcfg.compilers.empty()) {
    std::cerr << "fuzz: no compilers given\n";
    return 2;
  }
  dcfg.levels = split_csv(a.levels);
  if (dcfg.levels.empty()) {
    std::cerr << "fuzz: no levels given\n";
    return 2;
  }
  dcfg.run_seconds = a.run_seconds;
  dcfg.compile_seconds = a.compile_seconds;
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) {
    std::cerr << "fuzz: cannot create " << a.out_dir << "\n";
    return 1;
  }

  BugSink sink((fs::path(a.out_dir) / "bugs").string(), dcfg.compilers,
               a.reducer);
  if (a.reducer.empty())
    std::cerr << "fuzz: no reducer configured, reduction skipped\n";

  size_t programs = 0, pass = 0, mm = 0, crash = 0, hang = 0, sd = 0,
         synth_errors = 0;
  std::signal(SIGINT, on_sigint);

  for (int round = 0; round < a.rounds && !g_interrupted; round++) {
    SplitMix64 seed_rng(mix_seed(a.rng_seed, (uint64_t)round));
    const FunctionEntry* seed = db->sample_function(
        [](const FunctionEntry& e) {
          return entry_seed_eligible(e) && !e.profiles.empty();
        },
        seed_rng);
    if (!seed) {
      std::cerr << "fuzz: no seed-eligible entry in database\n";
      return 1;
    }

    // Mutants are generated sequentially (deterministic), tested in a
    // small pool, and reported in order (deterministic bucket counters).
    std::vector<SynthesizedProgram> progs;
    for (int m = 0; m < a.mutants && !g_interrupted; m++) {
      SynthesisConfig scfg;
      scfg.iterations = a.iters;
      scfg.p_synth = a.p_synth;
      scfg.p_call = a.p_call;
      scfg.rng_seed = mix_seed(a.rng_seed, (uint64_t)round, (uint64_t)m + 1);
      scfg.forced_seed_id = seed->id;
      SynthesisResult sr = synthesize(*db, scfg);
      if (!sr.ok) {
        synth_errors++;
        std::cerr << "fuzz: round=" << round << " mutant=" << m
                  << " synthesis_error=" << sr.error << "\n";
        continue;
      }
      progs.push_back(std::move(sr.program));
    }

    std::vector<DiffResult> results(progs.size());
    std::atomic<size_t> next{0};
    int nworkers = std::max(1, std::min(a.jobs, (int)progs.size()));
    auto worker = [&]() {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= results.size()) return;
        if (g_interrupted) continue;  // drain the queue without testing
        results[i] = differential_test(progs[i].text, dcfg);
      }
    };
    if (nworkers <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < nworkers; w++) pool.emplace_back(worker);
      for (std::thread& t : pool) t.join();
    }

    for (size_t i = 0; i < progs.size(); i++) {
      if (g_interrupted && results[i].cells.empty()) continue;
      programs++;
      const DiffResult& dr = results[i];
      switch (dr.verdict) {
        case Verdict::Pass: pass++; break;
        case Verdict::MiscompilationCandidate: mm++; break;
        case Verdict::CompilerCrash: crash++; break;
        case Verdict::HangCandidate: hang++; break;
        case Verdict::SynthesisDefect: sd++; break;
      }
      if (dr.verdict != Verdict::Pass) {
        std::string dir = sink.report(progs[i].text, dr);
        std::cerr << "fuzz: round=" << round << " mutant=" << i
                  << " verdict=" << verdict_name(dr.verdict) << " bucket="
                  << dr.bucket << " dir=" << dir << "\n";
      }
    }
  }
  sink.wait();

  std::cout << "fuzz: rounds=" << a.rounds << " programs=" << programs
            << " pass=" << pass << " miscompilation_candidates=" << mm
            << " compiler_crashes=" << crash << " hang_candidates=" << hang
            << " synthesis_defects=" << sd << " synthesis_errors="
            << synth_errors << " interrupted=" << (g_interrupted ? 1 : 0)
            << " seconds=" << (int)seconds_since(t0) << "\n";
  return 0;
}

// ---------------------------------------------------------------- stats

int cmd_stats(const std::string& dbpath) {
  auto db = CodeDb::open(dbpath);
  if (!db) {
    std::cerr << "stats: cannot open database: " << dbpath << "\n";
    return 1;
  }
  DbStats st = db_stats(*db);
  size_t callable = 0, seedable = 0;
  for (const auto& [id, e] : db->entries()) {
    if (entry_call_insertable(e)) callable++;
    if (entry_seed_eligible(e)) seedable++;
  }
  char l[32], b[32];
  snprintf(l, sizeof l, "%.1f", st.mean_loc);
  snprintf(b, sizeof b, "%.2f", st.mean_branches);
  std::cout << "stats: db=" << dbpath << " entries=" << st.count
            << " mean_loc=" << l << " mean_branches=" << b
            << " call_insertable=" << callable << " seed_eligible="
            << seedable << " config=" << db->config_digest() << "\n";
  for (const auto& [bucket, count] : st.loc_hist)
    std::cout << "stats: loc_bucket=" << bucket << " count=" << count
              << "\n";
  for (const auto& [bucket, count] : st.branch_hist)
    std::cout << "stats: branch_bucket=" << bucket << " count=" << count
              << "\n";
  return 0;
}

// ---------------------------------------------------------------- check

int cmd_check(const std::string& file, const std::string& compiler,
              const std::string& levels) {
  if (!fs::is_regular_file(file)) {
    std::cerr << "check: file not found: " << file << "\n";
    return 2;
  }
  CompilerSpec cc;
  if (!parse_compiler(compiler, cc) || !probe_compiler(cc)) {
    std::cerr << "check: cannot probe compiler: " << compiler << "\n";
    return 2;
  }
  DiffConfig dcfg;
  dcfg.compilers = {cc};
  dcfg.levels = split_csv(levels);
  if (dcfg.levels.empty()) {
    std::cerr << "check: no levels given\n";
    return 2;
  }
  std::string text;
  if (!read_text_file(file, text)) {
    std::cerr << "check: cannot read " << file << "\n";
    return 1;
  }
  DiffResult dr = differential_test(text, dcfg);
  for (const Cell& c : dr.cells) {
    std::cerr << "check: compiler=" << c.compiler << " level=" << c.level
              << " compile=" << (int)c.compile.status << " run="
              << (int)c.run.status << " stdout="
              << first_line(c.run.stdout_text) << "\n";
  }
  std::cout << "check: file=" << file << " compiler=" << cc.name
            << " levels=" << dr.cells.size() << " verdict="
            << verdict_name(dr.verdict) << "\n";
  return dr.verdict == Verdict::Pass ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  g_interrupted = 0;
  CLI::App app{"cobble: compose validated C functions into compiler tests"};
  app.require_subcommand(1);

  BuildDbArgs ba;
  CLI::App* bd = app.add_subcommand(
      "build-db", "Build a function database from a corpus");
  bd->add_option("--corpus", ba.corpus, "Corpus root directory")->required();
  bd->add_option("--out", ba.out, "Database directory to create")->required();
  bd->add_option("--llm", ba.llm, "Transformation backend: stub|remote")
      ->check(CLI::IsMember({"stub", "remote"}))
      ->capture_default_str();
  bd->add_option("--stub-dir", ba.stub_dir,
                 "Directory of <snippet-id>.response.txt fixtures");
  bd->add_option("--endpoint", ba.endpoint, "Chat-completion endpoint URL");
  bd->add_option("--model", ba.model, "Model name for remote mode");
  bd->add_option("--api-key-env", ba.api_key_env,
                 "Environment variable holding the API key");
  bd->add_option("--prompt-template", ba.prompt_template,
                 "Prompt template override file");
  bd->add_option("--compiler", ba.compiler, "Validator compiler (name=path)")
      ->capture_default_str();
  bd->add_option("--sanitizers", ba.sanitizers,
                 "Comma-separated sanitizers, or 'none'")
      ->capture_default_str();
  bd->add_option("--retry", ba.retry, "LLM retries after the first attempt");
  bd->add_option("--attempts", ba.attempts, "Random inputs per candidate")
      ->capture_default_str();
  bd->add_option("--max-profiles", ba.max_profiles,
                 "Stop after this many surviving profiles")
      ->capture_default_str();
  bd->add_option("--rng-seed", ba.rng_seed, "Input-generation seed")
      ->capture_default_str();
  bd->add_option("--cap", ba.cap, "Per-file corpus size cap in bytes")
      ->capture_default_str();
  bd->add_option("--max-snippets", ba.max_snippets,
                 "Process at most this many snippets (0 = all)");

  SynthArgs sa;
  CLI::App* sy = app.add_subcommand("synthesize",
                                    "Synthesize one program from a database");
  sy->add_option("--db", sa.db, "Database directory")->required();
  sy->add_option("--out", sa.out, "Output .c path ('-' for stdout)")
      ->required();
  sy->add_option("--iters", sa.iters, "Iteration count N")
      ->capture_default_str();
  sy->add_option("--rng-seed", sa.rng_seed, "Random seed")
      ->capture_default_str();
  sy->add_option("--seed-entry", sa.seed_entry, "Force this entry as seed");
  sy->add_option("--p-synth", sa.p_synth, "Rewrite probability")
      ->capture_default_str();
  sy->add_option("--p-call", sa.p_call, "Call-vs-global probability")
      ->capture_default_str();
  sy->add_option("--globals-min", sa.globals_min, "Minimum generator globals")
      ->capture_default_str();
  sy->add_option("--globals-max", sa.globals_max, "Maximum generator globals")
      ->capture_default_str();
  sy->add_flag("--audit", sa.audit,
               "Instrument rewrites and emit a replacement log");

  FuzzArgs fa;
  CLI::App* fz = app.add_subcommand("fuzz", "Run a differential campaign");
  fz->add_option("--db", fa.db, "Database directory")->required();
  fz->add_option("--compilers", fa.compilers,
                 "Comma-separated compilers (name=path)")
      ->required();
  fz->add_option("--levels", fa.levels, "Comma-separated -O levels")
      ->capture_default_str();
  fz->add_option("--out-dir", fa.out_dir, "Campaign output directory")
      ->required();
  fz->add_option("--reducer", fa.reducer,
                 "Reducer command (gets prog.c and interesting.sh)");
  fz->add_option("--jobs", fa.jobs, "Concurrent test workers")
      ->capture_default_str();
  fz->add_option("--rounds", fa.rounds, "Seed rounds")->capture_default_str();
  fz->add_option("--mutants", fa.mutants, "Programs per seed")
      ->capture_default_str();
  fz->add_option("--iters", fa.iters, "Synthesis iterations N")
      ->capture_default_str();
  fz->add_option("--rng-seed", fa.rng_seed, "Campaign seed")
      ->capture_default_str();
  fz->add_option("--p-synth", fa.p_synth, "Rewrite probability")
      ->capture_default_str();
  fz->add_option("--p-call", fa.p_call, "Call-vs-global probability")
      ->capture_default_str();
  fz->add_option("--run-seconds", fa.run_seconds, "Per-run timeout")
      ->capture_default_str();
  fz->add_option("--compile-seconds", fa.compile_seconds,
                 "Per-compile timeout")
      ->capture_default_str();

  std::string stats_db;
  CLI::App* st = app.add_subcommand("stats", "Print database statistics");
  st->add_option("--db", stats_db, "Database directory")->required();

  std::string check_file, check_compiler = "cc",
              check_levels = "O0,O1,Os,O2,O3";
  CLI::App* ck = app.add_subcommand(
      "check", "Self-consistency check of one program across levels");
  ck->add_option("--file", check_file, "Program source")->required();
  ck->add_option("--compiler", check_compiler, "Compiler (name=path)")
      ->capture_default_str();
  ck->add_option("--levels", check_levels, "Comma-separated -O levels")
      ->capture_default_str();

  std::vector<std::string> argv_s;
  argv_s.push_back("cobble");
  for (const std::string& a : args) argv_s.push_back(a);
  std::vector<const char*> argv;
  for (const std::string& s : argv_s) argv.push_back(s.c_str());
  try {
    app.parse((int)argv.size(), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (bd->parsed()) return cmd_build_db(ba);
  if (sy->parsed()) return cmd_synthesize(sa);
  if (fz->parsed()) return cmd_fuzz(fa);
  if (st->parsed()) return cmd_stats(stats_db);
  if (ck->parsed()) return cmd_check(check_file, check_compiler, check_levels);
  return 2;
}

}  // namespace cobble
