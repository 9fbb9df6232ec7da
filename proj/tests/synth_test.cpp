#include <gtest/gtest.h>

#include "cobble/synth.hpp"

#include "test_util.hpp"

namespace cobble {
namespace {

using testutil::FigDb;
using testutil::ScriptedChoices;
using testutil::TempDir;
using testutil::admit_with_inputs;
using testutil::build_fig_db;
using testutil::build_template_db;
using testutil::quick_profiler_config;
using testutil::scalar_args;

CompilerSpec cc_spec() {
  CompilerSpec spec{"cc", "cc", {}, ""};
  probe_compiler(spec);
  return spec;
}

// FNV-1a 64 of a single zero-valued word: eight rounds of
// h = (h ^ 0) * 1099511628211 from the offset basis.
constexpr uint64_t kFnvOneZeroWord = 0xa8c7f832281a39c5ULL;

TEST(SynthExpr, DeltaFormsOverVariables) {
  std::vector<testutil::ScriptedChoices::Step> steps = {
      {"use_var", 1}, {"pick_var", 0}, {"pick_delta_op", 0},
  };
  ScriptedChoices ch(steps);
  std::vector<VarBinding> vars = {
      {"e", ScalarValue::of_int(Scalar::I32, 2)}};
  std::string got = synthesize_expression(
      ScalarValue::of_int(Scalar::I32, 0), vars, ch);
  EXPECT_EQ(got, "e - 2");
  EXPECT_TRUE(ch.errors().empty()) << ch.errors()[0];
  EXPECT_TRUE(ch.exhausted());
}

TEST(SynthExpr, LiteralFallbackAndXor) {
  // Refusing the variable falls back to an exact literal.
  {
    ScriptedChoices ch({{"use_var", 0}});
    std::string got = synthesize_expression(
        ScalarValue::of_int(Scalar::I32, -3), {}, ch);
    EXPECT_EQ(got, "(-3)");
    EXPECT_TRUE(ch.errors().empty());
  }
  // Second form for 2 -> 0 is the xor spelling.
  {
    ScriptedChoices ch({{"use_var", 1}, {"pick_var", 0}, {"pick_delta_op", 1}});
    std::vector<VarBinding> vars = {
        {"e", ScalarValue::of_int(Scalar::I32, 2)}};
    std::string got = synthesize_expression(
        ScalarValue::of_int(Scalar::I32, 0), vars, ch);
    EXPECT_EQ(got, "e ^ 2");
    EXPECT_TRUE(ch.errors().empty()) << ch.errors()[0];
  }
}

TEST(Synth, ZeroIterationsKeepsSeedExact) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "d");
  ASSERT_TRUE(db.has_value());
  ProfilerConfig pcfg = quick_profiler_config((td.path() / "w").string());
  std::string id;
  auto err = admit_with_inputs(*db,
                               "int zero(void) {\n    return 0;\n}\n",
                               {InputVector{}}, pcfg, &id);
  ASSERT_FALSE(err.has_value()) << *err;
  db->finalize();

  SynthesisConfig cfg;
  cfg.iterations = 0;
  cfg.globals_min = 0;
  cfg.globals_max = 0;
  cfg.forced_seed_id = id;
  SynthesisResult res = synthesize(*db, cfg);
  ASSERT_TRUE(res.ok) << res.error;
  ASSERT_EQ(res.program.f_list.size(), 1u);
  EXPECT_EQ(res.program.f_list[0], id);
  EXPECT_TRUE(res.program.log.empty());
  EXPECT_TRUE(res.program.globals.empty());
  // The pristine entry text is embedded unchanged.
  const FunctionEntry* e = db->find(id);
  ASSERT_NE(e, nullptr);
  EXPECT_NE(res.program.text.find(e->text), std::string::npos);

  // Independent oracle: the checksum folds exactly one zero word.
  EXPECT_EQ(res.program.predicted_checksum, kFnvOneZeroWord);

  // And the compiled program prints that very value.
  AuditReplay rep = run_audit_replay(res.program, cc_spec(),
                                     (td.path() / "r").string());
  EXPECT_TRUE(rep.ok) << rep.detail;
}

TEST(Synth, DeterministicBytesAcrossRuns) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "d");
  ASSERT_TRUE(db.has_value());
  ProfilerConfig pcfg = quick_profiler_config((td.path() / "w").string());
  ASSERT_GE(build_template_db(*db, 6, pcfg), 6u);

  SynthesisConfig cfg;
  cfg.iterations = 40;
  cfg.rng_seed = 12345;
  SynthesisResult a = synthesize(*db, cfg);
  SynthesisResult b = synthesize(*db, cfg);
  ASSERT_TRUE(a.ok) << a.error;
  ASSERT_TRUE(b.ok) << b.error;
  EXPECT_EQ(a.program.text, b.program.text);
  EXPECT_EQ(a.program.f_list, b.program.f_list);
  EXPECT_EQ(a.program.predicted_checksum, b.program.predicted_checksum);

  cfg.rng_seed = 54321;
  SynthesisResult c = synthesize(*db, cfg);
  ASSERT_TRUE(c.ok) << c.error;
  EXPECT_NE(a.program.text, c.program.text);
}

TEST(Synth, WorkedExampleScripted) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "d");
  ASSERT_TRUE(db.has_value());
  ProfilerConfig pcfg = quick_profiler_config((td.path() / "w").string());
  FigDb fig;
  auto err = build_fig_db(*db, pcfg, fig);
  ASSERT_FALSE(err.has_value()) << *err;

  size_t seed_index = fig.seed_id < fig.callee_id ? 0 : 1;
  SynthesisConfig cfg;
  cfg.iterations = 2;
  ScriptedChoices ch(testutil::fig_script(seed_index));
  SynthesisResult res = synthesize_with(*db, cfg, ch);
  ASSERT_TRUE(res.ok) << res.error;
  ASSERT_TRUE(ch.errors().empty()) << ch.errors()[0];
  EXPECT_TRUE(ch.exhausted()) << "unused steps from " << ch.position();

  const SynthesizedProgram& p = res.program;
  ASSERT_EQ(p.f_list.size(), 2u);
  EXPECT_EQ(p.f_list[0], fig.seed_id);
  EXPECT_EQ(p.f_list[1], fig.callee_id);
  ASSERT_EQ(p.globals.size(), 1u);
  EXPECT_EQ(p.globals[0].name, "g0");
  EXPECT_EQ(p.globals[0].init.decimal(), "4");

  // The three rewrites, in audit-id order.
  ASSERT_EQ(p.log.size(), 3u);
  EXPECT_EQ(p.log[0].entry_id, fig.seed_id);
  EXPECT_EQ(p.log[0].line, 3);
  EXPECT_EQ(p.log[0].old_text, "d");
  EXPECT_EQ(p.log[0].new_text,
            "f" + fig.callee_id + "_func1(d, e - 2) - 1");
  EXPECT_EQ(p.log[0].predicted, "1");

  EXPECT_EQ(p.log[1].entry_id, fig.seed_id);
  EXPECT_EQ(p.log[1].line, 4);
  EXPECT_EQ(p.log[1].old_text, "e");
  EXPECT_EQ(p.log[1].new_text, "g0 - 2");
  EXPECT_EQ(p.log[1].predicted, "2");

  EXPECT_EQ(p.log[2].entry_id, fig.callee_id);
  EXPECT_EQ(p.log[2].line, 2);
  EXPECT_EQ(p.log[2].old_text, "");
  EXPECT_EQ(p.log[2].new_text, "g0 = g0 + a - 1;");
  EXPECT_EQ(p.log[2].predicted, "4");

  // Rewritten lines as they appear in the emitted program.
  EXPECT_NE(p.text.find("int s = (f" + fig.callee_id +
                        "_func1(d, e - 2) - 1);"),
            std::string::npos)
      << p.text;
  EXPECT_NE(p.text.find("s = s + (g0 - 2);"), std::string::npos);
  EXPECT_NE(p.text.find("int t = a * 2; g0 = g0 + a - 1;"),
            std::string::npos);
  // Callee is emitted before the seed so the call needs no prototype.
  EXPECT_LT(p.text.find("int f" + fig.callee_id + "_func1"),
            p.text.find("int f" + fig.seed_id + "_func2"));

  // Outputs are preserved: the driver folds 3 (seed), 2 (callee), then
  // the mutated global, whose value follows from the mix chain.
  uint64_t mix = 1099511628211ULL;
  mix = (mix ^ 3) * 1099511628211ULL;
  mix = (mix ^ 2) * 1099511628211ULL;
  uint64_t g_final = (4 + (mix ^ 7)) & 0x7fffffffULL;
  uint64_t cs = kFnvOffset;
  cs = fnv1a64_word(3, cs);
  cs = fnv1a64_word(2, cs);
  cs = fnv1a64_word(g_final, cs);
  EXPECT_EQ(p.predicted_checksum, cs);
}

TEST(Synth, WorkedExampleAuditReplay) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "d");
  ASSERT_TRUE(db.has_value());
  ProfilerConfig pcfg = quick_profiler_config((td.path() / "w").string());
  FigDb fig;
  auto err = build_fig_db(*db, pcfg, fig);
  ASSERT_FALSE(err.has_value()) << *err;

  size_t seed_index = fig.seed_id < fig.callee_id ? 0 : 1;
  SynthesisConfig cfg;
  cfg.iterations = 2;
  cfg.audit = true;
  ScriptedChoices ch(testutil::fig_script(seed_index));
  SynthesisResult res = synthesize_with(*db, cfg, ch);
  ASSERT_TRUE(res.ok) << res.error;
  ASSERT_TRUE(ch.errors().empty()) << ch.errors()[0];

  AuditReplay rep = run_audit_replay(res.program, cc_spec(),
                                     (td.path() / "r").string());
  EXPECT_TRUE(rep.ok) << rep.detail;
}

TEST(Synth, MassageWithNoAdmissibleFormSkipsRewrite) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "d");
  ASSERT_TRUE(db.has_value());
  ProfilerConfig pcfg = quick_profiler_config((td.path() / "w").string());

  std::string seed_id, big_id;
  auto err = admit_with_inputs(
      *db,
      "long long stepdown(long long a) {\n"
      "    long long t = a - 12;\n"
      "    return t + 7;\n"
      "}\n",
      {scalar_args({7}, Scalar::I64)}, pcfg, &seed_id);
  ASSERT_FALSE(err.has_value()) << *err;
  err = admit_with_inputs(
      *db,
      "unsigned long long big(void) {\n"
      "    return 9223372036854775813ULL;\n"
      "}\n",
      {InputVector{}}, pcfg, &big_id);
  ASSERT_FALSE(err.has_value()) << *err;
  db->finalize();

  // Matched in the seed: a@2 (7) and t@3 (-5). Rewriting t@3 as a call
  // to big() leaves no admissible massage: the plain value does not fit
  // a long long, +K/-K would need an out-of-range constant, and the xor
  // form requires matching types and nonnegative values.
  SynthesisConfig cfg;
  cfg.iterations = 1;
  cfg.forced_seed_id = seed_id;
  std::vector<ScriptedChoices::Step> steps = {
      {"global_count", 1},
      {"global_type", (uint64_t)Scalar::I32},
      {"global_init", 4},
      {"pick_profile", 0},
      {"pick_target", 0},
      {"do_rewrite", 0},       // a@2 skipped
      {"do_rewrite", 1},       // t@3: try the call...
      {"rewrite_is_call", 1},
      {"pick_callee", 0},
      {"pick_profile", 0},
      {"mutation_constant", 3},
  };
  ScriptedChoices ch(steps);
  SynthesisResult res = synthesize_with(*db, cfg, ch);
  ASSERT_TRUE(res.ok) << res.error;
  ASSERT_TRUE(ch.errors().empty()) << ch.errors()[0];
  EXPECT_TRUE(ch.exhausted());

  // No rewrite happened: the seed stays alone and unmodified.
  EXPECT_EQ(res.program.f_list, std::vector<std::string>{seed_id});
  EXPECT_TRUE(res.program.log.empty());
  EXPECT_EQ(res.program.text.find("_big"), std::string::npos);
}

TEST(Synth, UnstableTargetGetsZeroAdjustment) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "d");
  ASSERT_TRUE(db.has_value());
  ProfilerConfig pcfg = quick_profiler_config((td.path() / "w").string());

  std::string id;
  auto err = admit_with_inputs(*db,
                               "int looper(int n) {\n"
                               "    int s = 0;\n"
                               "    int i;\n"
                               "    for (i = 0; i < 4; i = i + 1) {\n"
                               "        s = s + i;\n"
                               "    }\n"
                               "    return s + n;\n"
                               "}\n",
                               {scalar_args({1})}, pcfg, &id);
  ASSERT_FALSE(err.has_value()) << *err;
  db->finalize();

  // Matched: s@5 (unstable), i@5 (unstable), s@7, n@7. Rewrite i@5 from
  // the global: only the zero-sum adjustment form applies.
  SynthesisConfig cfg;
  cfg.iterations = 1;
  cfg.audit = true;
  cfg.forced_seed_id = id;
  std::vector<ScriptedChoices::Step> steps = {
      {"global_count", 1},
      {"global_type", (uint64_t)Scalar::I32},
      {"global_init", 4},
      {"pick_profile", 0},
      {"pick_target", 0},
      {"do_rewrite", 0},       // s@5
      {"do_rewrite", 1},       // i@5
      {"rewrite_is_call", 0},
      {"pick_global", 0},
      {"do_rewrite", 0},       // s@7
      {"do_rewrite", 0},       // n@7
      {"mutation_constant", 9},
  };
  ScriptedChoices ch(steps);
  SynthesisResult res = synthesize_with(*db, cfg, ch);
  ASSERT_TRUE(res.ok) << res.error;
  ASSERT_TRUE(ch.errors().empty()) << ch.errors()[0];
  EXPECT_TRUE(ch.exhausted());

  ASSERT_EQ(res.program.log.size(), 1u);
  EXPECT_EQ(res.program.log[0].old_text, "i");
  EXPECT_EQ(res.program.log[0].new_text, "i + (int)(g0 - 4)");
  EXPECT_EQ(res.program.log[0].predicted, "0");

  // Every loop iteration logs the adjustment; replay checks all of them
  // against the predicted zero and the checksum stays exact.
  AuditReplay rep = run_audit_replay(res.program, cc_spec(),
                                     (td.path() / "r").string());
  EXPECT_TRUE(rep.ok) << rep.detail;
}

TEST(Synth, ErrorWhenNoSeedAvailable) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "d");
  ASSERT_TRUE(db.has_value());
  db->finalize();
  SynthesisConfig cfg;
  SynthesisResult res = synthesize(*db, cfg);
  EXPECT_FALSE(res.ok);
  EXPECT_NE(res.error.find("seed"), std::string::npos);

  cfg.forced_seed_id = "does-not-exist";
  SynthesisResult forced = synthesize(*db, cfg);
  EXPECT_FALSE(forced.ok);
}

TEST(Synth, GrowthAcrossIterations) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "d");
  ASSERT_TRUE(db.has_value());
  ProfilerConfig pcfg = quick_profiler_config((td.path() / "w").string());
  ASSERT_GE(build_template_db(*db, 8, pcfg), 8u);

  SynthesisConfig small;
  small.iterations = 2;
  small.rng_seed = 99;
  SynthesisConfig large = small;
  large.iterations = 120;
  SynthesisResult a = synthesize(*db, small);
  SynthesisResult b = synthesize(*db, large);
  ASSERT_TRUE(a.ok) << a.error;
  ASSERT_TRUE(b.ok) << b.error;
  EXPECT_GE(b.program.f_list.size(), a.program.f_list.size());
  EXPECT_GT(b.program.text.size(), a.program.text.size());
}

}  // namespace
}  // namespace cobble
