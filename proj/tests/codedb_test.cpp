#include <gtest/gtest.h>

#include "cobble/codedb.hpp"

#include "test_util.hpp"

namespace cobble {
namespace {

using testutil::TempDir;
using testutil::admit_one;
using testutil::quick_profiler_config;
using testutil::template_function;

TEST(CodeDb, AdmitRenamesFileScopeNames) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "digest-a");
  ASSERT_TRUE(db.has_value());
  ProfilerConfig cfg = quick_profiler_config((td.path() / "w").string());

  std::string id;
  auto err = admit_one(*db,
                       "int base = 2;\n"
                       "int scaled(int a) {\n"
                       "    return a * base;\n"
                       "}\n",
                       cfg, 11, &id);
  ASSERT_FALSE(err.has_value()) << *err;
  const FunctionEntry* e = db->find(id);
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->id, id);
  // File-scope names carry the id prefix; the suffix keeps the original.
  EXPECT_EQ(e->fn_name, "f" + id + "_scaled");
  EXPECT_NE(e->text.find("f" + id + "_base"), std::string::npos);
  EXPECT_EQ(e->origin, "test");
  EXPECT_GT(e->metrics.loc, 0);
  ASSERT_FALSE(e->profiles.empty());
  // Observation texts are re-keyed to renamed spellings.
  bool renamed_obs = false;
  for (const Profile& p : e->profiles)
    for (const LineObservation& o : p.observations)
      if (o.expr_text.find("f" + id + "_base") != std::string::npos)
        renamed_obs = true;
  EXPECT_TRUE(renamed_obs);
}

TEST(CodeDb, PersistAndReload) {
  TempDir td;
  std::string dbpath = (td.path() / "db").string();
  ProfilerConfig cfg = quick_profiler_config((td.path() / "w").string());
  std::vector<std::string> ids;
  {
    auto db = CodeDb::create(dbpath, "digest-b");
    ASSERT_TRUE(db.has_value());
    for (size_t k = 0; k < 3; k++) {
      std::string id;
      auto err = admit_one(*db, template_function(k), cfg, 50 + k, &id);
      ASSERT_FALSE(err.has_value()) << "k=" << k << ": " << *err;
      ids.push_back(id);
    }
    ASSERT_TRUE(db->finalize());
  }

  auto re = CodeDb::open(dbpath);
  ASSERT_TRUE(re.has_value());
  EXPECT_EQ(re->config_digest(), "digest-b");
  ASSERT_EQ(re->size(), 3u);
  for (const std::string& id : ids) {
    const FunctionEntry* e = re->find(id);
    ASSERT_NE(e, nullptr);
    EXPECT_FALSE(e->text.empty());
    EXPECT_FALSE(e->profiles.empty());
    for (const Profile& p : e->profiles) {
      EXPECT_FALSE(p.observations.empty());
      for (const LineObservation& o : p.observations) {
        EXPECT_GT(o.line, 0);
        EXPECT_FALSE(o.values.empty());
      }
    }
  }
}

TEST(CodeDb, ReloadRoundTripsValuesExactly) {
  TempDir td;
  std::string dbpath = (td.path() / "db").string();
  ProfilerConfig cfg = quick_profiler_config((td.path() / "w").string());
  std::string id;
  {
    auto db = CodeDb::create(dbpath, "d");
    ASSERT_TRUE(db.has_value());
    // Template 2 takes unsigned long / unsigned int: exercises U64 values.
    auto err = admit_one(*db, template_function(2), cfg, 77, &id);
    ASSERT_FALSE(err.has_value()) << *err;
    ASSERT_TRUE(db->finalize());
    auto re = CodeDb::open(dbpath);
    ASSERT_TRUE(re.has_value());
    const FunctionEntry* a = db->find(id);
    const FunctionEntry* b = re->find(id);
    ASSERT_NE(a, nullptr);
    ASSERT_NE(b, nullptr);
    EXPECT_EQ(a->text, b->text);
    EXPECT_EQ(a->shape.params.size(), b->shape.params.size());
    EXPECT_EQ(a->shape.ret, b->shape.ret);
    ASSERT_EQ(a->profiles.size(), b->profiles.size());
    for (size_t i = 0; i < a->profiles.size(); i++) {
      const Profile &pa = a->profiles[i], &pb = b->profiles[i];
      EXPECT_TRUE(pa.output.same_value(pb.output));
      EXPECT_EQ(pa.output.type, pb.output.type);
      ASSERT_EQ(pa.input.size(), pb.input.size());
      for (size_t j = 0; j < pa.input.size(); j++) {
        EXPECT_EQ(pa.input[j].is_buffer, pb.input[j].is_buffer);
        if (!pa.input[j].is_buffer)
          EXPECT_TRUE(pa.input[j].scalar.same_value(pb.input[j].scalar));
      }
      ASSERT_EQ(pa.observations.size(), pb.observations.size());
      for (size_t j = 0; j < pa.observations.size(); j++) {
        EXPECT_EQ(pa.observations[j].line, pb.observations[j].line);
        EXPECT_EQ(pa.observations[j].expr_text, pb.observations[j].expr_text);
        ASSERT_EQ(pa.observations[j].values.size(),
                  pb.observations[j].values.size());
        for (size_t v = 0; v < pa.observations[j].values.size(); v++)
          EXPECT_TRUE(pa.observations[j].values[v].same_value(
              pb.observations[j].values[v]));
      }
    }
  }
}

TEST(CodeDb, DuplicateIdSkipped) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "d");
  ASSERT_TRUE(db.has_value());
  ProfilerConfig cfg = quick_profiler_config((td.path() / "w").string());
  std::string id;
  ASSERT_FALSE(admit_one(*db, template_function(0), cfg, 5, &id).has_value());
  EXPECT_EQ(db->size(), 1u);
  // Same text admits to the same id; the second put is refused.
  auto err = admit_one(*db, template_function(0), cfg, 6);
  ASSERT_TRUE(err.has_value());
  EXPECT_EQ(*err, "duplicate");
  EXPECT_EQ(db->size(), 1u);
}

TEST(CodeDb, SampleFunctionDeterministicAndFiltered) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "d");
  ASSERT_TRUE(db.has_value());
  ProfilerConfig cfg = quick_profiler_config((td.path() / "w").string());
  for (size_t k = 0; k < 4; k++)
    ASSERT_FALSE(admit_one(*db, template_function(k), cfg, 30 + k).has_value());

  SplitMix64 a(9), b(9);
  const FunctionEntry* ea = db->sample_function(entry_seed_eligible, a);
  const FunctionEntry* eb = db->sample_function(entry_seed_eligible, b);
  ASSERT_NE(ea, nullptr);
  ASSERT_NE(eb, nullptr);
  EXPECT_EQ(ea->id, eb->id);

  const FunctionEntry* none = db->sample_function(
      [](const FunctionEntry&) { return false; }, a);
  EXPECT_EQ(none, nullptr);

  // Template 3 takes a buffer: seed-eligible but not call-insertable.
  const FunctionEntry* ci = db->sample_function(entry_call_insertable, a);
  ASSERT_NE(ci, nullptr);
  EXPECT_TRUE(entry_call_insertable(*ci));
  for (const auto& [id, e] : db->entries()) {
    bool has_buffer = false;
    for (const ParamShape& p : e.shape.params)
      if (p.is_buffer) has_buffer = true;
    EXPECT_EQ(entry_call_insertable(e), !has_buffer)
        << id << " shape mismatch";
    EXPECT_TRUE(entry_seed_eligible(e)) << id;
  }
}

TEST(CodeDb, StatsSummarize) {
  TempDir td;
  auto db = CodeDb::create((td.path() / "db").string(), "d");
  ASSERT_TRUE(db.has_value());
  ProfilerConfig cfg = quick_profiler_config((td.path() / "w").string());
  for (size_t k = 0; k < 3; k++)
    ASSERT_FALSE(admit_one(*db, template_function(k), cfg, 60 + k).has_value());
  DbStats st = db_stats(*db);
  EXPECT_EQ(st.count, 3u);
  EXPECT_GT(st.mean_loc, 3.0);
  EXPECT_GE(st.mean_branches, 0.0);
  size_t loc_total = 0;
  for (const auto& [bucket, n] : st.loc_hist) loc_total += n;
  EXPECT_EQ(loc_total, 3u);
}

TEST(CodeDb, OpenMissingFails) {
  TempDir td;
  EXPECT_FALSE(CodeDb::open((td.path() / "nope").string()).has_value());
  // create() then open() without finalize(): entries persist but the
  // manifest is absent, so open refuses.
  auto db = CodeDb::create((td.path() / "db2").string(), "d");
  ASSERT_TRUE(db.has_value());
  EXPECT_FALSE(CodeDb::open((td.path() / "db2").string()).has_value());
}

}  // namespace
}  // namespace cobble
