#include <gtest/gtest.h>

#include <fstream>

#include "cobble/corpus.hpp"
#include "cobble/hashing.hpp"

#include "test_util.hpp"

namespace cobble {
namespace {

using testutil::TempDir;

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

TEST(Corpus, ScansSortedByRelativePath) {
  TempDir td;
  write_file(td.path() / "b" / "x.c", "int f(void) { return 1; }\n");
  write_file(td.path() / "a.c", "int g(void) { return 2; }\n");
  write_file(td.path() / "b" / "a.c", "int h(void) { return 3; }\n");
  write_file(td.path() / "notes.txt", "not c\n");

  CorpusScan got = scan_corpus(td.path().string());
  ASSERT_EQ(got.snippets.size(), 3u);
  EXPECT_EQ(got.snippets[0].path, "a.c");
  EXPECT_EQ(got.snippets[1].path, "b/a.c");
  EXPECT_EQ(got.snippets[2].path, "b/x.c");
  EXPECT_EQ(got.snippets[0].text, "int g(void) { return 2; }\n");
  EXPECT_TRUE(got.skipped.empty());
}

TEST(Corpus, IdIsContentHash) {
  TempDir td;
  const std::string text = "int f(int a) { return a; }\n";
  write_file(td.path() / "f.c", text);
  CorpusScan got = scan_corpus(td.path().string());
  ASSERT_EQ(got.snippets.size(), 1u);
  EXPECT_EQ(got.snippets[0].id, hex64(fnv1a64(text)));
  EXPECT_EQ(got.snippets[0].id.size(), 16u);

  // Same bytes at another path: same id.
  TempDir td2;
  write_file(td2.path() / "deep" / "g.c", text);
  CorpusScan again = scan_corpus(td2.path().string());
  ASSERT_EQ(again.snippets.size(), 1u);
  EXPECT_EQ(again.snippets[0].id, got.snippets[0].id);
}

TEST(Corpus, SkipsOversizedFiles) {
  TempDir td;
  CorpusOptions opts;
  opts.max_file_bytes = 64;
  write_file(td.path() / "small.c", "int f(void) { return 0; }\n");
  write_file(td.path() / "big.c", std::string(100, 'x'));
  CorpusScan got = scan_corpus(td.path().string(), opts);
  ASSERT_EQ(got.snippets.size(), 1u);
  EXPECT_EQ(got.snippets[0].path, "small.c");
  ASSERT_EQ(got.skipped.size(), 1u);
  EXPECT_EQ(got.skipped[0], "big.c");
}

}  // namespace
}  // namespace cobble
