#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cobble {

// One candidate source file pulled from a corpus tree.
struct Snippet {
  std::string id;    // 16 lowercase hex digits: FNV-1a 64 of the raw bytes
  std::string path;  // path relative to the scan root, '/'-separated
  std::string text;  // raw file contents
};

struct CorpusOptions {
  size_t max_file_bytes = 64 * 1024;  // larger files are skipped with a log line
};

struct CorpusScan {
  std::vector<Snippet> snippets;  // sorted by relative path
  std::vector<std::string> skipped;  // relative paths of over-cap files
};

// Walks `root` recursively, collecting every regular .c/.h file at or under
// the cap as one snippet. Deterministic: output order is the sorted relative
// path order, ids depend only on file contents.
CorpusScan scan_corpus(const std::string& root, const CorpusOptions& opt = {});

}  // namespace cobble
