#include "cobble/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cobble/hashing.hpp"

namespace fs = std::filesystem;

namespace cobble {

static bool has_source_ext(const fs::path& p) {
  std::string ext = p.extension().string();
  return ext == ".c" || ext == ".h";
}

static std::string read_file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CorpusScan scan_corpus(const std::string& root, const CorpusOptions& opt) {
  CorpusScan scan;
  fs::path base(root);
  std::vector<fs::path> files;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(base, ec), end; it != end;
       it.increment(ec)) {
    if (ec) break;
    if (!it->is_regular_file(ec)) continue;
    if (has_source_ext(it->path())) files.push_back(it->path());
  }
  std::vector<std::pair<std::string, fs::path>> rel;
  rel.reserve(files.size());
  for (auto& f : files) {
    rel.emplace_back(fs::relative(f, base).generic_string(), f);
  }
  std::sort(rel.begin(), rel.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& [relpath, full] : rel) {
    std::error_code szec;
    uintmax_t sz = fs::file_size(full, szec);
    if (szec) continue;
    if (sz > opt.max_file_bytes) {
      std::fprintf(stderr, "corpus: skipping %s (%ju bytes > cap %zu)\n",
                   relpath.c_str(), sz, opt.max_file_bytes);
      scan.skipped.push_back(relpath);
      continue;
    }
    Snippet s;
    s.path = relpath;
    s.text = read_file_bytes(full);
    s.id = hex64(fnv1a64(s.text));
    scan.snippets.push_back(std::move(s));
  }
  return scan;
}

}  // namespace cobble
