#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace cobble {

// A staged text change against one fixed base string. Replacements cover
// [start, end); insertions use start == end. Edits are collected in any
// order and applied in one pass; replacements must not overlap.
struct TextEdit {
  size_t start = 0;
  size_t end = 0;
  std::string text;
  int seq = 0;  // creation order; breaks ties at equal offsets
};

inline std::string apply_edits(const std::string& base,
                               std::vector<TextEdit> edits) {
  std::stable_sort(edits.begin(), edits.end(),
                   [](const TextEdit& a, const TextEdit& b) {
                     if (a.start != b.start) return a.start < b.start;
                     if (a.end != b.end) return a.end < b.end;
                     return a.seq < b.seq;
                   });
  std::string out;
  out.reserve(base.size() + base.size() / 4);
  size_t pos = 0;
  for (const auto& e : edits) {
    if (e.start < pos) continue;  // overlap; staging logic prevents this
    out.append(base, pos, e.start - pos);
    out += e.text;
    pos = e.end;
  }
  out.append(base, pos, base.size() - pos);
  return out;
}

}  // namespace cobble
