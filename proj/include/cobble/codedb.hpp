#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cobble/analyze.hpp"
#include "cobble/inputgen.hpp"
#include "cobble/profiler.hpp"

namespace cobble {

struct EntryMetrics {
  int loc = 0;
  int branches = 0;  // if/?:/switch-case/loop headers
};

struct FunctionEntry {
  std::string id;    // content hash of the pre-rename normalized text
  std::string text;  // renamed normalized source unit
  std::string fn_name;
  FnShape shape;
  std::vector<Profile> profiles;
  EntryMetrics metrics;
  std::string origin;  // corpus-relative path the snippet came from
};

// All parameters scalar integers and an integer return: callable with
// synthesized integer expressions as arguments.
bool entry_call_insertable(const FunctionEntry& e);
// Integer return: usable as the starting function of a program.
bool entry_seed_eligible(const FunctionEntry& e);

struct AdmitResult {
  bool ok = false;
  std::string reason;
  FunctionEntry entry;
};

// Prefixes every file-scope name with the entry id, re-analyzes for
// metrics, and re-keys profile observation texts to the renamed
// spellings. Rename capture failures reject the candidate.
AdmitResult admit_function(const std::string& origin, const SourceUnit& u,
                           const FunctionInfo& info,
                           std::vector<Profile> profiles);

// On-disk layout: <path>/manifest.json plus <path>/entries/<id>.c and
// <id>.meta.json per entry. Entries persist as they are put; the
// manifest is written by finalize().
class CodeDb {
 public:
  static std::optional<CodeDb> create(const std::string& path,
                                      const std::string& config_digest);
  static std::optional<CodeDb> open(const std::string& path);

  // Persists immediately. A duplicate id is skipped with a log line and
  // leaves the database unchanged (returns false).
  bool put_entry(const FunctionEntry& e);
  bool finalize();

  const std::map<std::string, FunctionEntry>& entries() const {
    return entries_;
  }
  const FunctionEntry* find(const std::string& id) const;
  size_t size() const { return entries_.size(); }
  const std::string& path() const { return path_; }
  const std::string& config_digest() const { return config_digest_; }

  // Uniform over the id-sorted qualifying subset; nullptr when no entry
  // qualifies (an expected outcome for the caller, not an error).
  const FunctionEntry* sample_function(
      const std::function<bool(const FunctionEntry&)>& filter,
      SplitMix64& rng) const;

 private:
  std::string path_;
  std::string config_digest_;
  std::map<std::string, FunctionEntry> entries_;
};

struct DbStats {
  size_t count = 0;
  double mean_loc = 0.0;
  double mean_branches = 0.0;
  std::map<int, int> loc_hist;
  std::map<int, int> branch_hist;
};
DbStats db_stats(const CodeDb& db);

}  // namespace cobble
