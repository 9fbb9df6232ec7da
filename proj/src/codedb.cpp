#include "cobble/codedb.hpp"

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "cobble/hashing.hpp"
#include "cobble/subprocess.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cobble {

namespace {

json value_to_json(const ScalarValue& v) {
  json j;
  j["type"] = scalar_tag(v.type);
  j["dec"] = v.decimal();
  std::string bits = v.bits_hex();
  if (!bits.empty()) j["bits"] = bits;
  return j;
}

std::optional<ScalarValue> value_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.contains("dec"))
    return std::nullopt;
  auto t = scalar_from_tag(j["type"].get<std::string>());
  if (!t) return std::nullopt;
  std::string bits = j.value("bits", std::string());
  return parse_scalar_value(*t, j["dec"].get<std::string>(), bits);
}

json input_to_json(const InputVector& in) {
  json arr = json::array();
  for (const InputValue& v : in) {
    json j;
    j["buffer"] = v.is_buffer;
    if (v.is_buffer) {
      j["elem"] = scalar_tag(v.elem);
      json elems = json::array();
      for (const ScalarValue& e : v.elements) elems.push_back(value_to_json(e));
      j["elements"] = std::move(elems);
    } else {
      j["value"] = value_to_json(v.scalar);
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

bool input_from_json(const json& arr, InputVector& out) {
  if (!arr.is_array()) return false;
  for (const json& j : arr) {
    InputValue v;
    v.is_buffer = j.value("buffer", false);
    if (v.is_buffer) {
      auto t = scalar_from_tag(j.value("elem", std::string()));
      if (!t) return false;
      v.elem = *t;
      if (!j.contains("elements") || !j["elements"].is_array()) return false;
      for (const json& e : j["elements"]) {
        auto sv = value_from_json(e);
        if (!sv) return false;
        v.elements.push_back(*sv);
      }
    } else {
      auto sv = value_from_json(j.value("value", json()));
      if (!sv) return false;
      v.scalar = *sv;
    }
    out.push_back(std::move(v));
  }
  return true;
}

json profile_to_json(const Profile& p) {
  json j;
  j["input"] = input_to_json(p.input);
  j["output"] = value_to_json(p.output);
  j["idempotent"] = p.idempotent;
  json obs = json::array();
  for (const LineObservation& o : p.observations) {
    json oj;
    oj["line"] = o.line;
    oj["expr"] = o.expr_text;
    json vals = json::array();
    for (const ScalarValue& v : o.values) vals.push_back(value_to_json(v));
    oj["values"] = std::move(vals);
    obs.push_back(std::move(oj));
  }
  j["observations"] = std::move(obs);
  return j;
}

bool profile_from_json(const json& j, Profile& p) {
  if (!j.is_object()) return false;
  if (!input_from_json(j.value("input", json::array()), p.input)) return false;
  auto out = value_from_json(j.value("output", json()));
  if (!out) return false;
  p.output = *out;
  p.idempotent = j.value("idempotent", false);
  for (const json& oj : j.value("observations", json::array())) {
    LineObservation o;
    o.line = oj.value("line", 0);
    o.expr_text = oj.value("expr", std::string());
    for (const json& vj : oj.value("values", json::array())) {
      auto v = value_from_json(vj);
      if (!v) return false;
      o.values.push_back(*v);
    }
    p.observations.push_back(std::move(o));
  }
  return true;
}

json shape_to_json(const FnShape& s) {
  json j;
  json params = json::array();
  for (const ParamShape& p : s.params) {
    json pj;
    pj["buffer"] = p.is_buffer;
    pj["scalar"] = scalar_tag(p.scalar);
    params.push_back(std::move(pj));
  }
  j["params"] = std::move(params);
  j["ret"] = scalar_tag(s.ret);
  return j;
}

bool shape_from_json(const json& j, FnShape& s) {
  if (!j.is_object()) return false;
  auto ret = scalar_from_tag(j.value("ret", std::string()));
  if (!ret) return false;
  s.ret = *ret;
  for (const json& pj : j.value("params", json::array())) {
    ParamShape p;
    p.is_buffer = pj.value("buffer", false);
    auto t = scalar_from_tag(pj.value("scalar", std::string()));
    if (!t) return false;
    p.scalar = *t;
    s.params.push_back(p);
  }
  return true;
}

std::string iso8601_now() {
  char buf[32];
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string diag_text(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const Diagnostic& d : diags) {
    if (!out.empty()) out += "; ";
    out += d.kind == Diagnostic::Kind::Unsupported
               ? "unsupported " + d.construct
               : d.message;
  }
  return out;
}

}  // namespace

bool entry_call_insertable(const FunctionEntry& e) {
  if (!scalar_is_integer(e.shape.ret)) return false;
  for (const ParamShape& p : e.shape.params)
    if (p.is_buffer || !scalar_is_integer(p.scalar)) return false;
  return true;
}

bool entry_seed_eligible(const FunctionEntry& e) {
  return scalar_is_integer(e.shape.ret);
}

AdmitResult admit_function(const std::string& origin, const SourceUnit& u,
                           const FunctionInfo& info,
                           std::vector<Profile> profiles) {
  AdmitResult res;
  std::string id = hex64(fnv1a64(u.text));
  std::string prefix = "f" + id + "_";
  ParseResult renamed = rename_globals(u, info, prefix);
  if (!renamed.ok()) {
    res.reason = "rename failed: " + diag_text(renamed.diags);
    return res;
  }
  AnalyzeOutcome ao = analyze_unit(*renamed.unit);
  if (!ao.ok) {
    res.reason = "renamed unit failed analysis: " + diag_text(ao.diags);
    return res;
  }
  // The renamed unit is layout-identical, so the probe plans pair up
  // position by position; observation texts move to the new spellings.
  std::vector<ProbeSite> before = enumerate_probe_sites(info);
  std::vector<ProbeSite> after = enumerate_probe_sites(ao.info);
  if (before.size() != after.size()) {
    res.reason = "probe plan mismatch after rename";
    return res;
  }
  std::map<std::pair<int, std::string>, std::string> remap;
  for (size_t i = 0; i < before.size(); i++) {
    if (before[i].line != after[i].line) {
      res.reason = "probe plan mismatch after rename";
      return res;
    }
    remap[{before[i].line, before[i].expr_text}] = after[i].expr_text;
  }
  for (Profile& p : profiles) {
    for (LineObservation& o : p.observations) {
      auto it = remap.find({o.line, o.expr_text});
      if (it != remap.end()) o.expr_text = it->second;
    }
  }

  FunctionEntry e;
  e.id = id;
  e.text = renamed.unit->text;
  e.fn_name = renamed.unit->fn->name;
  std::vector<const TypeDesc*> ptypes;
  for (const Param& p : renamed.unit->fn->params) ptypes.push_back(p.type);
  e.shape = shape_of(ptypes, renamed.unit->fn->return_type);
  e.profiles = std::move(profiles);
  e.metrics = EntryMetrics{ao.info.loc, ao.info.branches};
  e.origin = origin;
  res.entry = std::move(e);
  res.ok = true;
  return res;
}

std::optional<CodeDb> CodeDb::create(const std::string& path,
                                     const std::string& config_digest) {
  std::error_code ec;
  fs::remove(fs::path(path) / "manifest.json", ec);
  fs::remove_all(fs::path(path) / "entries", ec);
  fs::create_directories(fs::path(path) / "entries", ec);
  if (ec) {
    fprintf(stderr, "codedb: cannot create %s: %s\n", path.c_str(),
            ec.message().c_str());
    return std::nullopt;
  }
  CodeDb db;
  db.path_ = path;
  db.config_digest_ = config_digest;
  return db;
}

std::optional<CodeDb> CodeDb::open(const std::string& path) {
  std::string manifest_text;
  if (!read_text_file((fs::path(path) / "manifest.json").string(),
                      manifest_text)) {
    fprintf(stderr, "codedb: missing manifest in %s\n", path.c_str());
    return std::nullopt;
  }
  json manifest = json::parse(manifest_text, nullptr, false);
  if (manifest.is_discarded() || manifest.value("version", 0) != 1) {
    fprintf(stderr, "codedb: bad manifest in %s\n", path.c_str());
    return std::nullopt;
  }
  CodeDb db;
  db.path_ = path;
  db.config_digest_ = manifest.value("config_digest", std::string());

  std::vector<std::string> metas;
  std::error_code ec;
  for (const auto& de :
       fs::directory_iterator(fs::path(path) / "entries", ec)) {
    std::string name = de.path().filename().string();
    if (name.size() > 10 && name.substr(name.size() - 10) == ".meta.json")
      metas.push_back(de.path().string());
  }
  std::sort(metas.begin(), metas.end());
  for (const std::string& mp : metas) {
    std::string mt;
    if (!read_text_file(mp, mt)) {
      fprintf(stderr, "codedb: unreadable %s\n", mp.c_str());
      return std::nullopt;
    }
    json j = json::parse(mt, nullptr, false);
    if (j.is_discarded()) {
      fprintf(stderr, "codedb: bad json in %s\n", mp.c_str());
      return std::nullopt;
    }
    FunctionEntry e;
    e.id = j.value("id", std::string());
    e.fn_name = j.value("fn_name", std::string());
    e.origin = j.value("origin", std::string());
    e.metrics.loc = j["metrics"].value("loc", 0);
    e.metrics.branches = j["metrics"].value("branches", 0);
    bool ok = shape_from_json(j.value("shape", json()), e.shape);
    for (const json& pj : j.value("profiles", json::array())) {
      Profile p;
      ok = ok && profile_from_json(pj, p);
      e.profiles.push_back(std::move(p));
    }
    std::string cpath =
        (fs::path(path) / "entries" / (e.id + ".c")).string();
    ok = ok && read_text_file(cpath, e.text);
    if (!ok || e.id.empty()) {
      fprintf(stderr, "codedb: malformed entry %s\n", mp.c_str());
      return std::nullopt;
    }
    db.entries_[e.id] = std::move(e);
  }
  size_t expected = manifest.value("entry_count", (size_t)0);
  if (expected != db.entries_.size()) {
    fprintf(stderr,
            "codedb: manifest count %zu differs from %zu entries on disk\n",
            expected, db.entries_.size());
  }
  return db;
}

bool CodeDb::put_entry(const FunctionEntry& e) {
  if (entries_.count(e.id)) {
    fprintf(stderr, "codedb: duplicate entry %s skipped\n", e.id.c_str());
    return false;
  }
  json j;
  j["id"] = e.id;
  j["fn_name"] = e.fn_name;
  j["origin"] = e.origin;
  j["shape"] = shape_to_json(e.shape);
  j["metrics"] = json{{"loc", e.metrics.loc}, {"branches", e.metrics.branches}};
  json profs = json::array();
  for (const Profile& p : e.profiles) profs.push_back(profile_to_json(p));
  j["profiles"] = std::move(profs);

  fs::path dir = fs::path(path_) / "entries";
  if (!write_text_file((dir / (e.id + ".c")).string(), e.text) ||
      !write_text_file((dir / (e.id + ".meta.json")).string(),
                       j.dump(1) + "\n")) {
    fprintf(stderr, "codedb: cannot persist entry %s\n", e.id.c_str());
    return false;
  }
  entries_[e.id] = e;
  return true;
}

bool CodeDb::finalize() {
  json m;
  m["version"] = 1;
  m["entry_count"] = entries_.size();
  m["created_at"] = iso8601_now();
  m["config_digest"] = config_digest_;
  return write_text_file((fs::path(path_) / "manifest.json").string(),
                         m.dump(1) + "\n");
}

const FunctionEntry* CodeDb::find(const std::string& id) const {
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

const FunctionEntry* CodeDb::sample_function(
    const std::function<bool(const FunctionEntry&)>& filter,
    SplitMix64& rng) const {
  std::vector<const FunctionEntry*> q;
  for (const auto& [id, e] : entries_)
    if (filter(e)) q.push_back(&e);
  if (q.empty()) return nullptr;
  return q[rng.below(q.size())];
}

DbStats db_stats(const CodeDb& db) {
  DbStats s;
  s.count = db.size();
  double loc_sum = 0, br_sum = 0;
  for (const auto& [id, e] : db.entries()) {
    loc_sum += e.metrics.loc;
    br_sum += e.metrics.branches;
    s.loc_hist[e.metrics.loc]++;
    s.branch_hist[e.metrics.branches]++;
  }
  if (s.count) {
    s.mean_loc = loc_sum / (double)s.count;
    s.mean_branches = br_sum / (double)s.count;
  }
  return s;
}

}  // namespace cobble
