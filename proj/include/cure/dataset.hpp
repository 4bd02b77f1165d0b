#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cure/countries.hpp"
#include "cure/error.hpp"
#include "cure/util/fs.hpp"
#include "cure/util/text.hpp"

namespace cure {

/// One cultural artifact: a named entity with its category, supercategory and
/// country, plus the ground-truth image references harvested for it.
struct ArtifactRecord {
  std::string name;
  std::string category;
  std::string supercategory;
  std::string region;
  std::string continent;
  GlobalBucket global_bucket = GlobalBucket::GS;
  std::vector<std::string> ground_truth;
  bool ambiguous = false;

  bool operator==(const ArtifactRecord&) const = default;
};

inline constexpr std::size_t kMinGroundTruth = 4;

/// supercategory -> categories
using Hierarchy = std::map<std::string, std::vector<std::string>>;

inline const Hierarchy& default_hierarchy() {
  static const Hierarchy h = {
      {"Architecture", {"Bridge", "Fortification", "House", "Monument and Memorial", "Religious Building"}},
      {"Art", {"Bust", "Fresco", "Oil Painting", "Pottery", "Statue"}},
      {"Celebration", {"Carnival", "Christmas Food", "Harvest Food", "New Year celebration", "Spring Festival"}},
      {"Fashion", {"Embroidery", "Hat", "Jewellery", "Traditional clothing"}},
      {"Food", {"Dumpling", "Flatbread", "Fried Dough", "Noodle Dish", "Rice Dish"}},
      {"People", {"Activist", "Actor", "Filmmaker", "Musician", "Politician", "Sportsperson", "Writer"}},
  };
  return h;
}

namespace detail {

// Loose match tolerating case and a trailing plural "s" ("Celebrations" vs "Celebration").
inline bool label_matches(std::string_view declared, std::string_view actual) {
  if (util::iequals(declared, actual)) return true;
  auto strip = [](std::string_view s) {
    return (s.size() > 1 && (s.back() == 's' || s.back() == 'S')) ? s.substr(0, s.size() - 1) : s;
  };
  return util::iequals(strip(declared), strip(actual));
}

inline bool hierarchy_contains(const Hierarchy& h, std::string_view supercategory, std::string_view category) {
  for (const auto& [s, cats] : h) {
    if (!label_matches(s, supercategory)) continue;
    for (const auto& c : cats) {
      if (label_matches(c, category)) return true;
    }
  }
  return false;
}

}  // namespace detail

/// Immutable, indexed collection of artifacts.
class Dataset {
 public:
  using Index = std::map<std::string, std::vector<std::size_t>>;

  Dataset() = default;

  /// Validates every record and builds the indices. Throws Error(Schema) naming
  /// the first offending record.
  explicit Dataset(std::vector<ArtifactRecord> artifacts, std::optional<Hierarchy> hierarchy = std::nullopt)
      : artifacts_(std::move(artifacts)), custom_hierarchy_(std::move(hierarchy)) {
    const Hierarchy& h = this->hierarchy();
    std::map<std::string, std::size_t> seen;
    std::map<std::string, GlobalBucket> region_bucket;
    for (std::size_t i = 0; i < artifacts_.size(); ++i) {
      const auto& a = artifacts_[i];
      auto who = "record " + std::to_string(i) + " ('" + a.name + "')";
      if (a.name.empty()) fail(ErrorKind::Schema, who + ": empty name");
      if (a.category.empty()) fail(ErrorKind::Schema, who + ": empty category");
      if (a.supercategory.empty()) fail(ErrorKind::Schema, who + ": empty supercategory");
      if (a.ground_truth.size() < kMinGroundTruth) {
        fail(ErrorKind::Schema, who + ": " + std::to_string(a.ground_truth.size()) +
                                    " ground-truth images, at least 4 required");
      }
      if (!seen.emplace(a.name, i).second) fail(ErrorKind::Schema, who + ": duplicate artifact name");
      if (!detail::hierarchy_contains(h, a.supercategory, a.category)) {
        fail(ErrorKind::Schema, who + ": (" + a.category + ", " + a.supercategory + ") not in declared hierarchy");
      }
      auto country = lookup_country(a.region);
      if (!country) fail(ErrorKind::Schema, who + ": unknown region '" + a.region + "'");
      if (!canonical_continent(a.continent)) fail(ErrorKind::Schema, who + ": unknown continent '" + a.continent + "'");
      auto [it, inserted] = region_bucket.emplace(std::string(country->name), a.global_bucket);
      if (!inserted && it->second != a.global_bucket) {
        fail(ErrorKind::Schema, who + ": region '" + a.region + "' assigned to both GN and GS");
      }
      if (!util::iequals(country->continent, a.continent)) {
        warnings_.push_back(who + ": continent '" + a.continent + "' differs from lookup table ('" +
                            std::string(country->continent) + "')");
      }
      if (country->bucket != a.global_bucket) {
        warnings_.push_back(who + ": bucket " + std::string(to_string(a.global_bucket)) +
                            " differs from lookup table (" + std::string(to_string(country->bucket)) + ")");
      }
      by_supercategory_[a.supercategory].push_back(i);
      by_category_[a.category].push_back(i);
      by_region_[a.region].push_back(i);
      by_name_.emplace(a.name, i);
    }
  }

  const std::vector<ArtifactRecord>& artifacts() const { return artifacts_; }
  std::size_t size() const { return artifacts_.size(); }
  bool empty() const { return artifacts_.empty(); }

  const Hierarchy& hierarchy() const { return custom_hierarchy_ ? *custom_hierarchy_ : default_hierarchy(); }
  bool has_custom_hierarchy() const { return custom_hierarchy_.has_value(); }

  const Index& by_supercategory() const { return by_supercategory_; }
  const Index& by_category() const { return by_category_; }
  const Index& by_region() const { return by_region_; }

  const ArtifactRecord* find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    return it == by_name_.end() ? nullptr : &artifacts_[it->second];
  }

  /// Artifacts admitted into scoring (ambiguous ones are held back for review).
  std::vector<const ArtifactRecord*> admitted() const {
    std::vector<const ArtifactRecord*> out;
    for (const auto& a : artifacts_) {
      if (!a.ambiguous) out.push_back(&a);
    }
    return out;
  }

  /// Non-fatal mismatches against the built-in country table.
  const std::vector<std::string>& warnings() const { return warnings_; }

  bool operator==(const Dataset& o) const {
    return artifacts_ == o.artifacts_ && custom_hierarchy_ == o.custom_hierarchy_;
  }

 private:
  std::vector<ArtifactRecord> artifacts_;
  std::optional<Hierarchy> custom_hierarchy_;
  Index by_supercategory_, by_category_, by_region_;
  std::map<std::string, std::size_t> by_name_;
  std::vector<std::string> warnings_;
};

namespace detail {

inline std::string require_string(const nlohmann::json& j, const char* key, const std::string& who) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorKind::Schema, who + ": missing field '" + key + "'");
  if (!it->is_string()) fail(ErrorKind::Schema, who + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

inline ArtifactRecord record_from_json(const nlohmann::json& j, std::size_t i) {
  std::string who = "record " + std::to_string(i);
  if (!j.is_object()) fail(ErrorKind::Schema, who + ": not an object");
  if (auto it = j.find("name"); it != j.end() && it->is_string()) who += " ('" + it->get<std::string>() + "')";

  ArtifactRecord a;
  a.name = require_string(j, "name", who);
  a.category = require_string(j, "category", who);
  a.supercategory = require_string(j, "supercategory", who);
  a.region = require_string(j, "region", who);

  auto country = lookup_country(a.region);
  if (!country) fail(ErrorKind::Schema, who + ": unknown region '" + a.region + "'");

  if (auto it = j.find("continent"); it != j.end()) {
    if (!it->is_string()) fail(ErrorKind::Schema, who + ": field 'continent' must be a string");
    auto c = canonical_continent(it->get<std::string>());
    if (!c) fail(ErrorKind::Schema, who + ": unknown continent '" + it->get<std::string>() + "'");
    a.continent = std::string(*c);
  } else {
    a.continent = std::string(country->continent);
  }

  if (auto it = j.find("global_bucket"); it != j.end()) {
    auto b = it->is_string() ? parse_bucket(it->get<std::string>()) : std::nullopt;
    if (!b) fail(ErrorKind::Schema, who + ": global_bucket must be \"GN\" or \"GS\"");
    a.global_bucket = *b;
  } else {
    a.global_bucket = country->bucket;
  }

  auto gt = j.find("ground_truth");
  if (gt == j.end()) fail(ErrorKind::Schema, who + ": missing field 'ground_truth'");
  if (!gt->is_array()) fail(ErrorKind::Schema, who + ": 'ground_truth' must be an array");
  for (const auto& ref : *gt) {
    if (!ref.is_string()) fail(ErrorKind::Schema, who + ": ground_truth entries must be strings");
    a.ground_truth.push_back(ref.get<std::string>());
  }
  if (a.ground_truth.size() < kMinGroundTruth) {
    fail(ErrorKind::Schema, who + ": " + std::to_string(a.ground_truth.size()) +
                                " ground-truth images, at least 4 required");
  }

  if (auto it = j.find("ambiguous"); it != j.end()) {
    if (!it->is_boolean()) fail(ErrorKind::Schema, who + ": 'ambiguous' must be a boolean");
    a.ambiguous = it->get<bool>();
  }
  return a;
}

}  // namespace detail

inline nlohmann::json to_json(const ArtifactRecord& a) {
  nlohmann::json j = {
      {"name", a.name},
      {"category", a.category},
      {"supercategory", a.supercategory},
      {"region", a.region},
      {"continent", a.continent},
      {"global_bucket", std::string(to_string(a.global_bucket))},
      {"ground_truth", a.ground_truth},
  };
  if (a.ambiguous) j["ambiguous"] = true;
  return j;
}

inline Dataset parse_dataset(std::string_view text, const std::string& source = "<memory>") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, source + ": " + e.what());
  }
  if (!doc.is_object()) fail(ErrorKind::Schema, source + ": top level must be an object");
  auto arts = doc.find("artifacts");
  if (arts == doc.end() || !arts->is_array()) fail(ErrorKind::Schema, source + ": missing 'artifacts' array");

  std::optional<Hierarchy> hierarchy;
  if (auto h = doc.find("hierarchy"); h != doc.end()) {
    if (!h->is_object()) fail(ErrorKind::Schema, source + ": 'hierarchy' must be an object");
    Hierarchy custom;
    for (const auto& [s, cats] : h->items()) {
      if (!cats.is_array()) fail(ErrorKind::Schema, source + ": hierarchy entry '" + s + "' must be an array");
      for (const auto& c : cats) {
        if (!c.is_string()) fail(ErrorKind::Schema, source + ": hierarchy entries must be strings");
        custom[s].push_back(c.get<std::string>());
      }
    }
    hierarchy = std::move(custom);
  }

  std::vector<ArtifactRecord> records;
  records.reserve(arts->size());
  for (std::size_t i = 0; i < arts->size(); ++i) records.push_back(detail::record_from_json((*arts)[i], i));
  return Dataset(std::move(records), std::move(hierarchy));
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "dataset not found: " + path.string());
  return parse_dataset(util::read_text(path), path.string());
}

inline std::string serialize_dataset(const Dataset& d) {
  nlohmann::json doc;
  doc["artifacts"] = nlohmann::json::array();
  for (const auto& a : d.artifacts()) doc["artifacts"].push_back(to_json(a));
  if (d.has_custom_hierarchy()) doc["hierarchy"] = d.hierarchy();
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Validation

struct ExpectedStats {
  std::size_t artifacts = 0;
  std::size_t supercategories = 0;
  std::size_t categories = 0;
  std::size_t regions = 0;
  std::size_t per_supercategory = 0;
  std::size_t gn = 0;
  std::size_t gs = 0;

  /// Statistics of the released benchmark.
  static ExpectedStats released() { return {300, 6, 32, 64, 50, 123, 177}; }
};

struct ValidationReport {
  std::size_t artifacts = 0;
  std::size_t supercategories = 0;
  std::size_t categories = 0;
  std::size_t regions = 0;
  std::size_t gn = 0;
  std::size_t gs = 0;
  std::size_t ambiguous = 0;
  std::map<std::string, std::size_t> per_supercategory;
  std::map<std::string, std::size_t> per_continent;
  std::vector<std::string> failures;
  std::vector<std::string> warnings;
  bool pass = true;

  nlohmann::json to_json() const {
    return {{"artifacts", artifacts},
            {"supercategories", supercategories},
            {"categories", categories},
            {"regions", regions},
            {"gn", gn},
            {"gs", gs},
            {"ambiguous", ambiguous},
            {"per_supercategory", per_supercategory},
            {"per_continent", per_continent},
            {"failures", failures},
            {"warnings", warnings},
            {"pass", pass}};
  }
};

inline ValidationReport validate_dataset(const Dataset& d, const std::optional<ExpectedStats>& expected = std::nullopt) {
  ValidationReport r;
  r.artifacts = d.size();
  r.supercategories = d.by_supercategory().size();
  r.categories = d.by_category().size();
  r.regions = d.by_region().size();
  for (const auto& [s, idx] : d.by_supercategory()) r.per_supercategory[s] = idx.size();
  for (const auto& a : d.artifacts()) {
    (a.global_bucket == GlobalBucket::GN ? r.gn : r.gs) += 1;
    r.per_continent[a.continent] += 1;
    if (a.ambiguous) ++r.ambiguous;
  }
  r.warnings = d.warnings();

  if (d.empty()) r.failures.push_back("dataset is empty");
  if (r.ambiguous) r.failures.push_back(std::to_string(r.ambiguous) + " artifacts still flagged ambiguous");

  if (expected) {
    auto check = [&](const char* what, std::size_t got, std::size_t want) {
      if (got != want) {
        r.failures.push_back(std::string(what) + ": expected " + std::to_string(want) + ", got " + std::to_string(got));
      }
    };
    check("artifacts", r.artifacts, expected->artifacts);
    check("supercategories", r.supercategories, expected->supercategories);
    check("categories", r.categories, expected->categories);
    check("regions", r.regions, expected->regions);
    check("GN", r.gn, expected->gn);
    check("GS", r.gs, expected->gs);
    for (const auto& [s, n] : r.per_supercategory) check(("supercategory " + s).c_str(), n, expected->per_supercategory);
  }
  r.pass = r.failures.empty();
  return r;
}

}  // namespace cure
