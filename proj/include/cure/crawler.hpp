#pragma once

// Builds candidate artifacts from MediaWiki "<category> by country" trees.
//
// Tree shape walked:  Category:<root>  ->  Category:<X> of <country>  ->
// Category:<artifact>  ->  File:<image>.  Every artifact subcategory with at
// least `min_images` files becomes a candidate.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cure/countries.hpp"
#include "cure/dataset.hpp"
#include "cure/error.hpp"
#include "cure/util/fs.hpp"
#include "cure/util/hash.hpp"
#include "cure/util/text.hpp"

namespace cure {

/// Transport to a MediaWiki-compatible API. Implementations throw
/// Error(Transport) for retryable failures.
class KnowledgeGraphClient {
 public:
  virtual ~KnowledgeGraphClient() = default;
  virtual nlohmann::json get_json(const std::string& url) = 0;
  virtual std::vector<std::uint8_t> get_bytes(const std::string& url) = 0;
};

/// Replays responses recorded as `<dir>/<sha256(url)>.json` (API calls) and
/// `<dir>/<sha256(url)>.bin` (raw downloads).
class FixtureClient : public KnowledgeGraphClient {
 public:
  explicit FixtureClient(std::filesystem::path dir) : dir_(std::move(dir)) {}

  static std::string key(const std::string& url) { return util::sha256_hex(url); }

  nlohmann::json get_json(const std::string& url) override {
    auto p = dir_ / (key(url) + ".json");
    if (!std::filesystem::exists(p)) fail(ErrorKind::Transport, "no recorded response for " + url);
    try {
      return nlohmann::json::parse(util::read_text(p));
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::Parse, p.string() + ": " + e.what());
    }
  }

  std::vector<std::uint8_t> get_bytes(const std::string& url) override {
    auto p = dir_ / (key(url) + ".bin");
    if (!std::filesystem::exists(p)) fail(ErrorKind::Transport, "no recorded download for " + url);
    return util::read_bytes(p);
  }

  void record_json(const std::string& url, const nlohmann::json& j) const {
    util::atomic_write(dir_ / (key(url) + ".json"), j.dump(1) + "\n");
  }
  void record_bytes(const std::string& url, std::span<const std::uint8_t> data) const {
    util::atomic_write(dir_ / (key(url) + ".bin"), data);
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

/// Forwards to a live client and records every response into a fixture directory.
class RecordingClient : public KnowledgeGraphClient {
 public:
  RecordingClient(KnowledgeGraphClient& live, std::filesystem::path dir) : live_(live), fixtures_(std::move(dir)) {}

  nlohmann::json get_json(const std::string& url) override {
    auto j = live_.get_json(url);
    fixtures_.record_json(url, j);
    return j;
  }
  std::vector<std::uint8_t> get_bytes(const std::string& url) override {
    auto b = live_.get_bytes(url);
    fixtures_.record_bytes(url, b);
    return b;
  }

 private:
  KnowledgeGraphClient& live_;
  FixtureClient fixtures_;
};

// ---------------------------------------------------------------------------
// MediaWiki URL construction

namespace mediawiki {

inline std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
        c == '.' || c == '~' || c == ':') {
      out.push_back(static_cast<char>(c));
    } else if (c == ' ') {
      out += "%20";
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

inline std::string category_info_url(const std::string& api, const std::string& title) {
  return api + "?action=query&format=json&titles=" + url_encode(title);
}

inline std::string members_url(const std::string& api, const std::string& title, std::string_view type,
                               const std::string& cont = {}) {
  auto u = api + "?action=query&format=json&list=categorymembers&cmlimit=500&cmtype=" + std::string(type) +
           "&cmtitle=" + url_encode(title);
  if (!cont.empty()) u += "&cmcontinue=" + url_encode(cont);
  return u;
}

inline std::string imageinfo_url(const std::string& api, const std::string& file_title) {
  return api + "?action=query&format=json&prop=imageinfo&iiprop=url&titles=" + url_encode(file_title);
}

}  // namespace mediawiki

// ---------------------------------------------------------------------------

struct CrawlSpec {
  std::string supercategory;
  std::string category;                              ///< c label stored on candidates
  std::string category_pattern = "<category> by country";
  std::size_t min_images = kMinGroundTruth;
  std::size_t max_artifacts = 0;                     ///< 0 = no cap
  std::string api = "https://commons.wikimedia.org/w/api.php";

  std::string root_title() const {
    std::string t = category_pattern;
    if (auto pos = t.find("<category>"); pos != std::string::npos) t.replace(pos, 10, category);
    return t.starts_with("Category:") ? t : "Category:" + t;
  }

  void check() const {
    if (min_images < 1) fail(ErrorKind::InvalidArgument, "min_images must be >= 1");
    if (category.empty() && category_pattern.find("<category>") != std::string::npos) {
      fail(ErrorKind::InvalidArgument, "category_pattern references <category> but category is empty");
    }
  }
};

inline CrawlSpec crawl_spec_from_json(const nlohmann::json& j) {
  CrawlSpec s;
  s.supercategory = j.at("supercategory").get<std::string>();
  s.category = j.value("category", std::string{});
  s.category_pattern = j.value("category_pattern", s.category_pattern);
  s.min_images = j.value("min_images", s.min_images);
  s.max_artifacts = j.value("max_artifacts", s.max_artifacts);
  s.api = j.value("api", s.api);
  s.check();
  return s;
}

struct SkippedEntry {
  std::string entry;
  std::string reason;
  bool operator==(const SkippedEntry&) const = default;
};

struct CrawlResult {
  std::vector<ArtifactRecord> candidates;  ///< all await manual ambiguity review
  std::vector<SkippedEntry> skipped;
};

namespace detail {

inline std::string strip_namespace(std::string_view title) {
  auto pos = title.find(':');
  return std::string(pos == std::string_view::npos ? title : title.substr(pos + 1));
}

/// "Dumplings of China" -> "China"; "Houses in the United States" -> "United States".
inline std::optional<CountryInfo> country_from_title(std::string_view title) {
  auto name = strip_namespace(title);
  for (std::string_view sep : {" of ", " in ", " from "}) {
    auto pos = name.rfind(sep);
    if (pos == std::string::npos) continue;
    std::string_view tail = std::string_view(name).substr(pos + sep.size());
    if (auto c = lookup_country(tail)) return c;
    if (util::starts_with_icase(tail, "the ")) {
      if (auto c = lookup_country(tail.substr(4))) return c;
    }
  }
  return lookup_country(name);
}

inline std::vector<std::string> list_members(KnowledgeGraphClient& client, const std::string& api,
                                             const std::string& title, std::string_view type) {
  std::vector<std::string> out;
  std::string cont;
  do {
    auto j = client.get_json(mediawiki::members_url(api, title, type, cont));
    cont.clear();
    if (auto q = j.find("query"); q != j.end()) {
      for (const auto& m : q->value("categorymembers", nlohmann::json::array())) {
        out.push_back(m.at("title").get<std::string>());
      }
    }
    if (auto c = j.find("continue"); c != j.end() && c->contains("cmcontinue")) {
      cont = (*c)["cmcontinue"].get<std::string>();
    }
  } while (!cont.empty());
  return out;
}

inline bool category_exists(KnowledgeGraphClient& client, const std::string& api, const std::string& title) {
  auto j = client.get_json(mediawiki::category_info_url(api, title));
  auto q = j.find("query");
  if (q == j.end()) return false;
  auto pages = q->find("pages");
  if (pages == q->end() || pages->empty()) return false;
  for (const auto& [_, page] : pages->items()) {
    if (page.contains("missing") || page.contains("invalid")) return false;
  }
  return true;
}

}  // namespace detail

inline CrawlResult crawl_category(const CrawlSpec& spec, KnowledgeGraphClient& client) {
  spec.check();
  const auto root = spec.root_title();
  if (!detail::category_exists(client, spec.api, root)) fail(ErrorKind::NotFound, "category not found: " + root);

  CrawlResult result;
  std::set<std::string> names;
  for (const auto& country_cat : detail::list_members(client, spec.api, root, "subcat")) {
    auto country = detail::country_from_title(country_cat);
    if (!country) {
      result.skipped.push_back({country_cat, "unknown-region"});
      continue;
    }
    auto artifact_cats = detail::list_members(client, spec.api, country_cat, "subcat");
    if (artifact_cats.empty()) {
      result.skipped.push_back({country_cat, "no-artifacts"});
      continue;
    }
    for (const auto& art_cat : artifact_cats) {
      auto files = detail::list_members(client, spec.api, art_cat, "file");
      if (files.size() < spec.min_images) {
        result.skipped.push_back({art_cat, "insufficient-images"});
        continue;
      }
      ArtifactRecord a;
      a.name = detail::strip_namespace(art_cat);
      if (!names.insert(a.name).second) {
        result.skipped.push_back({art_cat, "duplicate-name"});
        continue;
      }
      a.category = spec.category;
      a.supercategory = spec.supercategory;
      a.region = std::string(country->name);
      a.continent = std::string(country->continent);
      a.global_bucket = country->bucket;
      a.ground_truth = std::move(files);
      result.candidates.push_back(std::move(a));
    }
  }

  auto by_country_name = [](const ArtifactRecord& x, const ArtifactRecord& y) {
    return std::tie(x.region, x.name) < std::tie(y.region, y.name);
  };
  std::sort(result.candidates.begin(), result.candidates.end(), by_country_name);
  if (spec.max_artifacts && result.candidates.size() > spec.max_artifacts) {
    for (auto it = result.candidates.begin() + static_cast<std::ptrdiff_t>(spec.max_artifacts);
         it != result.candidates.end(); ++it) {
      result.skipped.push_back({"Category:" + it->name, "over-max-artifacts"});
    }
    result.candidates.resize(spec.max_artifacts);
  }
  std::sort(result.skipped.begin(), result.skipped.end(),
            [](const auto& x, const auto& y) { return std::tie(x.entry, x.reason) < std::tie(y.entry, y.reason); });
  return result;
}

// ---------------------------------------------------------------------------

struct FetchResult {
  ArtifactRecord record;
  std::vector<std::string> download_errors;
};

/// Materializes up to `k` ground-truth images for `record` under
/// `<cache_dir>/<artifact>/`. Refs are MediaWiki file titles or direct URLs.
inline FetchResult fetch_ground_truth(const ArtifactRecord& record, KnowledgeGraphClient& client, std::size_t k,
                                      const std::filesystem::path& cache_dir,
                                      const std::string& api = "https://commons.wikimedia.org/w/api.php") {
  if (k < kMinGroundTruth) fail(ErrorKind::InvalidArgument, "k must be >= 4");
  FetchResult out{record, {}};
  out.record.ground_truth.clear();

  for (const auto& ref : record.ground_truth) {
    if (out.record.ground_truth.size() >= k) break;
    try {
      std::string url = ref;
      if (!(ref.starts_with("http://") || ref.starts_with("https://"))) {
        auto info = client.get_json(mediawiki::imageinfo_url(api, ref));
        url.clear();
        for (const auto& [_, page] : info.at("query").at("pages").items()) {
          if (auto ii = page.find("imageinfo"); ii != page.end() && !ii->empty()) {
            url = (*ii)[0].at("url").get<std::string>();
          }
        }
        if (url.empty()) fail(ErrorKind::Download, "no image url for " + ref);
      }
      auto bytes = client.get_bytes(url);
      if (bytes.empty()) fail(ErrorKind::Download, "empty download for " + url);
      auto ext = std::filesystem::path(url).extension().string();
      auto local = cache_dir / util::path_slug(record.name) / (util::sha256_hex(url) + util::to_lower(ext));
      if (!std::filesystem::exists(local)) util::atomic_write(local, bytes);
      out.record.ground_truth.push_back(local.string());
    } catch (const Error& e) {
      out.download_errors.push_back(ref + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      out.download_errors.push_back(ref + ": malformed imageinfo: " + e.what());
    }
  }

  if (out.record.ground_truth.size() < kMinGroundTruth) {
    std::string msg = "'" + record.name + "' has " + std::to_string(out.record.ground_truth.size()) +
                      " usable ground-truth images, at least 4 required";
    for (const auto& e : out.download_errors) msg += "; " + e;
    fail(ErrorKind::BelowThreshold, msg);
  }
  return out;
}

inline nlohmann::json to_json(const CrawlResult& r) {
  nlohmann::json j;
  j["artifacts"] = nlohmann::json::array();
  for (const auto& a : r.candidates) j["artifacts"].push_back(to_json(a));
  j["review"] = nlohmann::json::array();
  for (const auto& a : r.candidates) j["review"].push_back(a.name);
  j["skipped"] = nlohmann::json::array();
  for (const auto& s : r.skipped) j["skipped"].push_back({{"entry", s.entry}, {"reason", s.reason}});
  return j;
}

}  // namespace cure
