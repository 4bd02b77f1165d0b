#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "cure/dataset.hpp"
#include "cure/error.hpp"
#include "cure/prompts.hpp"
#include "cure/rate_limit.hpp"
#include "cure/util/fs.hpp"
#include "cure/util/text.hpp"

namespace cure {

struct GenerationOutcome {
  enum class Kind { Image, Refused, Error };
  Kind kind = Kind::Error;
  std::vector<std::uint8_t> png;
  std::string message;

  static GenerationOutcome image(std::vector<std::uint8_t> bytes) { return {Kind::Image, std::move(bytes), {}}; }
  static GenerationOutcome refused(std::string why = {}) { return {Kind::Refused, {}, std::move(why)}; }
  static GenerationOutcome error(std::string why) { return {Kind::Error, {}, std::move(why)}; }
};

/// Text-to-image adapter. When `supports_seed()` is true, `generate` must be
/// deterministic in (prompt, seed). Implementations used with `jobs > 1` must
/// be safe to call concurrently.
class T2IBackend {
 public:
  virtual ~T2IBackend() = default;
  virtual std::string system_id() const = 0;
  virtual std::string version() const { return "unversioned"; }
  virtual bool supports_seed() const { return true; }
  virtual double rate_limit_per_minute() const { return 0; }  ///< 0 = unlimited
  virtual GenerationOutcome generate(const std::string& prompt, std::uint64_t seed) = 0;
};

/// Seed folded into the prompt text for backends without a seed parameter.
/// Determinism for such backends is best-effort.
inline std::string embed_seed_in_prompt(const std::string& prompt, std::uint64_t seed) {
  return prompt + " (random seed: " + std::to_string(seed) + ")";
}

struct GeneratedEntry {
  std::uint64_t seed = 0;
  std::optional<std::string> image_ref;
  bool refused = false;
  bool failed = false;  ///< transport failure after retries; distinct from refusal
  std::string message;

  bool operator==(const GeneratedEntry&) const = default;
};

struct GeneratedImageSet {
  std::string system_id;
  std::string artifact;
  std::string supercategory;
  PromptStyle style = PromptStyle::N;
  std::vector<GeneratedEntry> entries;

  std::size_t generated() const {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) {
      return e.image_ref.has_value();
    }));
  }
  std::vector<std::string> image_refs() const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
      if (e.image_ref) out.push_back(*e.image_ref);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// Seed policy

inline std::string normalize_system_id(std::string_view id) {
  std::string out;
  for (unsigned char c : id) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

struct SeedPolicy {
  std::size_t default_seeds = 4;
  std::size_t category_seeds = 80;  ///< seeds for the category-only style
  std::map<std::string, std::size_t> overrides = {
      {"sdxl", 20}, {"sd15", 20}, {"stablediffusionxl", 20}, {"stablediffusion15", 20}};

  std::size_t count_for(std::string_view system_id, PromptStyle style) const {
    if (style == PromptStyle::C) return category_seeds;
    auto key = normalize_system_id(system_id);
    for (const auto& [k, v] : overrides) {
      if (normalize_system_id(k) == key) return v;
    }
    return default_seeds;
  }

  std::vector<std::uint64_t> seeds_for(std::string_view system_id, PromptStyle style) const {
    std::vector<std::uint64_t> s(count_for(system_id, style));
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = i;
    return s;
  }
};

// ---------------------------------------------------------------------------
// Image store: <root>/<system>/<supercategory>/<artifact>/<style>/<seed>.png

/// Store key for the artifact slot. Category- and region-only prompts are
/// shared by every artifact in that category/region, so they key on it instead.
inline std::string artifact_slot(const ArtifactRecord& a, PromptStyle style) {
  if (style == PromptStyle::C) return "@c." + a.category;
  if (style == PromptStyle::R) return "@r." + a.region;
  return a.name;
}

class ImageStore {
 public:
  explicit ImageStore(std::filesystem::path root) : root_(std::move(root)) {}

  std::filesystem::path dir(std::string_view system, std::string_view supercategory, std::string_view slot,
                            PromptStyle style) const {
    return root_ / util::path_slug(system) / util::path_slug(supercategory) / util::path_slug(slot) /
           std::string(to_string(style));
  }
  std::filesystem::path image_path(std::string_view system, const ArtifactRecord& a, PromptStyle style,
                                   std::uint64_t seed) const {
    return dir(system, a.supercategory, artifact_slot(a, style), style) / (std::to_string(seed) + ".png");
  }
  std::filesystem::path refusal_path(std::string_view system, const ArtifactRecord& a, PromptStyle style,
                                     std::uint64_t seed) const {
    return dir(system, a.supercategory, artifact_slot(a, style), style) / (std::to_string(seed) + ".refused");
  }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{500};
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
};

/// Runs one backend against the image store with rate limiting and retries.
class Generator {
 public:
  Generator(T2IBackend& backend, ImageStore store, RetryPolicy retry = {},
            const TemplateRegistry& templates = TemplateRegistry::builtin())
      : backend_(backend), store_(std::move(store)), retry_(std::move(retry)), templates_(templates),
        bucket_(backend.rate_limit_per_minute() / 60.0) {}

  /// One entry per seed. Refusals are recorded, never raised. Cached images
  /// and refusal markers short-circuit the backend.
  GeneratedImageSet generate(const ArtifactRecord& artifact, PromptStyle style,
                             const std::vector<std::uint64_t>& seeds) {
    if (seeds.empty()) fail(ErrorKind::InvalidArgument, "generate_images: empty seed list");
    const auto prompt = render_generation_prompt(artifact, style, templates_);
    const auto system = backend_.system_id();

    GeneratedImageSet set;
    set.system_id = system;
    set.artifact = artifact_slot(artifact, style);
    set.supercategory = artifact.supercategory;
    set.style = style;
    for (auto seed : seeds) {
      GeneratedEntry e;
      e.seed = seed;
      auto img_path = store_.image_path(system, artifact, style, seed);
      auto ref_path = store_.refusal_path(system, artifact, style, seed);
      if (std::filesystem::exists(img_path)) {
        e.image_ref = img_path.string();
      } else if (std::filesystem::exists(ref_path)) {
        e.refused = true;
        e.message = util::read_text(ref_path);
      } else {
        run_backend(prompt, seed, img_path, ref_path, e);
      }
      set.entries.push_back(std::move(e));
    }
    return set;
  }

  std::size_t backend_calls() const { return calls_.load(); }

 private:
  void run_backend(const std::string& prompt, std::uint64_t seed, const std::filesystem::path& img_path,
                   const std::filesystem::path& ref_path, GeneratedEntry& e) {
    const auto effective = backend_.supports_seed() ? prompt : embed_seed_in_prompt(prompt, seed);
    auto delay = retry_.base_delay;
    for (int attempt = 0; attempt < retry_.attempts; ++attempt) {
      if (attempt) {
        retry_.sleep(delay);
        delay *= 2;
      }
      bucket_.acquire();
      ++calls_;
      GenerationOutcome out;
      try {
        out = backend_.generate(effective, seed);
      } catch (const std::exception& ex) {
        out = GenerationOutcome::error(ex.what());
      }
      switch (out.kind) {
        case GenerationOutcome::Kind::Image:
          util::atomic_write(img_path, out.png);
          e.image_ref = img_path.string();
          return;
        case GenerationOutcome::Kind::Refused:
          util::atomic_write(ref_path, out.message);
          e.refused = true;
          e.message = out.message;
          return;
        case GenerationOutcome::Kind::Error:
          e.message = out.message;
          break;
      }
    }
    e.failed = true;
  }

  T2IBackend& backend_;
  ImageStore store_;
  RetryPolicy retry_;
  const TemplateRegistry& templates_;
  TokenBucket bucket_;
  std::atomic<std::size_t> calls_{0};
};

inline GeneratedImageSet generate_images(T2IBackend& backend, const ArtifactRecord& artifact, PromptStyle style,
                                         const std::vector<std::uint64_t>& seeds, const ImageStore& store,
                                         RetryPolicy retry = {}) {
  Generator g(backend, store, std::move(retry));
  return g.generate(artifact, style, seeds);
}

struct GenerationJob {
  const ArtifactRecord* artifact;
  PromptStyle style;
  std::vector<std::uint64_t> seeds;
};

/// Runs independent (artifact, style) jobs on up to `jobs` threads. Output
/// order matches input order.
inline std::vector<GeneratedImageSet> generate_all(Generator& gen, const std::vector<GenerationJob>& work,
                                                   std::size_t jobs = 1) {
  std::vector<GeneratedImageSet> out(work.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < work.size();) {
      try {
        out[i] = gen.generate(*work[i].artifact, work[i].style, work[i].seeds);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, work.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

/// Percentage of requested images actually produced for one supercategory.
inline double acceptance_rate(const std::vector<GeneratedImageSet>& sets, std::string_view supercategory) {
  std::size_t total = 0, generated = 0;
  for (const auto& s : sets) {
    if (!util::iequals(s.supercategory, supercategory)) continue;
    total += s.entries.size();
    generated += s.generated();
  }
  if (total == 0) fail(ErrorKind::UndefinedRate, "no generation entries for supercategory '" + std::string(supercategory) + "'");
  return 100.0 * static_cast<double>(generated) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Generation manifest

inline nlohmann::json to_json(const GeneratedImageSet& s) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : s.entries) {
    nlohmann::json je = {{"seed", e.seed}, {"refused", e.refused}, {"failed", e.failed}};
    je["image_ref"] = e.image_ref ? nlohmann::json(*e.image_ref) : nlohmann::json(nullptr);
    if (!e.message.empty()) je["message"] = e.message;
    entries.push_back(std::move(je));
  }
  return {{"system", s.system_id},
          {"artifact", s.artifact},
          {"supercategory", s.supercategory},
          {"style", std::string(to_string(s.style))},
          {"entries", std::move(entries)}};
}

inline GeneratedImageSet generated_set_from_json(const nlohmann::json& j) {
  GeneratedImageSet s;
  s.system_id = j.at("system").get<std::string>();
  s.artifact = j.at("artifact").get<std::string>();
  s.supercategory = j.at("supercategory").get<std::string>();
  s.style = parse_style_or_throw(j.at("style").get<std::string>());
  for (const auto& je : j.at("entries")) {
    GeneratedEntry e;
    e.seed = je.at("seed").get<std::uint64_t>();
    e.refused = je.value("refused", false);
    e.failed = je.value("failed", false);
    if (auto it = je.find("image_ref"); it != je.end() && it->is_string()) e.image_ref = it->get<std::string>();
    e.message = je.value("message", std::string{});
    if (e.refused && e.image_ref) fail(ErrorKind::Schema, "refused entry with image_ref in " + s.artifact);
    s.entries.push_back(std::move(e));
  }
  return s;
}

inline std::vector<GeneratedImageSet> load_generation_manifest(const std::filesystem::path& p) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(util::read_text(p));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Parse, p.string() + ": " + e.what());
  }
  const auto& arr = j.is_object() ? j.at("sets") : j;
  std::vector<GeneratedImageSet> out;
  for (const auto& s : arr) out.push_back(generated_set_from_json(s));
  return out;
}

}  // namespace cure
