#pragma once

// Quantitative scorers over cached embeddings and images.
//
// Similarity scorers (gt, ps, ita) compare sets of unit embeddings with
// cosine_set_similarity; diversity scorers (div, lpips) average a pairwise
// dissimilarity adapter; divergence scorers combine two of the above.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "cure/embed.hpp"
#include "cure/error.hpp"
#include "cure/image.hpp"
#include "cure/util/csv.hpp"
#include "cure/util/fs.hpp"
#include "cure/util/text.hpp"
#include "cure/vendi.hpp"

namespace cure {

struct ScoreRecord {
  std::string scorer_id;
  std::string system_id;
  std::string artifact;
  std::string style;
  std::string encoder_or_vlm;
  double value = 0;
  std::size_t seeds_used = 0;
  std::string adapter_version;

  void check() const {
    if (seeds_used < 1) fail(ErrorKind::InvalidArgument, "ScoreRecord " + scorer_id + "/" + artifact + ": seeds_used < 1");
    if (!std::isfinite(value)) fail(ErrorKind::InvalidArgument, "ScoreRecord " + scorer_id + "/" + artifact + ": non-finite value");
  }
  bool operator==(const ScoreRecord&) const = default;
};

inline constexpr double kDivergenceOffset = 0.5;

// ---------------------------------------------------------------------------
// Perceptual similarity

inline void require_generated(const EmbeddingSet& s, const char* what) {
  if (s.empty()) fail(ErrorKind::AllRefused, std::string(what) + ": no generated images (all seeds refused or missing)");
}

/// Generated images against the artifact's ground-truth images.
inline double score_gt(const EmbeddingSet& generated, const EmbeddingSet& ground_truth,
                       SimilarityMode mode = SimilarityMode::SET_MEAN_PAIRWISE) {
  require_generated(generated, "score_gt");
  if (ground_truth.empty()) fail(ErrorKind::MissingEmbedding, "score_gt: ground-truth embeddings missing");
  return cosine_set_similarity(generated, ground_truth, mode);
}

/// Generated images against the category-only prompt's images.
inline double score_ps(const EmbeddingSet& generated, const EmbeddingSet& category_images,
                       SimilarityMode mode = SimilarityMode::SET_MEAN_PAIRWISE) {
  require_generated(generated, "score_ps");
  if (category_images.empty()) fail(ErrorKind::MissingEmbedding, "score_ps: category-prompt embeddings missing");
  return cosine_set_similarity(generated, category_images, mode);
}

/// 0.5 + ps(subset) - ps(name only).
inline double score_ps_divergence(std::optional<double> ps_subset, std::optional<double> ps_name) {
  if (!ps_subset || !ps_name) fail(ErrorKind::MissingComponent, "score_ps_divergence: component score missing");
  return kDivergenceOffset + *ps_subset - *ps_name;
}

// ---------------------------------------------------------------------------
// Image-text alignment

/// Mean of the name-prompt alignment and the attribute-prompt alignment of the
/// name-only images.
inline double score_ita(const EmbeddingSet& name_images, const Vector& name_text, const Vector& attribute_text) {
  require_generated(name_images, "score_ita");
  if (name_text.size() != attribute_text.size() || std::size_t(name_text.size()) != name_images.dim()) {
    fail(ErrorKind::DimensionMismatch, "score_ita: image and text embeddings come from different spaces");
  }
  return 0.5 * (cosine_set_similarity(name_images, name_text) + cosine_set_similarity(name_images, attribute_text));
}

/// Raw alignment of the name-only images to a single evaluation prompt.
inline double score_ita_baseline(const EmbeddingSet& name_images, const Vector& text) {
  require_generated(name_images, "score_ita_baseline");
  if (std::size_t(text.size()) != name_images.dim()) {
    fail(ErrorKind::DimensionMismatch, "score_ita_baseline: image and text embeddings come from different spaces");
  }
  return cosine_set_similarity(name_images, text);
}

// ---------------------------------------------------------------------------
// Diversity

/// Image dissimilarity adapter (e.g. LPIPS). Must satisfy d(x, x) = 0.
class Dissimilarity {
 public:
  virtual ~Dissimilarity() = default;
  virtual std::string id() const = 0;
  virtual std::string version() const = 0;
  virtual double operator()(const std::filesystem::path& a, const std::filesystem::path& b) = 0;
};

/// Per-image quality (e.g. a human-preference reward model) for qVS.
class QualityFunction {
 public:
  virtual ~QualityFunction() = default;
  virtual std::string id() const = 0;
  virtual std::string version() const = 0;
  virtual double operator()(const std::filesystem::path& image) = 0;
};

/// Default when no reward model is installed; makes qVS equal VS.
class ConstantQuality : public QualityFunction {
 public:
  std::string id() const override { return "constant-1"; }
  std::string version() const override { return "constant-1/1"; }
  double operator()(const std::filesystem::path&) override { return 1.0; }
};

struct PairwiseResult {
  double mean = 0;
  std::size_t pairs = 0;
};

/// Mean of d(x_i, x_j) over all unordered pairs i < j.
template <typename Item, typename Dis>
PairwiseResult mean_pairwise_dissimilarity(std::span<const Item> items, Dis&& d) {
  if (items.size() < 2) fail(ErrorKind::EmptySet, "pairwise dissimilarity needs at least 2 items");
  double sum = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      double v = d(items[i], items[j]);
      if (!std::isfinite(v) || v < 0) fail(ErrorKind::Adapter, "dissimilarity returned a negative or non-finite value");
      sum += v;
      ++pairs;
    }
  }
  return {sum / double(pairs), pairs};
}

/// Diversity over the pooled images of every benchmark prompt style for one
/// artifact (refused seeds already excluded by the caller).
inline PairwiseResult score_div(const std::vector<std::filesystem::path>& pooled, Dissimilarity& d) {
  return mean_pairwise_dissimilarity(std::span<const std::filesystem::path>(pooled),
                                     [&](const auto& a, const auto& b) { return d(a, b); });
}

/// Intra-artifact diversity among the seeds of the name-only prompt.
inline PairwiseResult score_lpips_artifact(const std::vector<std::filesystem::path>& seeds, Dissimilarity& d) {
  return score_div(seeds, d);
}

/// Category-level diversity: mean of member artifacts' intra-artifact values.
inline double score_lpips_category(std::span<const double> member_values) {
  if (member_values.empty()) fail(ErrorKind::EmptySet, "score_lpips_category: no member artifacts");
  double s = 0;
  for (double v : member_values) s += v;
  return s / double(member_values.size());
}

/// div - lpips(name only).
inline double score_div_divergence(std::optional<double> div, std::optional<double> lpips_name) {
  if (!div || !lpips_name) fail(ErrorKind::MissingComponent, "score_div_divergence: component score missing");
  return *div - *lpips_name;
}

/// 1 - cosine between unit embeddings, in [0, 2]. Useful as a dissimilarity
/// over embeddings when no perceptual backend is installed.
inline double cosine_dissimilarity(const Eigen::Ref<const Eigen::RowVectorXf>& a,
                                   const Eigen::Ref<const Eigen::RowVectorXf>& b) {
  double c = std::clamp(double(a.cast<double>().dot(b.cast<double>())), -1.0, 1.0);
  return std::max(0.0, 1.0 - c);
}

/// Diversity over the rows of an embedding set (1 - cosine per pair).
inline PairwiseResult embedding_diversity(const EmbeddingSet& s) {
  if (s.size() < 2) fail(ErrorKind::EmptySet, "embedding_diversity needs at least 2 rows");
  Eigen::MatrixXd x = s.rows().cast<double>();
  Eigen::MatrixXd g = x * x.transpose();
  double sum = 0;
  std::size_t pairs = 0;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < g.cols(); ++j) {
      sum += std::max(0.0, 1.0 - std::clamp(g(i, j), -1.0, 1.0));
      ++pairs;
    }
  }
  return {sum / double(pairs), pairs};
}

/// Mean absolute per-channel pixel difference in [0, 1]. A lightweight
/// stand-in for learned perceptual metrics; images must share dimensions.
class PixelDissimilarity : public Dissimilarity {
 public:
  std::string id() const override { return "pixel-l1"; }
  std::string version() const override { return "pixel-l1/1"; }
  double operator()(const std::filesystem::path& a, const std::filesystem::path& b) override {
    auto ia = read_png(a);
    auto ib = read_png(b);
    if (ia.width != ib.width || ia.height != ib.height) {
      fail(ErrorKind::DimensionMismatch, "pixel dissimilarity needs equal image sizes");
    }
    double s = 0;
    for (std::size_t i = 0; i < ia.rgb.size(); ++i) s += std::abs(int(ia.rgb[i]) - int(ib.rgb[i]));
    return s / (255.0 * double(ia.rgb.size()));
  }
};

// ---------------------------------------------------------------------------
// Persistence: scores.jsonl + scores.csv

inline const std::vector<std::string>& score_columns() {
  static const std::vector<std::string> cols = {"scorer_id", "system", "artifact", "style", "encoder",
                                                "value",     "seeds_used", "adapter_version"};
  return cols;
}

inline void sort_scores(std::vector<ScoreRecord>& scores) {
  std::sort(scores.begin(), scores.end(), [](const ScoreRecord& a, const ScoreRecord& b) {
    return std::tie(a.scorer_id, a.system_id, a.encoder_or_vlm, a.artifact, a.style) <
           std::tie(b.scorer_id, b.system_id, b.encoder_or_vlm, b.artifact, b.style);
  });
}

inline nlohmann::json to_json(const ScoreRecord& r) {
  return {{"scorer_id", r.scorer_id}, {"system", r.system_id},         {"artifact", r.artifact},
          {"style", r.style},         {"encoder", r.encoder_or_vlm},   {"value", r.value},
          {"seeds_used", r.seeds_used}, {"adapter_version", r.adapter_version}};
}

inline ScoreRecord score_from_json(const nlohmann::json& j) {
  ScoreRecord r;
  r.scorer_id = j.at("scorer_id").get<std::string>();
  r.system_id = j.at("system").get<std::string>();
  r.artifact = j.at("artifact").get<std::string>();
  r.style = j.value("style", std::string{});
  r.encoder_or_vlm = j.value("encoder", std::string{});
  r.value = j.at("value").get<double>();
  r.seeds_used = j.at("seeds_used").get<std::size_t>();
  r.adapter_version = j.value("adapter_version", std::string{});
  return r;
}

inline std::string scores_to_csv(const std::vector<ScoreRecord>& scores) {
  std::string out = util::csv_row(score_columns());
  for (const auto& r : scores) {
    out += util::csv_row({r.scorer_id, r.system_id, r.artifact, r.style, r.encoder_or_vlm,
                          util::format_double(r.value), std::to_string(r.seeds_used), r.adapter_version});
  }
  return out;
}

inline std::string scores_to_jsonl(const std::vector<ScoreRecord>& scores) {
  std::string out;
  for (const auto& r : scores) out += to_json(r).dump() + "\n";
  return out;
}

/// Appends records to `<dir>/scores.jsonl`.
inline void append_scores(const std::filesystem::path& dir, const std::vector<ScoreRecord>& scores) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "scores.jsonl", std::ios::app | std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot append to " + (dir / "scores.jsonl").string());
  out << scores_to_jsonl(scores);
}

inline std::vector<ScoreRecord> load_scores_jsonl(const std::filesystem::path& p) {
  std::vector<ScoreRecord> out;
  auto text = util::read_text(p);
  std::size_t line_no = 0;
  for (const auto& line : util::split(text, '\n')) {
    ++line_no;
    if (util::trim(line).empty()) continue;
    try {
      out.push_back(score_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::Parse, p.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

/// Accepts a scores.jsonl file or a directory containing one.
inline std::vector<ScoreRecord> load_scores(const std::filesystem::path& p) {
  if (std::filesystem::is_directory(p)) return load_scores_jsonl(p / "scores.jsonl");
  return load_scores_jsonl(p);
}

}  // namespace cure
