#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "cure/error.hpp"
#include "cure/image.hpp"
#include "cure/util/fs.hpp"
#include "cure/util/hash.hpp"
#include "cure/util/text.hpp"

namespace cure {

static_assert(std::endian::native == std::endian::little, "embedding cache assumes a little-endian host");

using Matrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXf;

inline constexpr float kUnitNormTolerance = 1e-5f;

struct EmbeddingKey {
  std::string encoder;
  std::string system;
  std::string artifact;
  std::string style;

  std::string describe() const { return encoder + "/" + system + "/" + artifact + "/" + style; }
  bool operator==(const EmbeddingKey&) const = default;
  auto operator<=>(const EmbeddingKey&) const = default;
};

/// Matrix of unit-norm rows (one per non-refused image).
class EmbeddingSet {
 public:
  EmbeddingSet() = default;

  /// Rows are L2-normalized on construction; an all-zero row is rejected.
  EmbeddingSet(EmbeddingKey key, Matrix rows, std::vector<std::uint64_t> seeds = {})
      : key_(std::move(key)), rows_(std::move(rows)), seeds_(std::move(seeds)) {
    for (Eigen::Index i = 0; i < rows_.rows(); ++i) {
      double n = rows_.row(i).cast<double>().norm();
      if (!(n > 0) || !std::isfinite(n)) {
        fail(ErrorKind::InvalidArgument, "embedding row " + std::to_string(i) + " of " + key_.describe() +
                                             " has zero or non-finite norm");
      }
      rows_.row(i) = (rows_.row(i).cast<double>() / n).cast<float>();
    }
    if (!seeds_.empty() && seeds_.size() != static_cast<std::size_t>(rows_.rows())) {
      fail(ErrorKind::InvalidArgument, "seed list does not match row count for " + key_.describe());
    }
  }

  static EmbeddingSet from_rows(const std::vector<std::vector<float>>& rows, EmbeddingKey key = {}) {
    if (rows.empty()) return EmbeddingSet(std::move(key), Matrix(0, 0));
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows[0].size()) fail(ErrorKind::DimensionMismatch, "ragged embedding rows");
      for (std::size_t j = 0; j < rows[i].size(); ++j) m(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
    }
    return EmbeddingSet(std::move(key), std::move(m));
  }

  const EmbeddingKey& key() const { return key_; }
  const Matrix& rows() const { return rows_; }
  const std::vector<std::uint64_t>& seeds() const { return seeds_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(rows_.cols()); }
  bool empty() const { return rows_.rows() == 0; }

  /// Subset of rows, in the given order.
  EmbeddingSet select(const std::vector<std::size_t>& idx) const {
    Matrix m(static_cast<Eigen::Index>(idx.size()), rows_.cols());
    std::vector<std::uint64_t> s;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      m.row(Eigen::Index(i)) = rows_.row(Eigen::Index(idx[i]));
      if (!seeds_.empty()) s.push_back(seeds_[idx[i]]);
    }
    EmbeddingSet out;
    out.key_ = key_;
    out.rows_ = std::move(m);
    out.seeds_ = std::move(s);
    return out;
  }

 private:
  EmbeddingKey key_;
  Matrix rows_;
  std::vector<std::uint64_t> seeds_;
};

enum class SimilarityMode { SET_MEAN_PAIRWISE, CENTROID };

namespace detail {

inline void check_pair(const Matrix& a, const Matrix& b) {
  if (a.rows() == 0 || b.rows() == 0) fail(ErrorKind::EmptySet, "cosine_set_similarity on an empty set");
  if (a.cols() != b.cols()) {
    fail(ErrorKind::DimensionMismatch,
         "embedding dims differ: " + std::to_string(a.cols()) + " vs " + std::to_string(b.cols()));
  }
}

inline double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

}  // namespace detail

/// Similarity between two sets of unit vectors.
///
/// SET_MEAN_PAIRWISE: mean cosine over all |A| x |B| cross pairs. Because rows
/// are unit-norm this equals sum(A)·sum(B) / (|A||B|).
/// CENTROID: cosine between the two mean vectors.
inline double cosine_set_similarity(const Matrix& a, const Matrix& b,
                                    SimilarityMode mode = SimilarityMode::SET_MEAN_PAIRWISE) {
  detail::check_pair(a, b);
  Eigen::VectorXd sa = a.cast<double>().colwise().sum().transpose();
  Eigen::VectorXd sb = b.cast<double>().colwise().sum().transpose();
  if (mode == SimilarityMode::SET_MEAN_PAIRWISE) {
    return detail::clamp_unit(sa.dot(sb) / (double(a.rows()) * double(b.rows())));
  }
  double na = sa.norm(), nb = sb.norm();
  if (na == 0 || nb == 0) return 0.0;  // centroid cancels out; no direction to compare
  return detail::clamp_unit(sa.dot(sb) / (na * nb));
}

inline double cosine_set_similarity(const EmbeddingSet& a, const EmbeddingSet& b,
                                    SimilarityMode mode = SimilarityMode::SET_MEAN_PAIRWISE) {
  return cosine_set_similarity(a.rows(), b.rows(), mode);
}

/// Similarity of a set against one unit vector (e.g. a text embedding).
inline double cosine_set_similarity(const EmbeddingSet& a, const Vector& v,
                                    SimilarityMode mode = SimilarityMode::SET_MEAN_PAIRWISE) {
  Matrix m = v.transpose();
  return cosine_set_similarity(a.rows(), m, mode);
}

inline Vector normalized(const Vector& v) {
  double n = v.cast<double>().norm();
  if (!(n > 0) || !std::isfinite(n)) fail(ErrorKind::InvalidArgument, "zero or non-finite vector");
  return (v.cast<double>() / n).cast<float>();
}

// ---------------------------------------------------------------------------
// Adapters

class ImageEncoder {
 public:
  virtual ~ImageEncoder() = default;
  virtual std::string id() const = 0;
  virtual std::string version() const { return "unversioned"; }
  /// One row per input path, in order. Throw Error(Encoder) on failure.
  virtual Matrix encode(const std::vector<std::filesystem::path>& images) = 0;
};

/// Vision-language model: images and text land in one shared space.
class VlmAdapter : public ImageEncoder {
 public:
  virtual Vector encode_text(const std::string& prompt) = 0;
};

// ---------------------------------------------------------------------------
// Cache: <root>/<encoder>/<system>/<artifact>/<style>.f32 (+ .json sidecar),
// text embeddings under <root>/<vlm>/_text/<sha256(prompt)>.f32, and an index
// at <root>/manifest.json.

class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }

  std::filesystem::path data_path(const EmbeddingKey& k) const {
    return root_ / util::path_slug(k.encoder) / util::path_slug(k.system) / util::path_slug(k.artifact) /
           (util::path_slug(k.style) + ".f32");
  }
  std::filesystem::path meta_path(const EmbeddingKey& k) const {
    auto p = data_path(k);
    p.replace_extension(".json");
    return p;
  }
  std::filesystem::path text_path(const std::string& vlm, const std::string& prompt) const {
    return root_ / util::path_slug(vlm) / "_text" / (util::sha256_hex(prompt) + ".f32");
  }

  bool contains(const EmbeddingKey& k) const { return std::filesystem::exists(meta_path(k)); }

  void store(const EmbeddingSet& s, const std::string& encoder_version, const std::string& inputs_digest) const {
    const auto& m = s.rows();
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(m.size()) * sizeof(float));
    if (!bytes.empty()) std::memcpy(bytes.data(), m.data(), bytes.size());
    util::atomic_write(data_path(s.key()), bytes);
    nlohmann::json meta = {{"encoder", s.key().encoder},
                           {"system", s.key().system},
                           {"artifact", s.key().artifact},
                           {"style", s.key().style},
                           {"rows", m.rows()},
                           {"dims", m.cols()},
                           {"seeds", s.seeds()},
                           {"encoder_version", encoder_version},
                           {"inputs", inputs_digest},
                           {"sha256", util::sha256_hex(bytes)}};
    util::atomic_write(meta_path(s.key()), meta.dump(1) + "\n");
  }

  /// Loads a cached set; `inputs_digest`, when given, must match what was stored.
  std::optional<EmbeddingSet> load(const EmbeddingKey& k, const std::string& inputs_digest = {}) const {
    auto mp = meta_path(k);
    if (!std::filesystem::exists(mp)) return std::nullopt;
    auto meta = nlohmann::json::parse(util::read_text(mp));
    if (!inputs_digest.empty() && meta.value("inputs", std::string{}) != inputs_digest) return std::nullopt;
    auto rows = meta.at("rows").get<Eigen::Index>();
    auto dims = meta.at("dims").get<Eigen::Index>();
    auto bytes = util::read_bytes(data_path(k));
    if (bytes.size() != static_cast<std::size_t>(rows * dims) * sizeof(float)) {
      fail(ErrorKind::Io, "embedding cache size mismatch for " + k.describe());
    }
    if (meta.value("sha256", std::string{}) != util::sha256_hex(bytes)) {
      fail(ErrorKind::Io, "embedding cache checksum mismatch for " + k.describe());
    }
    Matrix m(rows, dims);
    if (!bytes.empty()) std::memcpy(m.data(), bytes.data(), bytes.size());
    EmbeddingSet out(k, std::move(m), meta.value("seeds", std::vector<std::uint64_t>{}));
    return out;
  }

  void store_text(const std::string& vlm, const std::string& prompt, const Vector& v) const {
    std::vector<std::uint8_t> bytes(static_cast<std::size_t>(v.size()) * sizeof(float));
    std::memcpy(bytes.data(), v.data(), bytes.size());
    util::atomic_write(text_path(vlm, prompt), bytes);
  }

  std::optional<Vector> load_text(const std::string& vlm, const std::string& prompt) const {
    auto p = text_path(vlm, prompt);
    if (!std::filesystem::exists(p)) return std::nullopt;
    auto bytes = util::read_bytes(p);
    if (bytes.empty() || bytes.size() % sizeof(float)) fail(ErrorKind::Io, "corrupt text embedding " + p.string());
    Vector v(static_cast<Eigen::Index>(bytes.size() / sizeof(float)));
    std::memcpy(v.data(), bytes.data(), bytes.size());
    return v;
  }

  /// Rebuilds manifest.json from the per-entry sidecars. Sorted for determinism.
  void write_manifest() const {
    std::vector<nlohmann::json> entries;
    if (std::filesystem::exists(root_)) {
      for (const auto& f : std::filesystem::recursive_directory_iterator(root_)) {
        if (!f.is_regular_file() || f.path().extension() != ".json" || f.path().filename() == "manifest.json") continue;
        auto meta = nlohmann::json::parse(util::read_text(f.path()));
        meta["path"] = std::filesystem::relative(f.path(), root_).replace_extension(".f32").generic_string();
        entries.push_back(std::move(meta));
      }
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.at("path").template get<std::string>() <
                                                        b.at("path").template get<std::string>(); });
    nlohmann::json manifest = {{"format", "f32-le-rows"}, {"version", 1}, {"entries", entries}};
    util::atomic_write(root_ / "manifest.json", manifest.dump(1) + "\n");
  }

 private:
  std::filesystem::path root_;
};

struct ImageRef {
  std::uint64_t seed = 0;
  std::filesystem::path path;
};

struct EmbedSkip {
  std::filesystem::path path;
  std::string reason;
};

struct EmbedResult {
  EmbeddingSet set;
  std::vector<EmbedSkip> skipped;
  bool cache_hit = false;
};

inline std::string inputs_digest(const std::vector<ImageRef>& images) {
  std::string acc;
  for (const auto& i : images) acc += std::to_string(i.seed) + "\t" + i.path.generic_string() + "\n";
  return util::sha256_hex(acc);
}

/// Embeds `images` with `encoder`. Undecodable files are skipped and recorded;
/// an encoder failure propagates. A cache hit performs no inference.
inline EmbedResult embed_images(ImageEncoder& encoder, const std::vector<ImageRef>& images, EmbeddingKey key,
                                const EmbeddingCache* cache = nullptr) {
  key.encoder = encoder.id();
  const auto digest = inputs_digest(images);
  if (cache) {
    if (auto hit = cache->load(key, digest)) return {std::move(*hit), {}, true};
  }

  EmbedResult out;
  std::vector<std::filesystem::path> ok_paths;
  std::vector<std::uint64_t> ok_seeds;
  for (const auto& img : images) {
    auto problem = probe_image(img.path);
    if (!problem.empty()) {
      out.skipped.push_back({img.path, problem});
      continue;
    }
    ok_paths.push_back(img.path);
    ok_seeds.push_back(img.seed);
  }

  Matrix rows(0, 0);
  if (!ok_paths.empty()) {
    try {
      rows = encoder.encode(ok_paths);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      fail(ErrorKind::Encoder, encoder.id() + ": " + e.what());
    }
    if (static_cast<std::size_t>(rows.rows()) != ok_paths.size()) {
      fail(ErrorKind::Encoder, encoder.id() + " returned " + std::to_string(rows.rows()) + " rows for " +
                                   std::to_string(ok_paths.size()) + " images");
    }
  }
  out.set = EmbeddingSet(key, std::move(rows), std::move(ok_seeds));
  if (cache) cache->store(out.set, encoder.version(), digest);
  return out;
}

/// Unit-norm text embedding, cached by (vlm id, prompt hash).
inline Vector embed_text(VlmAdapter& vlm, const std::string& prompt, const EmbeddingCache* cache = nullptr) {
  if (prompt.empty()) fail(ErrorKind::InvalidArgument, "embed_text: empty prompt");
  if (cache) {
    if (auto hit = cache->load_text(vlm.id(), prompt)) return *hit;
  }
  Vector v;
  try {
    v = normalized(vlm.encode_text(prompt));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Adapter) throw;
    fail(ErrorKind::Adapter, vlm.id() + ": " + e.what());
  } catch (const std::exception& e) {
    fail(ErrorKind::Adapter, vlm.id() + ": " + e.what());
  }
  if (cache) cache->store_text(vlm.id(), prompt, v);
  return v;
}

}  // namespace cure
