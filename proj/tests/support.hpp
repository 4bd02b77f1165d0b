#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cure/adapters/mock.hpp"
#include "cure/dataset.hpp"
#include "cure/embed.hpp"
#include "cure/image.hpp"
#include "cure/util/fs.hpp"

#include <nlohmann/json.hpp>

namespace cure::test {

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("cure-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline ArtifactRecord artifact(std::string name, std::string category, std::string supercategory, std::string region) {
  ArtifactRecord a;
  a.name = std::move(name);
  a.category = std::move(category);
  a.supercategory = std::move(supercategory);
  a.region = std::move(region);
  auto c = lookup_country(a.region);
  a.continent = c ? std::string(c->continent) : "Europe";
  a.global_bucket = c ? c->bucket : GlobalBucket::GN;
  a.ground_truth = {"a.jpg", "b.jpg", "c.jpg", "d.jpg"};
  return a;
}

/// Random unit rows.
inline Matrix random_rows(std::mt19937_64& rng, std::size_t rows, std::size_t dims) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dims));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = n(rng);
    m.row(i).normalize();
  }
  return m;
}

inline EmbeddingSet random_set(std::mt19937_64& rng, std::size_t rows, std::size_t dims) {
  return EmbeddingSet({}, random_rows(rng, rows, dims));
}

/// Writes `n` mock ground-truth PNGs for `prompt` under `dir`; returns paths
/// relative to `dir`'s parent.
inline std::vector<std::string> write_mock_images(const std::filesystem::path& dir, const std::string& prompt,
                                                  std::size_t n, std::uint64_t seed0 = 1000) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto p = dir / (std::to_string(i) + ".png");
    util::atomic_write(p, encode_png(mock::to_image(mock::render(prompt, seed0 + i))));
    out.push_back(std::filesystem::relative(p, dir.parent_path()).generic_string());
  }
  return out;
}

struct MockArtifact {
  std::string name, category, supercategory, region;
};

/// Lays out a runnable project in `dir`: dataset.json with four mock
/// ground-truth PNGs per artifact, gold.csv (when non-empty) and run.json with
/// two mock systems, one encoder and one VLM. `overrides` is merged into the
/// config. Returns the config path.
inline std::filesystem::path write_mock_project(const std::filesystem::path& dir, const std::vector<MockArtifact>& arts,
                                                const std::string& gold_csv = {},
                                                const nlohmann::json& overrides = nlohmann::json::object()) {
  nlohmann::json ds = {{"artifacts", nlohmann::json::array()}};
  for (const auto& a : arts) {
    auto gt = write_mock_images(dir / "gt" / util::path_slug(a.name), "An image of " + a.name, 4);
    for (auto& g : gt) g = "gt/" + g;
    ds["artifacts"].push_back({{"name", a.name},
                               {"category", a.category},
                               {"supercategory", a.supercategory},
                               {"region", a.region},
                               {"ground_truth", gt}});
  }
  util::atomic_write(dir / "dataset.json", ds.dump(2) + "\n");
  nlohmann::json cfg = {
      {"dataset", "dataset.json"},
      {"systems", {{{"id", "mock-a"}, {"kind", "mock"}}, {{"id", "mock-b"}, {"kind", "mock"}}}},
      {"encoders", {{{"id", "mock-enc"}, {"kind", "mock"}}}},
      {"vlms", {{{"id", "mock-vlm"}, {"kind", "mock"}}}},
      {"seed_policy", {{"default", 4}, {"category", 8}}},
      {"elo", {{"mock-a", 1010}, {"mock-b", 990}}},
      {"output_dir", "out"},
  };
  if (!gold_csv.empty()) {
    util::atomic_write(dir / "gold.csv", gold_csv);
    cfg["gold"] = "gold.csv";
  }
  cfg.merge_patch(overrides);
  util::atomic_write(dir / "run.json", cfg.dump(2) + "\n");
  return dir / "run.json";
}

}  // namespace cure::test
