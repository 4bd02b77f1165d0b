#pragma once

// Deterministic stand-ins for the heavyweight adapters. Images are 16x16 blends
// of per-word colour patterns, so prompts that share words produce similar
// images, and the mock encoder/VLM see that similarity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cure/embed.hpp"
#include "cure/genpipe.hpp"
#include "cure/image.hpp"
#include "cure/util/hash.hpp"
#include "cure/util/text.hpp"

namespace cure::mock {

inline constexpr int kSide = 16;
inline constexpr int kCells = 4;  // encoder pools kSide/kCells pixel blocks
inline constexpr std::size_t kDims = kCells * kCells * 3;

inline std::vector<std::string> content_words(std::string_view prompt) {
  static const std::set<std::string> stop = {"a",    "an", "the", "of", "from", "image", "type",
                                             "this", "is", "to",  "in", "random", "seed"};
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !stop.count(cur) && !std::all_of(cur.begin(), cur.end(), ::isdigit)) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char c : prompt) {
    if (std::isalnum(c) || c >= 0x80) cur.push_back(static_cast<char>(std::tolower(c)));
    else flush();
  }
  flush();
  return out;
}

/// Float RGB in [0,1], row-major, kSide x kSide x 3. `noise_seed` adds per-seed
/// jitter; without it the result is the prompt's noiseless "concept" image.
inline std::vector<float> render(std::string_view prompt, std::optional<std::uint64_t> noise_seed) {
  std::vector<float> px(kSide * kSide * 3, 0.5f);
  auto words = content_words(prompt);
  if (!words.empty()) {
    std::fill(px.begin(), px.end(), 0.0f);
    for (const auto& w : words) {
      std::mt19937_64 rng(util::sha256_u64(w));
      std::uniform_real_distribution<float> u(0.0f, 1.0f);
      // Coarse blocks so the pattern survives the encoder's pooling.
      std::vector<float> block(kCells * kCells * 3);
      for (auto& b : block) b = u(rng);
      for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
          for (int ch = 0; ch < 3; ++ch) {
            px[(y * kSide + x) * 3 + ch] += block[((y * kCells / kSide) * kCells + x * kCells / kSide) * 3 + ch];
          }
        }
      }
    }
    for (auto& p : px) p /= float(words.size());
  }
  if (noise_seed) {
    std::mt19937_64 rng(util::sha256_u64(std::string(prompt)) ^ (*noise_seed * 0x9E3779B97F4A7C15ull));
    std::uniform_real_distribution<float> u(-0.15f, 0.15f);
    for (auto& p : px) p = std::clamp(p + u(rng), 0.0f, 1.0f);
  }
  return px;
}

inline Image to_image(const std::vector<float>& px) {
  Image img;
  img.width = kSide;
  img.height = kSide;
  img.rgb.resize(px.size());
  for (std::size_t i = 0; i < px.size(); ++i) img.rgb[i] = static_cast<std::uint8_t>(std::lround(px[i] * 255.0f));
  return img;
}

/// Mean-pooled, centred feature vector of an RGB image.
inline Vector features(const Image& img) {
  Vector v = Vector::Zero(kDims);
  std::vector<int> count(kCells * kCells, 0);
  for (std::uint32_t y = 0; y < img.height; ++y) {
    for (std::uint32_t x = 0; x < img.width; ++x) {
      int cell = int(y * kCells / img.height) * kCells + int(x * kCells / img.width);
      ++count[cell];
      for (int ch = 0; ch < 3; ++ch) v(cell * 3 + ch) += img.rgb[(y * img.width + x) * 3 + ch] / 255.0f;
    }
  }
  for (int c = 0; c < kCells * kCells; ++c) {
    for (int ch = 0; ch < 3; ++ch) v(c * 3 + ch) = v(c * 3 + ch) / float(std::max(1, count[c])) - 0.5f;
  }
  if (v.norm() == 0) v(0) = 1.0f;
  return v;
}

struct RefusalRule {
  std::vector<std::string> substrings;  ///< refuse prompts containing any of these (case-insensitive)
  std::set<std::uint64_t> seeds;        ///< refuse these seeds for every prompt
};

class MockT2IBackend : public T2IBackend {
 public:
  explicit MockT2IBackend(std::string id, RefusalRule refuse = {}) : id_(std::move(id)), refuse_(std::move(refuse)) {}

  std::string system_id() const override { return id_; }
  std::string version() const override { return "mock-t2i/1"; }

  GenerationOutcome generate(const std::string& prompt, std::uint64_t seed) override {
    if (refuse_.seeds.count(seed)) return GenerationOutcome::refused("mock refusal for seed " + std::to_string(seed));
    auto low = util::to_lower(prompt);
    for (const auto& s : refuse_.substrings) {
      if (low.find(util::to_lower(s)) != std::string::npos) return GenerationOutcome::refused("mock content policy");
    }
    // The system id perturbs the noise so two mock systems differ.
    return GenerationOutcome::image(encode_png(to_image(render(prompt, seed ^ util::sha256_u64(id_)))));
  }

 private:
  std::string id_;
  RefusalRule refuse_;
};

class MockEncoder : public ImageEncoder {
 public:
  explicit MockEncoder(std::string id = "mock-encoder") : id_(std::move(id)) {}
  std::string id() const override { return id_; }
  std::string version() const override { return "mock-encoder/1"; }

  Matrix encode(const std::vector<std::filesystem::path>& images) override {
    Matrix m(Eigen::Index(images.size()), Eigen::Index(kDims));
    for (std::size_t i = 0; i < images.size(); ++i) m.row(Eigen::Index(i)) = features(read_png(images[i])).transpose();
    return m;
  }

 private:
  std::string id_;
};

/// Text lands in the encoder space as the features of the prompt's noiseless
/// concept image.
class MockVlm : public VlmAdapter {
 public:
  explicit MockVlm(std::string id = "mock-vlm") : id_(std::move(id)) {}
  std::string id() const override { return id_; }
  std::string version() const override { return "mock-vlm/1"; }

  Matrix encode(const std::vector<std::filesystem::path>& images) override { return MockEncoder(id_).encode(images); }
  Vector encode_text(const std::string& prompt) override { return features(to_image(render(prompt, std::nullopt))); }

 private:
  std::string id_;
};

}  // namespace cure::mock
