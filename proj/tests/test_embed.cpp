#include <catch_amalgamated.hpp>

#include <random>

#include "cure/adapters/mock.hpp"
#include "cure/embed.hpp"
#include "support.hpp"

using namespace cure;
using cure::test::TempDir;

namespace {

double brute_mean_cosine(const Matrix& a, const Matrix& b) {
  double acc = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      Eigen::VectorXd x = a.row(i).cast<double>(), y = b.row(j).cast<double>();
      acc += x.dot(y) / (x.norm() * y.norm());
    }
  }
  return acc / double(a.rows() * b.rows());
}

class CountingEncoder : public ImageEncoder {
 public:
  int calls = 0;
  std::string id() const override { return "counting"; }
  Matrix encode(const std::vector<std::filesystem::path>& images) override {
    ++calls;
    return mock::MockEncoder().encode(images);
  }
};

class BrokenVlm : public VlmAdapter {
 public:
  std::string id() const override { return "broken"; }
  Matrix encode(const std::vector<std::filesystem::path>&) override { throw std::runtime_error("gpu on fire"); }
  Vector encode_text(const std::string&) override { throw std::runtime_error("tokenizer missing"); }
};

}  // namespace

TEST_CASE("rows are unit-norm after construction") {
  std::mt19937_64 rng(7);
  std::normal_distribution<float> n(0, 3);
  Matrix m(10, 32);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  EmbeddingSet s({}, m);
  for (Eigen::Index i = 0; i < s.rows().rows(); ++i) CHECK(std::abs(s.rows().row(i).norm() - 1.0f) < kUnitNormTolerance);
}

TEST_CASE("zero rows are rejected") {
  Matrix m = Matrix::Zero(2, 3);
  m(0, 0) = 1;
  CHECK_THROWS_AS(EmbeddingSet({}, m), Error);
}

TEST_CASE("mean pairwise cosine matches the double loop") {
  std::mt19937_64 rng(GENERATE(1, 2, 3, 4, 5));
  std::uniform_int_distribution<int> sz(1, 12);
  auto a = test::random_set(rng, std::size_t(sz(rng)), 24);
  auto b = test::random_set(rng, std::size_t(sz(rng)), 24);
  CHECK(cosine_set_similarity(a, b) == Catch::Approx(brute_mean_cosine(a.rows(), b.rows())).margin(1e-6));
  CHECK(cosine_set_similarity(a, b) == Catch::Approx(cosine_set_similarity(b, a)).margin(1e-9));
  auto v = cosine_set_similarity(a, b);
  CHECK(v >= -1.0);
  CHECK(v <= 1.0);
}

TEST_CASE("centroid cosine") {
  auto a = EmbeddingSet::from_rows({{1, 0}, {0, 1}});
  auto b = EmbeddingSet::from_rows({{1, 1}});
  CHECK(cosine_set_similarity(a, b, SimilarityMode::CENTROID) == Catch::Approx(1.0));
  CHECK(cosine_set_similarity(a, b) == Catch::Approx(std::sqrt(0.5)));
  auto opposite = EmbeddingSet::from_rows({{1, 0}, {-1, 0}});
  CHECK(cosine_set_similarity(opposite, b, SimilarityMode::CENTROID) == 0.0);
}

TEST_CASE("a set is maximally similar to itself when rows coincide") {
  auto a = EmbeddingSet::from_rows({{0.3f, 0.4f, 0}, {3, 4, 0}});
  CHECK(cosine_set_similarity(a, a) == Catch::Approx(1.0));
}

TEST_CASE("empty and mismatched sets") {
  auto a = EmbeddingSet::from_rows({{1, 0}});
  auto b = EmbeddingSet::from_rows({{1, 0, 0}});
  auto check_kind = [](auto&& fn, ErrorKind k) {
    try {
      fn();
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == k);
    }
  };
  check_kind([&] { cosine_set_similarity(a, b); }, ErrorKind::DimensionMismatch);
  check_kind([&] { cosine_set_similarity(a, EmbeddingSet{}); }, ErrorKind::EmptySet);
  check_kind([&] { EmbeddingSet::from_rows({{1, 0}, {1}}); }, ErrorKind::DimensionMismatch);
}

TEST_CASE("embedding skips undecodable files and caches results") {
  TempDir tmp;
  auto refs = test::write_mock_images(tmp.path() / "imgs", "An image of Kente", 3);
  std::vector<ImageRef> images;
  for (std::size_t i = 0; i < refs.size(); ++i) images.push_back({i, tmp.path() / refs[i]});
  util::atomic_write(tmp.path() / "imgs" / "bad.png", std::string("not a png"));
  images.push_back({9, tmp.path() / "imgs" / "bad.png"});

  EmbeddingCache cache(tmp.path() / "cache");
  CountingEncoder enc;
  EmbeddingKey key{"", "mock-a", "Kente", "N"};
  auto r1 = embed_images(enc, images, key, &cache);
  CHECK(enc.calls == 1);
  CHECK_FALSE(r1.cache_hit);
  REQUIRE(r1.skipped.size() == 1);
  CHECK(r1.skipped[0].path.filename() == "bad.png");
  CHECK(r1.set.size() == 3);
  CHECK(r1.set.seeds() == std::vector<std::uint64_t>{0, 1, 2});

  auto r2 = embed_images(enc, images, key, &cache);
  CHECK(enc.calls == 1);
  CHECK(r2.cache_hit);
  CHECK(r2.set.rows().isApprox(r1.set.rows()));
  CHECK(r2.set.seeds() == r1.set.seeds());

  // Changing the inputs invalidates the entry.
  images.pop_back();
  images.pop_back();
  auto r3 = embed_images(enc, images, key, &cache);
  CHECK(enc.calls == 2);
  CHECK(r3.set.size() == 2);

  cache.write_manifest();
  auto manifest = nlohmann::json::parse(util::read_text(tmp.path() / "cache" / "manifest.json"));
  CHECK(manifest["entries"].size() == 1);
}

TEST_CASE("corrupted cache entries are detected") {
  TempDir tmp;
  EmbeddingCache cache(tmp.path());
  EmbeddingKey key{"enc", "s", "a", "N"};
  cache.store(EmbeddingSet(key, Matrix::Identity(2, 2)), "v1", "d");
  REQUIRE(cache.load(key));
  auto bytes = util::read_bytes(cache.data_path(key));
  bytes[0] ^= 0x40;
  util::atomic_write(cache.data_path(key), bytes);
  CHECK_THROWS_AS(cache.load(key), Error);
}

TEST_CASE("text embeddings are unit-norm and cached") {
  TempDir tmp;
  EmbeddingCache cache(tmp.path());
  mock::MockVlm vlm;
  auto v = embed_text(vlm, "An image of Kente.", &cache);
  CHECK(v.norm() == Catch::Approx(1.0).margin(1e-5));
  CHECK(cache.load_text("mock-vlm", "An image of Kente."));
  CHECK(embed_text(vlm, "An image of Kente.", &cache).isApprox(v));
}

TEST_CASE("adapter failures surface as Adapter / Encoder errors") {
  TempDir tmp;
  BrokenVlm vlm;
  try {
    embed_text(vlm, "x");
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Adapter);
  }
  auto refs = test::write_mock_images(tmp.path() / "i", "x", 1);
  try {
    embed_images(vlm, {{0, tmp.path() / refs[0]}}, {});
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Encoder);
  }
  CHECK_THROWS_AS(embed_text(vlm, ""), Error);
}

TEST_CASE("mock encoder sees shared words") {
  TempDir tmp;
  mock::MockEncoder enc;
  auto kente = test::write_mock_images(tmp.path() / "k", "An image of Kente", 2);
  auto kente_gh = test::write_mock_images(tmp.path() / "kg", "An image of Kente, from Ghana", 2);
  auto hat = test::write_mock_images(tmp.path() / "h", "An image of Sombrero", 2);
  auto load = [&](const std::vector<std::string>& r) {
    std::vector<ImageRef> v;
    for (std::size_t i = 0; i < r.size(); ++i) v.push_back({i, tmp.path() / r[i]});
    return embed_images(enc, v, {}).set;
  };
  auto k = load(kente), kg = load(kente_gh), h = load(hat);
  CHECK(cosine_set_similarity(k, kg) > cosine_set_similarity(k, h));
}
