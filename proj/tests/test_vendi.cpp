#include <cmath>
#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "cure/vendi.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cure;

namespace {

double oracle_vendi(const Eigen::MatrixXd& k) { return oracle::vendi(oracle::to_rows(k)); }

Eigen::MatrixXd random_kernel(std::mt19937_64& rng, std::size_t m, std::size_t dims) {
  return cosine_kernel(test::random_rows(rng, m, dims));
}

}  // namespace

TEST_CASE("vendi matches an independent eigen-solver") {
  std::mt19937_64 rng(GENERATE(1, 2, 3, 4, 5, 6));
  std::uniform_int_distribution<std::size_t> m(2, 24), d(2, 32);
  auto k = random_kernel(rng, m(rng), d(rng));
  CHECK(vendi_score(k) == Catch::Approx(oracle_vendi(k)).epsilon(1e-6));
}

TEST_CASE("vendi bounds: identical rows give 1, orthogonal rows give m") {
  for (std::size_t m : {1u, 2u, 5u, 12u}) {
    CHECK(vendi_score(Eigen::MatrixXd::Ones(Eigen::Index(m), Eigen::Index(m))) == Catch::Approx(1.0));
    CHECK(vendi_score(Eigen::MatrixXd::Identity(Eigen::Index(m), Eigen::Index(m))) == Catch::Approx(double(m)));
  }
  std::mt19937_64 rng(17);
  for (int i = 0; i < 25; ++i) {
    auto k = random_kernel(rng, 2 + rng() % 10, 3 + rng() % 8);
    auto v = vendi_score(k);
    CHECK(v >= 1.0 - 1e-9);
    CHECK(v <= double(k.rows()) + 1e-9);
  }
}

TEST_CASE("vendi is invariant under seed permutation") {
  std::mt19937_64 rng(5);
  auto rows = test::random_rows(rng, 9, 6);
  std::vector<int> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix shuffled(9, 6);
  for (int i = 0; i < 9; ++i) shuffled.row(i) = rows.row(perm[std::size_t(i)]);
  CHECK(vendi_score(cosine_kernel(rows)) == Catch::Approx(vendi_score(cosine_kernel(shuffled))));
}

TEST_CASE("indefinite kernels are rejected") {
  Eigen::MatrixXd k(2, 2);
  k << 1, 2, 2, 1;  // eigenvalues 3 and -1
  try {
    vendi_score(k);
    FAIL();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPsd);
  }
  // Round-off below the tolerance is clipped, not rejected.
  Eigen::MatrixXd near = Eigen::MatrixXd::Ones(3, 3);
  near(0, 1) = near(1, 0) = 1 + 1e-10;
  CHECK_NOTHROW(vendi_score(near));
}

TEST_CASE("category vendi assigns seeds to nearest artifacts") {
  auto pierogi = EmbeddingSet::from_rows({{1, 0, 0}, {0.9f, 0.1f, 0}});
  auto banku = EmbeddingSet::from_rows({{0, 1, 0}, {0.1f, 0.9f, 0}});
  auto kente = EmbeddingSet::from_rows({{0, 0, 1}});

  SECTION("all seeds collapse onto one artifact") {
    auto cat = EmbeddingSet::from_rows({{1, 0.1f, 0}, {0.8f, 0, 0.1f}, {1, 0, 0}, {0.9f, 0.2f, 0}});
    auto r = score_vendi({&cat, {"Pierogi", "Banku", "Kente"}, {&pierogi, &banku, &kente}, {}, std::nullopt});
    CHECK(r.assignment == std::vector<std::size_t>{0, 0, 0, 0});
    CHECK(r.vs == Catch::Approx(1.0));
    CHECK(r.vs_normalized == Catch::Approx(0.25));
  }

  SECTION("seeds spread over orthogonal artifacts") {
    auto cat = EmbeddingSet::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    auto r = score_vendi({&cat, {"Pierogi", "Banku", "Kente"}, {&pierogi, &banku, &kente}, {}, std::vector<double>{0.5, 1, 0.9}});
    CHECK(r.assignment == std::vector<std::size_t>{0, 1, 2});
    // Kernel entries are cosines between the artifact centroids (of unit rows).
    const double u = 0.9 / std::hypot(0.9, 0.1), v = 0.1 / std::hypot(0.9, 0.1);
    Eigen::MatrixXd c(3, 3);
    c << 1 + u, v, 0, v, 1 + u, 0, 0, 0, 1;
    c.rowwise().normalize();
    CHECK(r.vs == Catch::Approx(oracle_vendi(c * c.transpose())).epsilon(1e-9));
    REQUIRE(r.qvs);
    CHECK(*r.qvs == Catch::Approx(0.8 * r.vs));
  }

  SECTION("attribute kernel") {
    auto cat = EmbeddingSet::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    VendiInput in{&cat, {"Pierogi", "Banku", "Kente"}, {&pierogi, &banku, &kente}, {"Europe", "Africa", "Africa"}, std::nullopt};
    in.kernel = VendiKernel::ATTRIBUTE;
    auto r = score_vendi(in);
    // Blocks {0} and {1,2}: eigenvalues 1/3 and 2/3.
    CHECK(r.vs == Catch::Approx(std::exp(-(1.0 / 3) * std::log(1.0 / 3) - (2.0 / 3) * std::log(2.0 / 3))));
  }

  SECTION("seed cosine kernel ignores assignment") {
    auto cat = EmbeddingSet::from_rows({{1, 0, 0}, {0, 1, 0}});
    VendiInput in{&cat, {}, {}, {}, std::nullopt};
    in.kernel = VendiKernel::SEED_COSINE;
    CHECK(score_vendi(in).vs == Catch::Approx(2.0));
  }

  SECTION("missing inputs") {
    EmbeddingSet empty;
    CHECK_THROWS_AS(score_vendi({&empty, {}, {}, {}, std::nullopt}), Error);
    auto cat = EmbeddingSet::from_rows({{1, 0, 0}});
    CHECK_THROWS_AS(score_vendi({&cat, {"x"}, {}, {}, std::nullopt}), Error);
    CHECK_THROWS_AS(score_vendi({&cat, {"Pierogi"}, {&pierogi}, {}, std::vector<double>{1, 1}}), Error);
  }
}
