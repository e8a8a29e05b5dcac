#include <cmath>
#include <vector>

#include "doctest.h"
#include "tabbench/kde.hpp"
#include "testutil.hpp"

using namespace tabbench;

namespace {

ConfigSpace one_categorical(int card) {
  Hyperparameter p;
  p.name = "c";
  p.kind = ParamKind::categorical;
  for (int v = 0; v < card; ++v) p.values.push_back(Value::text("v" + std::to_string(v)));
  return ConfigSpace({std::move(p)});
}

double grid_mass(const ConfigSpace& space, const GridKde& kde) {
  double total = 0.0;
  for (uint64_t c = 0; c < space.cardinality(); ++c) {
    const std::vector<int> pos = space.decode(c);
    total += kde.density(pos);
  }
  return total;
}

}  // namespace

TEST_SUITE("kde") {

TEST_CASE("categorical kernel at the bandwidth floor") {
  const ConfigSpace space = one_categorical(3);
  const std::vector<std::vector<int>> samples(5, std::vector<int>{0});
  const GridKde kde = GridKde::fit(space, samples, {});

  // Identical samples make the leave-one-out likelihood favor the smallest
  // candidate bandwidth, which is the floor.
  REQUIRE(kde.bandwidths().size() == 1);
  CHECK(kde.bandwidths()[0] == 0.3);
  CHECK(kde.density(std::vector<int>{0}) == 0.7);
  CHECK(kde.density(std::vector<int>{1}) == 0.15);
  CHECK(kde.density(std::vector<int>{2}) == 0.15);
  CHECK(kde.log_density(std::vector<int>{0}) == doctest::Approx(std::log(0.7)).epsilon(1e-12));

  SUBCASE("a higher floor shifts the whole column") {
    KdeOptions opts;
    opts.min_bandwidth = 0.6;
    const GridKde wide = GridKde::fit(space, samples, opts);
    CHECK(wide.bandwidths()[0] == 0.6);
    CHECK(wide.density(std::vector<int>{0}) == doctest::Approx(0.4).epsilon(1e-12));
  }
}

TEST_CASE("ordinal kernel decays geometrically with distance") {
  const ConfigSpace space = testutil::ordinal_space({3});
  const std::vector<std::vector<int>> samples(5, std::vector<int>{0});
  const GridKde kde = GridKde::fit(space, samples, {});

  CHECK(kde.bandwidths()[0] == 0.3);
  const double colsum = 0.7 + 0.5 * 0.7 * 0.3 + 0.5 * 0.7 * 0.09;
  CHECK(kde.density(std::vector<int>{0}) == doctest::Approx(0.7 / colsum).epsilon(1e-12));
  CHECK(kde.density(std::vector<int>{1}) == doctest::Approx(0.105 / colsum).epsilon(1e-12));
  CHECK(kde.density(std::vector<int>{2}) == doctest::Approx(0.0315 / colsum).epsilon(1e-12));
}

TEST_CASE("product density integrates to one over the grid") {
  Hyperparameter cat;
  cat.name = "k";
  cat.kind = ParamKind::categorical;
  for (const char* s : {"a", "b", "c", "d"}) cat.values.push_back(Value::text(s));
  std::vector<Hyperparameter> params;
  params.push_back(std::move(cat));
  const ConfigSpace ordinals = testutil::ordinal_space({5, 3});
  for (const Hyperparameter& p : ordinals.params()) params.push_back(p);
  const ConfigSpace space{std::move(params)};

  Rng rng(13);
  std::vector<std::vector<int>> samples;
  for (int i = 0; i < 40; ++i) {
    std::vector<int> pos;
    for (int d = 0; d < space.num_params(); ++d)
      pos.push_back(static_cast<int>(rng.below(space.param(d).cardinality())));
    samples.push_back(std::move(pos));
  }
  const GridKde kde = GridKde::fit(space, samples, {});
  CHECK(grid_mass(space, kde) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kde.n_samples() == 40);

  const UnivariateKde uni = UnivariateKde::fit(space, samples, {});
  double mass = 0.0;
  for (uint64_t c = 0; c < space.cardinality(); ++c) {
    const std::vector<int> pos = space.decode(c);
    mass += uni.density(pos);
    CHECK(uni.log_density(pos) == doctest::Approx(std::log(uni.density(pos))).epsilon(1e-12));
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("univariate estimator factorizes across dimensions") {
  const ConfigSpace space = testutil::ordinal_space({3, 3});
  // Perfectly correlated samples: a joint model would see only the diagonal,
  // the per-dimension model must factor into independent marginals.
  std::vector<std::vector<int>> samples;
  for (int i = 0; i < 9; ++i) samples.push_back({i % 3, i % 3});
  const UnivariateKde kde = UnivariateKde::fit(space, samples, {});
  const double d00 = kde.density(std::vector<int>{0, 0});
  const double d11 = kde.density(std::vector<int>{1, 1});
  const double d01 = kde.density(std::vector<int>{0, 1});
  const double d10 = kde.density(std::vector<int>{1, 0});
  CHECK(d00 * d11 == doctest::Approx(d01 * d10).epsilon(1e-12));
}

TEST_CASE("kernel sampling tracks the fitted column") {
  const ConfigSpace space = one_categorical(3);
  const std::vector<std::vector<int>> samples(6, std::vector<int>{0});
  const GridKde kde = GridKde::fit(space, samples, {});

  Rng rng(99);
  int hits = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const std::vector<int> draw = kde.sample(rng, 1.0);
    REQUIRE(draw.size() == 1);
    REQUIRE(draw[0] >= 0);
    REQUIRE(draw[0] < 3);
    hits += draw[0] == 0;
  }
  // P(0) = 0.7; 4000 draws keep the frequency within ~3 sigma of that.
  CHECK(hits > n * 0.67);
  CHECK(hits < n * 0.73);

  SUBCASE("widening clamps at the kind's maximum and flattens the kernel") {
    // lambda * 10 clips to (c-1)/c = 2/3, where the categorical kernel is
    // exactly uniform.
    Rng r2(5);
    int zeros = 0;
    for (int i = 0; i < n; ++i) zeros += kde.sample(r2, 10.0)[0] == 0;
    CHECK(zeros > n * 0.30);
    CHECK(zeros < n * 0.37);
  }
}

TEST_CASE("acquisition picks where good mass dwarfs bad mass") {
  const ConfigSpace space = testutil::ordinal_space({3, 3});
  const std::vector<std::vector<int>> good_pts(8, std::vector<int>{0, 0});
  const std::vector<std::vector<int>> bad_pts(8, std::vector<int>{2, 2});
  const GridKde good = GridKde::fit(space, good_pts, {});
  const GridKde bad = GridKde::fit(space, bad_pts, {});

  Rng rng(71);
  for (int rep = 0; rep < 5; ++rep) {
    const uint64_t pick = acquisition_argmax(space, good, bad, 64, 1.0, rng);
    CHECK(pick == space.encode(std::vector<int>{0, 0}));
  }

  SUBCASE("univariate overload agrees on the same geometry") {
    const UnivariateKde ug = UnivariateKde::fit(space, good_pts, {});
    const UnivariateKde ub = UnivariateKde::fit(space, bad_pts, {});
    Rng r2(72);
    const uint64_t pick = acquisition_argmax(space, ug, ub, 64, r2);
    CHECK(pick == 0);
  }

  SUBCASE("same seed, same pick") {
    Rng a(3), b(3);
    CHECK(acquisition_argmax(space, good, bad, 16, 1.0, a) ==
          acquisition_argmax(space, good, bad, 16, 1.0, b));
  }
}

}  // TEST_SUITE
