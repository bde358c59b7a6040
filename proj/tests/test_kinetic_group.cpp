#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "kinfp/kinetic_group.hpp"

using namespace kinfp;

namespace {

// Two-level dense grid over w: step 1e-4 on a bracket, then step 1e-8 around
// the best coarse node. Independent of both library code paths.
double knorm_grid(const PhasePoint& z) {
  auto obj = [&](double w) {
    return std::max({std::sqrt(std::fabs(z.t)), std::cbrt(std::fabs(z.x - z.t * w)),
                     std::fabs(z.v - w), std::fabs(w)});
  };
  const double bound = std::max(4.0, obj(0.0));
  double best_w = 0.0, best = obj(0.0);
  for (double w = -bound; w <= bound; w += 1e-4) {
    const double o = obj(w);
    if (o < best) best = o, best_w = w;
  }
  const double c = best_w;
  for (int k = -20000; k <= 20000; ++k) {
    const double o = obj(c + 1e-8 * k);
    if (o < best) best = o;
  }
  return best;
}

PhasePoint random_point(std::mt19937_64& rng, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

double sup_diff(const PhasePoint& a, const PhasePoint& b) {
  return std::max({std::fabs(a.t - b.t), std::fabs(a.x - b.x), std::fabs(a.v - b.v)});
}

double magnitude(const PhasePoint& a) {
  return std::max({std::fabs(a.t), std::fabs(a.x), std::fabs(a.v)});
}

}  // namespace

TEST_CASE("compose follows the group law") {
  CHECK(compose({1, 2, 3}, {1, 0, 0}) == PhasePoint{2, 5, 3});
  const PhasePoint z{0.3, -1.2, 2.5};
  CHECK(compose(z, {0, 0, 0}) == z);
  CHECK(compose({0, 0, 0}, z) == z);
  const PhasePoint one{1, 1, 1};
  CHECK(compose(compose(one, one), one) == compose(one, compose(one, one)));
}

TEST_CASE("inverse") {
  CHECK(inverse({1, 2, 3}) == PhasePoint{-1, 1, -3});
  CHECK(inverse({0, 1.5, -2}) == PhasePoint{0, -1.5, 2});
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto z = random_point(rng);
    CHECK(sup_diff(inverse(inverse(z)), z) <= 1e-15 * (1 + magnitude(z)));
    CHECK(sup_diff(compose(z, inverse(z)), {}) <= 1e-13);
    CHECK(sup_diff(compose(inverse(z), z), {}) <= 1e-13);
  }
}

TEST_CASE("dilate") {
  CHECK(dilate(2.0, {1, 1, 1}) == PhasePoint{4, 8, 2});
  const PhasePoint z{0.7, -0.2, 1.1};
  CHECK(dilate(1.0, z) == z);
  CHECK(sup_diff(dilate(0.5, dilate(2.0, z)), z) <= 1e-15);
  CHECK(sup_diff(dilate(3.0, dilate(0.25, z)), dilate(0.75, z)) <= 1e-15);
  CHECK_THROWS_AS(dilate(0.0, z), std::invalid_argument);
  CHECK_THROWS_AS(dilate(-1.0, z), std::invalid_argument);
}

TEST_CASE("dimension checks for the full group law") {
  PhasePointNd a{1.0, {1.0, 2.0}, {3.0, 4.0}};
  PhasePointNd b{2.0, {0.0, 1.0}, {1.0, -1.0}};
  const auto c = compose(a, b);
  CHECK(c.t == 3.0);
  CHECK(c.x[0] == 1.0 + 0.0 + 2.0 * 3.0);
  CHECK(c.x[1] == 2.0 + 1.0 + 2.0 * 4.0);
  CHECK(c.v[1] == 3.0);
  const auto e = compose(a, inverse(a));
  for (double x : e.x) CHECK(x == 0.0);
  PhasePointNd bad{1.0, {1.0}, {1.0, 2.0}};
  CHECK_THROWS_AS(compose(a, bad), std::invalid_argument);
  PhasePointNd other{1.0, {1.0}, {1.0}};
  CHECK_THROWS_AS(compose(a, other), std::invalid_argument);
  CHECK_THROWS_AS(dilate(-2.0, a), std::invalid_argument);
}

TEST_CASE("associativity over random triples") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_point(rng, 10.0), b = random_point(rng, 10.0), c = random_point(rng, 10.0);
    const double mag = 1 + magnitude(a) * (1 + magnitude(b) + magnitude(c)) + magnitude(b) * magnitude(c);
    REQUIRE(sup_diff(compose(compose(a, b), c), compose(a, compose(b, c))) <= 1e-12 * mag);
  }
}

TEST_CASE("knorm fixed values") {
  CHECK(knorm({0, 8, 0}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(knorm({4, 0, 0}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(knorm_search({0, 8, 0}) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(knorm_search({4, 0, 0}) == doctest::Approx(2.0).epsilon(1e-8));
  const double oracle = knorm_grid({1, 1, 1});
  CHECK(std::fabs(knorm({1, 1, 1}) - oracle) <= 2e-8);
  CHECK(std::fabs(knorm_search({1, 1, 1}, 1e-8) - oracle) <= 2e-8);
}

TEST_CASE("closed form, ternary search and grid oracle agree") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto z = random_point(rng);
    const double o = knorm_grid(z);
    REQUIRE(std::fabs(knorm(z) - o) <= 2e-8);
    REQUIRE(std::fabs(knorm_search(z, 1e-8) - o) <= 2e-8);
  }
  for (int i = 0; i < 10000; ++i) {
    const auto z = random_point(rng, 50.0);
    REQUIRE(std::fabs(knorm(z) - knorm_search(z, 1e-8)) <= 2e-8 * (1 + knorm(z)));
  }
}

TEST_CASE("cubic level root") {
  for (double a : {0.0, 1e-8, 0.5, 3.0, 1e6})
    for (double y : {0.0, 1e-12, 0.3, 7.0, 1e9}) {
      const double r = cubic_level(a, y);
      CHECK(r >= 0.0);
      CHECK(std::fabs(r * r * r + a * r - y) <= 1e-13 * (y + 1e-300) + 1e-300);
    }
}

TEST_CASE("knorm_search reports an unreachable tolerance") {
  CHECK_THROWS_AS(knorm_search({1, 1, 1}, 1e-300, 200), ConvergenceError);
  CHECK_THROWS_AS(knorm_search({1, 1, 1}, 0.0), std::invalid_argument);
}

TEST_CASE("kdist identities") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto z = random_point(rng), z1 = random_point(rng), z2 = random_point(rng);
    CHECK(kdist(z1, z1) <= 1e-12);
    CHECK(std::fabs(kdist(compose(z, z1), compose(z, z2)) - kdist(z1, z2)) <= 1e-7);
    CHECK(std::fabs(kdist(z1, z2) - kdist(z2, z1)) <= 2e-8 * (1 + kdist(z1, z2)));
  }
}

TEST_CASE("kdist dilation covariance against the grid oracle") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100; ++i) {
    const auto z1 = random_point(rng), z2 = random_point(rng);
    const double oracle = knorm_grid(compose(inverse(z2), z1));
    REQUIRE(std::fabs(kdist(dilate(2.0, z1), dilate(2.0, z2)) - 2.0 * oracle) <= 4e-8);
    REQUIRE(std::fabs(kdist_search(dilate(2.0, z1), dilate(2.0, z2)) - 2.0 * oracle) <= 4e-8 * 2);
  }
}

TEST_CASE("triangle inequality") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 10000; ++i) {
    const auto a = random_point(rng), b = random_point(rng), c = random_point(rng);
    REQUIRE(kdist(a, c) <= kdist(a, b) + kdist(b, c) + 3e-8);
  }
}

TEST_CASE("kinetic cylinder membership") {
  const KineticCylinder q({1.0, 0.0, 0.0}, 0.5);
  CHECK(q.contains({1.0, 0.0, 0.0}));
  CHECK(q.contains({0.9, 0.0, 0.1}));
  CHECK_FALSE(q.contains({1.01, 0.0, 0.0}));
  CHECK_FALSE(q.contains({0.0, 0.0, 0.0}));
  CHECK_THROWS_AS(KineticCylinder({0, 0, 0}, 0.0), std::invalid_argument);
  std::mt19937_64 rng(17);
  for (int i = 0; i < 1000; ++i) {
    const auto z = random_point(rng, 1.0);
    CHECK(q.contains(z) == (z.t <= 1.0 && kdist(z, q.center) <= 0.5));
  }
}

TEST_CASE("box hull of A o B^-1 contains sampled products") {
  const PhaseBox a{0.5, 1.0, -1.0, 1.0, -2.0, 0.5};
  const PhaseBox b{-0.1, 0.2, -0.05, 0.05, -0.3, 0.3};
  const PhaseBox h = compose_inverse_hull(a, b);
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const PhasePoint za{a.t0 + (a.t1 - a.t0) * u(rng), a.x0 + (a.x1 - a.x0) * u(rng),
                        a.v0 + (a.v1 - a.v0) * u(rng)};
    const PhasePoint zb{b.t0 + (b.t1 - b.t0) * u(rng), b.x0 + (b.x1 - b.x0) * u(rng),
                        b.v0 + (b.v1 - b.v0) * u(rng)};
    REQUIRE(h.contains(compose(za, inverse(zb))));
  }
}
