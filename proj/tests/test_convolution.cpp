#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "kinfp/convolution.hpp"

using namespace kinfp;

namespace {

double bump1(double s) { return std::fabs(s) < 1.0 ? std::pow(1.0 - s * s, 3) : 0.0; }

double gauss(const PhasePoint& z, const PhasePoint& c, double w) {
  const double dt = z.t - c.t, dx = z.x - c.x, dv = z.v - c.v;
  return std::exp(-(dt * dt + dx * dx + dv * dv) / (2 * w * w));
}

}  // namespace

TEST_CASE("grid quadrature of the constant is the box volume") {
  GridFunction g({{"t", 0.0, 1.3, 7}, {"x", -2.0, 5.0, 11}, {"v", -1.0, 1.0, 4}}, 1.0);
  CHECK(std::fabs(g.integrate() - g.volume()) <= 1e-12 * g.volume());
  CHECK_THROWS_AS(GridFunction({{"t", 0.0, 1.0, 1}}), std::invalid_argument);
}

TEST_CASE("multilinear interpolation is exact on trilinear data") {
  auto f = [](const PhasePoint& z) { return (1 + z.t) * (2 - z.x) * (3 + 0.5 * z.v); };
  const auto g = GridFunction::sample_txv({"t", 0, 1, 4}, {"x", -1, 1, 5}, {"v", -2, 2, 6}, f);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 500; ++i) {
    const double p[3] = {u(rng), -1 + 2 * u(rng), -2 + 4 * u(rng)};
    CHECK(g.interpolate(p) == doctest::Approx(f({p[0], p[1], p[2]})).epsilon(1e-13));
  }
  const double out[3] = {1.5, 0.0, 0.0};
  CHECK_THROWS_AS(g.interpolate(out), std::out_of_range);
}

TEST_CASE("kconvolve matches a nested-loop summation oracle on small grids") {
  // f is trilinear, so multilinear sampling is exact and the oracle can use
  // the analytic f.
  auto f = [](double t, double x, double v) { return (1.5 + t) * (4.0 + x) * (5.0 + v); };
  for (int n = 3; n <= 6; ++n) {
    const GridAxis pt{"t", 0.0, 0.2, static_cast<std::size_t>(n)};
    const GridAxis px{"x", -0.1, 0.1, static_cast<std::size_t>(n)};
    const GridAxis pv{"v", -0.3, 0.3, static_cast<std::size_t>(n)};
    auto psi_fn = [](const PhasePoint& z) { return 1.0 + z.t + z.x * z.v + z.v * z.v; };
    const auto psi = GridFunction::sample_txv(pt, px, pv, psi_fn);
    const auto fg = GridFunction::sample_txv({"t", -1, 2, 5}, {"x", -3, 3, 5}, {"v", -2, 2, 5},
                                             [&](const PhasePoint& z) { return f(z.t, z.x, z.v); });
    const GridAxis ot{"t", 0.5, 1.0, static_cast<std::size_t>(n)};
    const GridAxis ox{"x", -0.5, 0.5, static_cast<std::size_t>(n)};
    const GridAxis ov{"v", -0.5, 0.5, static_cast<std::size_t>(n)};
    const auto out = kconvolve(fg, psi, ot, ox, ov);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double t = ot.node(i), x = ox.node(j), v = ov.node(k);
          double acc = 0.0;
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
              for (int c = 0; c < n; ++c) {
                const double tp = pt.node(a), xp = px.node(b), vp = pv.node(c);
                const double w = pt.weight(a) * px.weight(b) * pv.weight(c);
                acc += w * psi_fn({tp, xp, vp}) * f(t - tp, x - xp - tp * (v - vp), v - vp);
              }
          REQUIRE(std::fabs(out.at(i, j, k) - acc) <= 1e-10 * std::fabs(acc));
        }
  }
}

TEST_CASE("normalized kernel preserves constants") {
  const GridAxis pt{"t", 0.0, 0.1, 9}, px{"x", -0.05, 0.05, 9}, pv{"v", -0.2, 0.2, 9};
  auto psi = GridFunction::sample_txv(pt, px, pv, [](const PhasePoint& z) {
    return bump1(2 * (z.t - 0.05) / 0.1) * bump1(z.x / 0.05) * bump1(z.v / 0.2);
  });
  const double mass = psi.integrate();
  for (double& x : psi.values()) x /= mass;
  const GridFunction one({{"t", -1, 2, 5}, {"x", -3, 3, 5}, {"v", -2, 2, 5}}, 1.0);
  const auto out = kconvolve(one, psi, {"t", 0, 1, 4}, {"x", -1, 1, 4}, {"v", -1, 1, 4});
  for (double x : out.values()) CHECK(std::fabs(x - 1.0) <= 1e-3);
}

TEST_CASE("narrow kernel acts as an approximate identity") {
  auto f = [](const PhasePoint& z) { return std::exp(-z.x * z.x - 0.5 * z.v * z.v) * (1 + 0.3 * z.t); };
  const auto fg = GridFunction::sample_txv({"t", -1, 2, 61}, {"x", -3, 3, 121}, {"v", -3, 3, 121}, f);
  const double e = 0.02;
  auto psi = GridFunction::sample_txv({"t", 0, e * e, 5}, {"x", -e * e * e, e * e * e, 5},
                                      {"v", -e, e, 9}, [&](const PhasePoint& z) {
                                        return bump1(2 * z.t / (e * e) - 1) *
                                               bump1(z.x / (e * e * e)) * bump1(z.v / e);
                                      });
  const double mass = psi.integrate();
  for (double& x : psi.values()) x /= mass;
  const auto out = kconvolve(fg, psi, {"t", 0, 1, 3}, {"x", -1, 1, 9}, {"v", -1, 1, 9});
  double err = 0.0;
  double c[3];
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.coords(i, c);
    err = std::max(err, std::fabs(out.values()[i] - f({c[0], c[1], c[2]})));
  }
  CHECK(err <= 5e-3);
}

TEST_CASE("derivatives commute with the convolution") {
  auto f = [](const PhasePoint& z) { return gauss(z, {0.5, 0.2, -0.1}, 0.6); };
  const auto fg = GridFunction::sample_txv({"t", -1, 2, 61}, {"x", -3.5, 3.5, 141}, {"v", -3, 3, 121}, f);
  const double a = 0.2;
  auto bump = [&](const PhasePoint& z) {
    return bump1(2 * z.t / a - 1) * bump1(z.x / a) * bump1(z.v / a);
  };
  auto dbump1 = [](double s) { return std::fabs(s) < 1.0 ? -6 * s * std::pow(1 - s * s, 2) : 0.0; };
  auto bump_v = [&](const PhasePoint& z) {
    return bump1(2 * z.t / a - 1) * bump1(z.x / a) * dbump1(z.v / a) / a;
  };
  auto bump_y = [&](const PhasePoint& z) {
    const double dt = dbump1(2 * z.t / a - 1) * (2 / a) * bump1(z.x / a) * bump1(z.v / a);
    const double dx = bump1(2 * z.t / a - 1) * dbump1(z.x / a) / a * bump1(z.v / a);
    return dt + z.v * dx;
  };
  const GridAxis pt{"t", 0, a, 17}, px{"x", -a, a, 17}, pv{"v", -a, a, 17};
  const auto psi = GridFunction::sample_txv(pt, px, pv, bump);
  const auto psi_v = GridFunction::sample_txv(pt, px, pv, bump_v);
  const auto psi_y = GridFunction::sample_txv(pt, px, pv, bump_y);
  const GridAxis ot{"t", 0.4, 0.6, 21}, ox{"x", -0.5, 0.5, 21}, ov{"v", -0.5, 0.5, 21};
  const auto g = kconvolve(fg, psi, ot, ox, ov);
  const auto gv = kconvolve(fg, psi_v, ot, ox, ov);
  const auto gy = kconvolve(fg, psi_y, ot, ox, ov);
  double scale_v = 0, scale_y = 0, err_v = 0, err_y = 0;
  for (std::size_t i = 1; i + 1 < 21; ++i)
    for (std::size_t j = 1; j + 1 < 21; ++j)
      for (std::size_t k = 1; k + 1 < 21; ++k) {
        const double dv = (g.at(i, j, k + 1) - g.at(i, j, k - 1)) / (2 * ov.spacing());
        const double dt = (g.at(i + 1, j, k) - g.at(i - 1, j, k)) / (2 * ot.spacing());
        const double dx = (g.at(i, j + 1, k) - g.at(i, j - 1, k)) / (2 * ox.spacing());
        const double y = dt + ov.node(k) * dx;
        scale_v = std::max(scale_v, std::fabs(gv.at(i, j, k)));
        scale_y = std::max(scale_y, std::fabs(gy.at(i, j, k)));
        err_v = std::max(err_v, std::fabs(gv.at(i, j, k) - dv));
        err_y = std::max(err_y, std::fabs(gy.at(i, j, k) - y));
      }
  CHECK(err_v <= 2e-2 * scale_v);
  CHECK(err_y <= 2e-2 * scale_y);
}

TEST_CASE("domain check on the enlarged set") {
  const GridFunction f({{"t", 0, 1, 3}, {"x", -1, 1, 3}, {"v", -1, 1, 3}}, 1.0);
  const GridFunction psi({{"t", 0, 0.5, 3}, {"x", -0.1, 0.1, 3}, {"v", -0.1, 0.1, 3}}, 1.0);
  CHECK_THROWS_AS(kconvolve(f, psi, {"t", 0, 1, 3}, {"x", -0.2, 0.2, 3}, {"v", -0.2, 0.2, 3}),
                  DomainError);
}

namespace {

struct YoungCase {
  GridFunction f, psi;
};

YoungCase random_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  PhasePoint c[3];
  double w[3], amp[3];
  for (int i = 0; i < 3; ++i) {
    c[i] = {0.8 + 0.4 * u(rng), -0.4 + 0.8 * u(rng), -0.4 + 0.8 * u(rng)};
    w[i] = 0.1 + 0.2 * u(rng);
    amp[i] = 0.2 + u(rng);
  }
  auto f = GridFunction::sample_txv({"t", 0, 2, 21}, {"x", -2, 2, 31}, {"v", -2, 2, 31},
                                    [&](const PhasePoint& z) {
                                      double s = 0;
                                      for (int i = 0; i < 3; ++i) s += amp[i] * gauss(z, c[i], w[i]);
                                      return s;
                                    });
  const double a = 0.15 + 0.2 * u(rng), b = 0.1 + 0.2 * u(rng);
  auto psi = GridFunction::sample_txv({"t", 0, a, 7}, {"x", -b, b, 7}, {"v", -a, a, 7},
                                      [&](const PhasePoint& z) {
                                        return bump1(2 * z.t / a - 1) * bump1(z.x / b) * bump1(z.v / a);
                                      });
  return {std::move(f), std::move(psi)};
}

}  // namespace

TEST_CASE("Young: p = q = r = 1 is an equality up to quadrature") {
  const auto f = GridFunction::sample_txv({"t", 0, 2, 41}, {"x", -3, 3, 61}, {"v", -3, 3, 61},
                                          [](const PhasePoint& z) { return gauss(z, {1, 0, 0}, 0.2); });
  const double a = 0.2;
  const auto psi = GridFunction::sample_txv({"t", 0, a, 9}, {"x", -a, a, 9}, {"v", -a, a, 9},
                                            [&](const PhasePoint& z) {
                                              return bump1(2 * z.t / a - 1) * bump1(z.x / a) * bump1(z.v / a);
                                            });
  const auto res = young_check(f, psi, {"t", 0.2, 1.8, 33}, {"x", -2.2, 2.2, 45}, {"v", -2.2, 2.2, 45},
                               1, 1, 1);
  CHECK(res.pass);
  CHECK(res.lhs / res.rhs == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("Young: p = 1, q = 2, r = 2 on random bumps") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto c = random_case(100 + s);
    const auto res = young_check(c.f, c.psi, {"t", 0.5, 1.5, 11}, {"x", -1, 1, 11}, {"v", -1, 1, 11},
                                 1, 2, 2);
    CHECK(res.pass);
  }
}

TEST_CASE("Young: p = 2, q = 1, r = 2 passes on 100 seeds") {
  int passed = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto c = random_case(s);
    const auto res = young_check(c.f, c.psi, {"t", 0.5, 1.5, 9}, {"x", -1, 1, 9}, {"v", -1, 1, 9},
                                 2, 1, 2);
    passed += res.pass ? 1 : 0;
  }
  CHECK(passed == 100);
}

TEST_CASE("Young: infinite exponent and invalid triples") {
  const auto c = random_case(42);
  const double inf = std::numeric_limits<double>::infinity();
  const auto res = young_check(c.f, c.psi, {"t", 0.5, 1.5, 9}, {"x", -1, 1, 9}, {"v", -1, 1, 9},
                               2, 2, inf);
  CHECK(res.pass);
  CHECK_THROWS_AS(young_check(c.f, c.psi, {"t", 0.5, 1.5, 5}, {"x", -1, 1, 5}, {"v", -1, 1, 5}, 2, 2, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(young_check(c.f, c.psi, {"t", 0.5, 1.5, 5}, {"x", -1, 1, 5}, {"v", -1, 1, 5}, 0.5, 1, 0.5),
                  std::invalid_argument);
}
