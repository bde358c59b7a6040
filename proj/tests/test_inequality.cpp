#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kinfp/errors.hpp"
#include "kinfp/inequality.hpp"

using namespace kinfp;

namespace {

GridFunction sample(const GridAxis& t, const GridAxis& x, const GridAxis& v,
                    const std::function<double(const PhasePoint&)>& fn) {
  return GridFunction::sample_txv(t, x, v, fn);
}

// Interior nodes at least two steps from the t start and the x ends.
NodeMask interior(const GridAxis& t, const GridAxis& x) {
  const double et = 1.5 * t.spacing(), ex = 1.5 * x.spacing();
  return [=](double tt, double xx, double) { return tt > t.min + et && xx > x.min + ex && xx < x.max - ex; };
}

const PhaseBox kNashSupport{0.0, 2.0, -2.0, 2.0, -2.0, 2.0};
const PhaseBox kOmega1{0.5, 1.5, -1.0, 1.0, -1.0, 1.0};
const PhaseBox kB{-0.1, 0.1, -0.1, 0.1, -0.1, 0.1};

Resolution nash_grid(std::size_t base) {
  return {GridAxis{"t", -0.4, 2.4, base + 1}, GridAxis{"x", -2.2, 2.2, 2 * base + 1},
          GridAxis{"v", -2.2, 2.2, 2 * base + 1}};
}

std::vector<double> s_values() {
  std::vector<double> s;
  for (int k = 0; k <= 40; ++k) s.push_back(0.05 * std::pow(30.0, k / 40.0));
  return s;
}

}  // namespace

TEST_CASE("Dirichlet Poisson dual norm on a line") {
  // -u'' = 1 on [-1, 1]: u = (1 - v^2) / 2 is reproduced at the nodes, so the
  // face sum is the midpoint rule for int v^2 = 2/3, i.e. 2/3 - dv^2 / 6
  const std::size_t n = 401;
  const double dv = 2.0 / (n - 1);
  std::vector<double> rhs(n, 1.0);
  CHECK(dirichlet_dual_sq(rhs, dv) == doctest::Approx(2.0 / 3.0 - dv * dv / 6.0).epsilon(1e-10));
  std::vector<double> zero(n, 0.0);
  CHECK(dirichlet_dual_sq(zero, 0.01) == 0.0);
}

TEST_CASE("g independent of (t, x) has no dual part") {
  const GridAxis t{"t", 0, 1, 11}, x{"x", 0, 1, 13}, v{"v", -3, 3, 61};
  const auto g = sample(t, x, v, [](const PhasePoint& z) { return std::exp(-z.v * z.v) * (1 + z.v); });
  H1KinOptions o;
  o.mask = interior(t, x);
  o.zero_far_field = false;
  const auto r = h1kin_seminorm(g, o);
  CHECK(r.dual_part == 0.0);
  CHECK(r.grad_part > 0.0);
  CHECK(r.total() == r.grad_part);
}

TEST_CASE("separable g against the closed form") {
  // g = a(t, x) w(v), w = cos(pi v / 2V): -W'' = w gives ||W'||^2 = (2V/pi)^2 V.
  // With a = a(t), Y g = a' w and the dual part is ||a'|| ||W'||.
  const double V = 2.0;
  const GridAxis t{"t", 0, 1, 41}, x{"x", 0, 1, 21}, v{"v", -V, V, 401};
  const auto w = [=](double vv) { return std::cos(std::numbers::pi * vv / (2 * V)); };
  const auto g = sample(t, x, v, [&](const PhasePoint& z) { return z.t * z.t * w(z.v); });
  H1KinOptions o;
  o.mask = interior(t, x);
  o.zero_far_field = false;
  const auto r = h1kin_seminorm(g, o);
  const double Wp = (2 * V / std::numbers::pi) * std::sqrt(V);
  const auto ap = sample(t, x, GridAxis{"v", 0, 1, 3}, [](const PhasePoint& z) { return 2 * z.t; });
  auto mask_tx = interior(t, x);
  // the v axis of ap has unit length
  const double ap_norm = masked_lp_norm(ap, [&](double tt, double xx, double) { return mask_tx(tt, xx, 0.0); }, 2.0);
  MESSAGE("dual " << r.dual_part << " closed form " << ap_norm * Wp);
  CHECK(r.dual_part == doctest::Approx(ap_norm * Wp).epsilon(1e-3));

  // x dependence: Y g = (a_t + v a_x) w; w even and v w odd decouple, so
  // dual^2 = ||a_t||^2 ||W1'||^2 + ||a_x||^2 ||W2'||^2 with the v-line duals
  // of w and v w computed directly on a fine line.
  const auto g2 = sample(t, x, v, [&](const PhasePoint& z) { return z.t * z.t * (1 + z.x * z.x) * w(z.v); });
  const auto r2 = h1kin_seminorm(g2, o);
  const std::size_t nf = 200001;
  std::vector<double> w1(nf), w2(nf);
  const double hf = 2 * V / (nf - 1);
  for (std::size_t k = 0; k < nf; ++k) {
    const double vv = -V + hf * k;
    w1[k] = w(vv);
    w2[k] = vv * w(vv);
  }
  const double P = dirichlet_dual_sq(w1, hf), S = dirichlet_dual_sq(w2, hf);
  CHECK(P == doctest::Approx(Wp * Wp).epsilon(1e-6));
  double at2 = 0.0, ax2 = 0.0;
  for (std::size_t n = 0; n < t.count; ++n)
    for (std::size_t i = 0; i < x.count; ++i) {
      if (!mask_tx(t.node(n), x.node(i), 0.0)) continue;
      const double tt = t.node(n), xx = x.node(i), wt = t.weight(n) * x.weight(i);
      at2 += wt * std::pow(2 * tt * (1 + xx * xx), 2);
      ax2 += wt * std::pow(tt * tt * 2 * xx, 2);
    }
  const double expect = std::sqrt(at2 * P + ax2 * S);
  MESSAGE("x-dependent dual " << r2.dual_part << " closed form " << expect);
  CHECK(r2.dual_part == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("dual part is a norm") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> z;
  H1KinOptions o;
  o.mask = [&](double tt, double, double) { return tt > 0.0; };
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction a({GridAxis{"t", 0, 1, 9}, GridAxis{"x", -1, 1, 11}, GridAxis{"v", -2, 2, 31}});
    GridFunction b = a;
    for (double& q : a.values()) q = z(rng);
    for (double& q : b.values()) q = z(rng);
    GridFunction sum = a, scaled = a;
    for (std::size_t k = 0; k < a.size(); ++k) sum.values()[k] += b.values()[k];
    const double c = z(rng);
    for (double& q : scaled.values()) q *= c;
    const double na = h1kin_seminorm(a, o).dual_part, nb = h1kin_seminorm(b, o).dual_part;
    REQUIRE(h1kin_seminorm(sum, o).dual_part <= na + nb + 1e-8);
    REQUIRE(h1kin_seminorm(scaled, o).dual_part == doctest::Approx(std::fabs(c) * na).epsilon(1e-8));
  }
}

TEST_CASE("seminorm is stable under v refinement") {
  const auto fn = [](const PhasePoint& z) {
    return std::exp(-(z.t - 1) * (z.t - 1) - z.x * z.x - z.v * z.v) * (1 + 0.3 * std::sin(z.x + z.v));
  };
  const GridAxis t{"t", 0, 2, 41}, x{"x", -3, 3, 61};
  double prev = 0.0;
  for (std::size_t nv : {81, 161}) {
    const auto g = sample(t, x, GridAxis{"v", -4, 4, nv}, fn);
    H1KinOptions o;
    o.mask = [](double tt, double, double) { return tt > 0.0; };
    const double total = h1kin_seminorm(g, o).total();
    if (prev > 0.0) CHECK(total == doctest::Approx(prev).epsilon(0.02));
    prev = total;
  }
}

TEST_CASE("masked nodes without ghost data are rejected") {
  const GridAxis t{"t", 0, 1, 5}, x{"x", 0, 1, 5}, v{"v", -1, 1, 5};
  const auto g = sample(t, x, v, [](const PhasePoint&) { return 1.0; });
  CHECK_THROWS_AS(h1kin_seminorm(g), DomainError);  // t layer 0 has no past
  H1KinOptions o;
  o.mask = [](double tt, double, double) { return tt > 0.0; };
  o.zero_far_field = false;
  CHECK_THROWS_AS(h1kin_seminorm(g, o), DomainError);  // x ends
  o.zero_far_field = true;
  CHECK_NOTHROW(h1kin_seminorm(g, o));
}

TEST_CASE("a solver solution has dual part close to its gradient part") {
  // Y f = d_v^2 f, so the truncated dual norm of Y f equals ||d_v f|| when f
  // vanishes at the v ends
  SolverConfig c;
  c.mode = DomainMode::WholeSpace;
  c.x = AxisSpec::uniform(-8, 8, 160);
  c.v = AxisSpec::uniform(-6, 6, 120);
  c.dt = 5e-3;
  c.t_end = 1.0;
  GaussianBump b;
  b.x0 = 0;
  b.sx = 0.5;
  b.sv = 0.5;
  c.f_in.bumps = {b};
  const GridAxis tg{"t", 0.2, 1.0, 41};
  for (std::size_t n = 0; n < tg.count; ++n) c.output_times.push_back(tg.node(n));
  std::vector<PhaseField> frames;
  FokkerPlanckSolver s(c);
  s.run([&](const DiagnosticsRow& r, const PhaseField& f) {
    if (r.t >= tg.min - 1e-12) frames.push_back(f);
  });
  REQUIRE(frames.size() == tg.count);
  const auto g = stack_snapshots(frames, tg, GridAxis{"x", -6, 6, 121}, GridAxis{"v", -6, 6, 121}, false);
  H1KinOptions o;
  o.mask = [&](double tt, double, double) { return tt > tg.min; };
  const auto r = h1kin_seminorm(g, o);
  MESSAGE("grad " << r.grad_part << " dual " << r.dual_part << " ratio " << r.dual_part / r.grad_part);
  CHECK(r.dual_part / r.grad_part == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("snapshot resampling reproduces bilinear data") {
  PhaseField f(CellAxis(AxisSpec::uniform(0, 2, 20)), CellAxis(AxisSpec::uniform(-1, 1, 10)));
  f.fill([](double x, double v) { return 2 + x + 3 * v; });
  std::vector<PhaseField> frames{f, f};
  const auto g = stack_snapshots(frames, GridAxis{"t", 0, 1, 2}, GridAxis{"x", 0.3, 1.7, 8}, GridAxis{"v", -0.8, 0.8, 9},
                                 true);
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 9; ++j) {
        const double x = 0.3 + 0.2 * i, v = -0.8 + 0.2 * j;
        REQUIRE(g.at(n, i, j) == doctest::Approx(2 + x + 3 * v).epsilon(1e-12));
      }
  // outside the field and at the v faces the value is 0
  const auto h = stack_snapshots(frames, GridAxis{"t", 0, 1, 2}, GridAxis{"x", 0, 3, 4}, GridAxis{"v", -1, 1, 3}, true);
  CHECK(h.at(0, 3, 1) == 0.0);
  CHECK(h.at(0, 1, 0) == 0.0);
  CHECK(h.at(0, 0, 1) == doctest::Approx(2.0).epsilon(1e-6));  // wall trace of 2 + x at v = 0
  CHECK_THROWS_AS(stack_snapshots(frames, GridAxis{"t", 0, 1, 3}, GridAxis{"x", 0, 1, 3}, GridAxis{"v", 0, 1, 3}, true),
                  DomainError);
}

TEST_CASE("Nash check: zero, U-shaped curve, containment") {
  const auto res = nash_grid(20);
  const auto s = s_values();
  const auto zero = sample_member({"zero", [](const PhasePoint&) { return 0.0; }}, res);
  const auto r0 = nash_check(zero, kOmega1, kNashSupport, kB, s);
  CHECK(r0.lhs == 0.0);
  CHECK(r0.rhs == 0.0);
  CHECK(r0.ratio == 0.0);

  const auto fam = whole_space_family(kNashSupport, 1, 0);
  const auto g = sample_member(fam[6], res);
  const auto r = nash_check(g, kOmega1, kNashSupport, kB, s);
  MESSAGE(fam[6].id << ": lhs " << r.lhs << " rhs " << r.rhs << " at s = " << r.best_parameter);
  CHECK(r.lhs > 0.0);
  CHECK(std::isfinite(r.ratio));
  CHECK(r.best_parameter > s.front());
  CHECK(r.best_parameter < s.back());
  CHECK(r.rhs_curve.front() > 10 * r.rhs);
  CHECK(r.rhs_curve.back() > r.rhs);

  const std::vector<double> too_big{2.0};
  CHECK_THROWS_AS(nash_check(g, kOmega1, kNashSupport, kB, too_big), DomainError);
  const PhaseBox outside{-1.0, 2.0, -2.0, 2.0, -2.0, 2.0};
  CHECK_THROWS_AS(nash_check(g, kOmega1, outside, kB, s), DomainError);
}

TEST_CASE("Nash constant is stable under refinement") {
  const auto fam = whole_space_family(kNashSupport, 1, 4);
  const auto s = s_values();
  std::vector<InequalityReport> coarse, fine;
  const auto res = nash_grid(20);
  for (const auto& m : fam) {
    coarse.push_back(nash_check(sample_member(m, res), kOmega1, kNashSupport, kB, s));
    coarse.back().member = m.id;
    fine.push_back(nash_check(sample_member(m, res.refined()), kOmega1, kNashSupport, kB, s));
    fine.back().member = m.id;
  }
  const auto a = summarize("nash", coarse), b = summarize("nash", fine);
  MESSAGE("C* coarse " << a.C_star << " (" << a.worst << "), fine " << b.C_star << " (" << b.worst << ")");
  REQUIRE(a.finite());
  REQUIRE(b.finite());
  CHECK(a.C_star > 0.0);
  CHECK(b.C_star == doctest::Approx(a.C_star).epsilon(0.2));
  for (const auto& m : b.members) REQUIRE(m.lhs <= b.C_star * m.rhs * (1 + 1e-12));
}

TEST_CASE("Poincare and outgoing checks") {
  const double R = 0.5, T1 = 1.5, T2 = 2.0;
  const PhaseBox sup{0.2, 3.2, 0.0, 3.0, -3.0, 3.0};
  const Resolution res{GridAxis{"t", 0.0, 3.3, 34}, GridAxis{"x", 0.0, 3.0, 31}, GridAxis{"v", -3.0, 3.0, 61}};
  const RegionMap map(res.x, res.v, R);

  const auto zero = sample_member({"zero", [](const PhasePoint&) { return 0.0; }}, res);
  CHECK(poincare_check(zero, R, T1, T2, &map).ratio == 0.0);
  CHECK(outgoing_check(zero, R, T1, T2, &map).ratio == 0.0);

  const auto fam = half_space_family(sup, 3, 8);
  std::vector<InequalityReport> pc, oc;
  for (const auto& m : fam) {
    const auto g = sample_member(m, res);
    pc.push_back(poincare_check(g, R, T1, T2, &map));
    oc.push_back(outgoing_check(g, R, T1, T2, &map));
    pc.back().member = oc.back().member = m.id;
    CHECK(pc.back().lhs > 0.0);
  }
  const auto P = summarize("poincare", pc), O = summarize("outgoing", oc);
  MESSAGE("poincare C* " << P.C_star << " (" << P.worst << "), outgoing C* " << O.C_star << " (" << O.worst << ")");
  CHECK(P.finite());
  CHECK(O.finite());
  CHECK(P.C_star > 0.0);
  CHECK(O.C_star > 0.0);

  // data on the incoming boundary, bad windows, bad times
  const auto bad = sample_member({"bad", [](const PhasePoint& z) { return std::exp(-z.x - z.v * z.v); }}, res);
  CHECK_THROWS_AS(poincare_check(bad, R, T1, T2, &map), DomainError);
  const auto g = sample_member(fam[0], res);
  CHECK_THROWS_AS(poincare_check(g, R, 1.05, T2, &map), DomainError);
  CHECK_THROWS_AS(outgoing_check(g, R, T1, 2.5, &map), DomainError);
  CHECK_THROWS_AS(poincare_check(g, R, 0.9, T2, &map), ConfigError);
}

TEST_CASE("combined check bookkeeping") {
  Diagnostics d;
  d.R_list = {1.0};
  for (int k = 0; k <= 60; ++k) {
    DiagnosticsRow r;
    r.t = 0.1 * k;
    r.energy = 2.0;
    r.dissipation = 0.5;
    r.boundary_f2 = 0.25;
    r.wphi = 3.0;
    r.wmu = {4.0};
    d.rows.push_back(r);
  }
  const auto r = combined_check(d, 1.0, 0.05, 3.0, 4.0);
  CHECK(r.lhs == doctest::Approx(2.0 * 1.0 - 0.05 * 2.0 * 3.0));
  REQUIRE(r.terms.size() == 4);
  CHECK(r.terms[0].value == doctest::Approx(1.0 / 0.05 * 4.0 * 0.5 * 4.0));
  CHECK(r.terms[1].value == doctest::Approx(0.25 * 2.0));
  CHECK(r.terms[2].value == doctest::Approx((1.0 + 1.0) * 9.0));
  CHECK(r.terms[3].value == doctest::Approx(16.0));
  CHECK(!r.mu_dominates);
  CHECK(r.ratio == doctest::Approx(r.lhs / r.rhs));

  Diagnostics z = d;
  for (auto& row : z.rows) row = DiagnosticsRow{row.t, 0, 0, 0, 0, 0, 0, 0, {0.0}};
  const auto rz = combined_check(z, 1.0, 0.05, 3.0, 4.0);
  CHECK(rz.lhs == 0.0);
  CHECK(rz.rhs == 0.0);
  CHECK(rz.ratio == 0.0);

  CHECK_THROWS_AS(combined_check(d, 2.0, 0.05, 4.5, 5.0), DomainError);  // no channel for R = 2
  CHECK_THROWS_AS(combined_check(d, 1.0, 0.05, 3.0, 5.5), DomainError);  // rows end at 6 < 6.5
  CHECK_THROWS_AS(combined_check(d, 1.0, 0.05, 1.5, 4.0), ConfigError);  // T1 <= 2R
}
