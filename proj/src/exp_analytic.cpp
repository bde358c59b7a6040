// group-check, phi-solve, regions, mu-check

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "experiments_internal.hpp"
#include "kinfp/convolution.hpp"
#include "kinfp/criteria.hpp"
#include "kinfp/errors.hpp"
#include "kinfp/regions.hpp"
#include "kinfp/steady_profile.hpp"
#include "kinfp/svg.hpp"
#include "kinfp/weights.hpp"

namespace kinfp::detail {

namespace {

PhasePoint draw(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  const double t = u(rng), x = u(rng), v = u(rng);
  return {t, x, v};
}

double sup_diff(const PhasePoint& a, const PhasePoint& b) {
  return std::max({std::fabs(a.t - b.t), std::fabs(a.x - b.x), std::fabs(a.v - b.v)});
}

double magnitude(const PhasePoint& a) { return std::max({std::fabs(a.t), std::fabs(a.x), std::fabs(a.v)}); }

double gauss(const PhasePoint& z, const PhasePoint& c, double w) {
  const double dt = z.t - c.t, dx = z.x - c.x, dv = z.v - c.v;
  return std::exp(-(dt * dt + dx * dx + dv * dv) / (2 * w * w));
}

double bump1(double y) { return std::fabs(y) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - y * y)) : 0.0; }

struct YoungCase {
  GridFunction f, psi;
  double p, q, r;
};

// Three Gaussians for f on [0, 2] x [-2, 2]^2, a product bump for psi, and an
// exponent triple with 1/p, 1/q, 1/r in [0, 1] and 1/r = 1/p + 1/q - 1.
YoungCase young_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PhasePoint c[3];
  double w[3], amp[3];
  for (int i = 0; i < 3; ++i) {
    const double ct = 0.8 + 0.4 * u(rng), cx = -0.4 + 0.8 * u(rng), cv = -0.4 + 0.8 * u(rng);
    c[i] = {ct, cx, cv};
    w[i] = 0.1 + 0.2 * u(rng);
    amp[i] = 0.2 + u(rng);
  }
  auto f = GridFunction::sample_txv({"t", 0, 2, 21}, {"x", -2, 2, 31}, {"v", -2, 2, 31}, [&](const PhasePoint& z) {
    double s = 0;
    for (int i = 0; i < 3; ++i) s += amp[i] * gauss(z, c[i], w[i]);
    return s;
  });
  const double a = 0.15 + 0.2 * u(rng), b = 0.1 + 0.2 * u(rng);
  auto psi = GridFunction::sample_txv({"t", 0, a, 7}, {"x", -b, b, 7}, {"v", -a, a, 7}, [&](const PhasePoint& z) {
    return bump1(2 * z.t / a - 1) * bump1(z.x / b) * bump1(z.v / a);
  });
  const double ip = u(rng);
  const double iq = 1.0 - ip + ip * u(rng);
  const double ir = std::clamp(ip + iq - 1.0, 0.0, 1.0);
  const auto inv = [](double s) { return s > 0.0 ? 1.0 / s : std::numeric_limits<double>::infinity(); };
  return {std::move(f), std::move(psi), inv(ip), inv(iq), inv(ir)};
}

}  // namespace

// ------------------------------------------------------------------ group-check

json group_defaults() {
  return {{"samples", 10000},       {"pair_samples", 1000}, {"compose_scale", 10.0}, {"distance_scale", 2.0},
          {"young_cases", 100},     {"young_nodes", 9},     {"young_eps", criteria::kYoungSlack}};
}

void run_group(Context& cx) {
  const auto& p = cx.p;
  const std::size_t n = count(p, "samples"), pairs = count(p, "pair_samples");
  const double cs = positive(p, "compose_scale"), ds = positive(p, "distance_scale");
  const std::size_t ycases = count(p, "young_cases"), ynodes = count(p, "young_nodes", 3);
  const double yeps = positive(p, "young_eps");
  const double tol = criteria::kDistTol;

  Stopwatch sw;
  std::mt19937_64 rng(cx.cfg.seed);
  double assoc = 0.0, inv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = draw(rng, cs), b = draw(rng, cs), c = draw(rng, cs);
    const double mag = 1 + magnitude(a) * (1 + magnitude(b) + magnitude(c)) + magnitude(b) * magnitude(c);
    assoc = std::max(assoc, sup_diff(compose(compose(a, b), c), compose(a, compose(b, c))) / mag);
    inv = std::max({inv, magnitude(compose(a, inverse(a))), magnitude(compose(inverse(a), a))});
  }
  double left = 0.0, sym = 0.0, dil = 0.0, search = 0.0;
  for (std::size_t i = 0; i < pairs; ++i) {
    const auto z = draw(rng, ds), z1 = draw(rng, ds), z2 = draw(rng, ds);
    const double d = kdist(z1, z2);
    left = std::max(left, std::fabs(kdist(compose(z, z1), compose(z, z2)) - d));
    sym = std::max(sym, std::fabs(kdist(z2, z1) - d));
    dil = std::max(dil, std::fabs(kdist(dilate(2.0, z1), dilate(2.0, z2)) - 2.0 * d));
    search = std::max(search, std::fabs(kdist_search(z1, z2, tol) - d));
  }
  std::size_t violations = 0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = draw(rng, ds), b = draw(rng, ds), c = draw(rng, ds);
    const double excess = kdist(a, c) - kdist(a, b) - kdist(b, c);
    worst_excess = std::max(worst_excess, excess);
    if (excess > criteria::kTriangleTols * tol) ++violations;
  }
  cx.timing("group", sw.seconds());

  cx.check("associativity", assoc <= criteria::kAssocRel, assoc,
           fmt::format("max relative defect {:.3g} over {} triples", assoc, n));
  cx.check("inverse", inv <= criteria::kInverseAbs, inv, fmt::format("max |z o z^-1| {:.3g}", inv));
  cx.check("left_invariance", left <= criteria::kLeftInvTols * tol, left,
           fmt::format("max |d(z z1, z z2) - d(z1, z2)| {:.3g} over {} pairs", left, pairs));
  cx.check("symmetry", sym <= criteria::kSymmetryTols * tol, sym, fmt::format("max asymmetry {:.3g}", sym));
  cx.check("dilation", dil <= criteria::kDilationTols * tol, dil,
           fmt::format("max |d(d2 z1, d2 z2) - 2 d(z1, z2)| {:.3g}", dil));
  cx.check("knorm_search", search <= 2.0 * tol, search,
           fmt::format("closed form vs ternary search max {:.3g}", search));
  cx.check("triangle", violations == 0, static_cast<double>(violations),
           fmt::format("{} violations beyond 3 tol over {} triples (max excess {:.3g})", violations, n, worst_excess));

  Stopwatch sy;
  std::string csv = "case,p,q,r,lhs,rhs,pass\n";
  std::size_t passed = 0;
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k < ycases; ++k) {
    const auto c = young_case(cx.cfg.seed + 1000 + k);
    const auto res = young_check(c.f, c.psi, {"t", 0.5, 1.5, ynodes}, {"x", -1, 1, ynodes}, {"v", -1, 1, ynodes}, c.p,
                                 c.q, c.r, yeps);
    passed += res.pass ? 1 : 0;
    if (res.rhs > 0) worst_ratio = std::max(worst_ratio, res.lhs / res.rhs);
    csv += fmt::format("{},{},{},{},{},{},{}\n", k, fmt_num(c.p), fmt_num(c.q), fmt_num(c.r), fmt_num(res.lhs),
                       fmt_num(res.rhs), res.pass ? 1 : 0);
  }
  cx.timing("young", sy.seconds());
  cx.check("young", passed == ycases, static_cast<double>(passed),
           fmt::format("{}/{} cases pass at eps_quad = {} (max lhs/rhs {:.4f})", passed, ycases, yeps, worst_ratio));

  cx.out.write("young_cases.csv", csv);
  cx.summary("group", {{"associativity", assoc}, {"inverse", inv}, {"left_invariance", left}, {"symmetry", sym},
                       {"dilation", dil}, {"knorm_search", search}, {"triangle_violations", violations},
                       {"triangle_max_excess", worst_excess}});
  cx.summary("young", {{"cases", ycases}, {"passed", passed}, {"max_ratio", worst_ratio}});
}

// -------------------------------------------------------------------- phi-solve

json phi_defaults() { return {{"S", 8.0}, {"n", 16000}, {"csv_stride", 20}}; }

void run_phi(Context& cx) {
  const double S = positive(cx.p, "S");
  const std::size_t n = count(cx.p, "n", 4), stride = count(cx.p, "csv_stride");
  if (S < 6.0) throw ConfigError("phi-solve: S must be at least 6");
  Stopwatch sw;
  const auto prof = SelfSimilarProfile::solve(S, n);
  const auto s = prof.s_grid();
  const auto F = prof.F_values();
  std::vector<double> ls, lF, rs, rF;
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] <= -S / 2) ls.push_back(-s[k]), lF.push_back(F[k]);
    if (s[k] >= S / 2) rs.push_back(s[k]), rF.push_back(F[k]);
  }
  const auto left = fit_exponent(ls, lF, S / 2, S, FitKind::Power);
  const auto right = fit_exponent(rs, rF, S / 2, S, FitKind::CubicRate);
  const double res = prof.ode_residual();
  cx.timing("profile", sw.seconds());

  cx.check("ode_residual", res <= criteria::kOdeResidual, res, fmt::format("relative sup residual {:.3g}", res));
  cx.check("left_exponent", std::fabs(left.slope - criteria::kLeftExponent) <= criteria::kLeftExponentTol, left.slope,
           fmt::format("slope {:.4f} of log F vs log(-s) on [-{}, -{}], rms {:.2g}", left.slope, S, S / 2, left.rms));
  cx.check("right_rate", std::fabs(right.slope / criteria::kRightRate - 1.0) <= criteria::kRightRateRel, right.slope,
           fmt::format("rate {:.5f} of -log F vs s^3 on [{}, {}] ({:+.2f}% against 1/9)", right.slope, S / 2, S,
                       100 * (right.slope * 9 - 1)));

  std::string csv = "s,F,dF\n";
  for (std::size_t k = 0; k < s.size(); k += stride)
    csv += fmt::format("{},{},{}\n", fmt_num(s[k]), fmt_num(F[k]), fmt_num(prof.F_prime()[k]));
  cx.out.write("profile.csv", csv);
  std::vector<PlotSeries> series{{"F(-s)", ls, lF, false}, {"c (-s)^(1/2)", ls, {}, false}};
  for (double u : ls) series[1].y.push_back(prof.left_tail_constant() * std::sqrt(u));
  cx.out.write("left_tail.svg", svg_line_plot({"Left tail of F", "-s", "F", true, true}, series));
  std::vector<PlotSeries> rseries{{"-log F", {}, {}, false}};
  for (std::size_t k = 0; k < rs.size(); ++k) rseries[0].x.push_back(rs[k] * rs[k] * rs[k]), rseries[0].y.push_back(-std::log(rF[k]));
  cx.out.write("right_tail.svg", svg_line_plot({"Right tail of F", "s^3", "-log F", false, false}, rseries));
  cx.summary("fits", {{"left", left.to_json()}, {"right", right.to_json()}});
  cx.summary("profile", {{"ode_residual", res}, {"derivative_jump", prof.derivative_jump()},
                         {"F_prime_0", prof.dF(0.0)}, {"left_constant", prof.left_tail_constant()},
                         {"right_constant", prof.right_tail_constant()}});
}

// ---------------------------------------------------------------------- regions

json regions_defaults() {
  return {{"R_list", {1.0, 4.0, 16.0}},
          {"members", 10000},
          {"max_draws", 2000000},
          {"unit_x_min", 1e-4},
          {"unit_x_max", 30.0},
          {"unit_v_max", 6.0},
          {"phi_constant", criteria::kPhiLowerConstant},
          {"grid", {{"R", 1.0}, {"x_max", 8.0}, {"v_max", 4.0}, {"nx", 80}, {"nv", 80}}}};
}

void run_regions(Context& cx) {
  const auto& p = cx.p;
  const auto Rs = numbers(p, "R_list", 1);
  for (double R : Rs)
    if (!(R > 0)) throw ConfigError("regions: R values must be positive");
  const std::size_t members = count(p, "members"), max_draws = count(p, "max_draws");
  const double xlo = positive(p, "unit_x_min"), xhi = positive(p, "unit_x_max"), vmax = positive(p, "unit_v_max");
  if (!(xhi > xlo)) throw ConfigError("regions: unit_x_max must exceed unit_x_min");
  const double c_phi = positive(p, "phi_constant");
  const auto& g = p.at("grid");
  const double gR = positive(g, "R"), gx = positive(g, "x_max"), gv = positive(g, "v_max");
  const std::size_t gnx = count(g, "nx", 2), gnv = count(g, "nv", 2);

  Stopwatch sw;
  const auto prof = SelfSimilarProfile::solve();
  const double rel = criteria::kRegionRelTol;
  struct Counts {
    std::size_t members = 0, violations = 0;
    double worst = -std::numeric_limits<double>::infinity();  // largest relative excess
  };
  // P literal, P proved, P velocity, Theta, N, phi lower bound
  enum { PLit, PProved, PVel, Theta, NBound, PhiLow, kBounds };
  static const char* names[kBounds] = {"P_literal", "P_proved", "P_velocity", "Theta", "N", "phi_lower"};
  std::array<Counts, kBounds> total{};
  json per_R = json::array();
  std::string viol_csv = "R,bound,x,v,excess\n";
  std::size_t viol_rows = 0;
  double phi_min_all = std::numeric_limits<double>::infinity();
  std::vector<double> phi_min_R;
  std::size_t draws_used = 0;
  for (double R : Rs) {
    std::mt19937_64 rng(cx.cfg.seed + static_cast<std::uint64_t>(1000 * R));
    std::uniform_real_distribution<double> lx(std::log(xlo), std::log(xhi)), uv(-vmax, vmax);
    const RegionScale sc(R);
    const double sR = std::sqrt(R), R32 = std::pow(R, 1.5);
    std::array<Counts, kBounds> cnt{};
    std::size_t nP = 0, nT = 0, nN = 0, nW = 0, draws = 0;
    double phi_min = std::numeric_limits<double>::infinity();
    const auto record = [&](int b, double excess, double x, double v) {
      cnt[b].worst = std::max(cnt[b].worst, excess);
      if (excess > 0.0) {
        ++cnt[b].violations;
        if (viol_rows < 2000) {
          viol_csv += fmt::format("{},{},{},{},{}\n", fmt_num(R), names[b], fmt_num(x), fmt_num(v), fmt_num(excess));
          ++viol_rows;
        }
      }
    };
    while ((nP < members || nT < members || nN < members || nW < members) && draws < max_draws) {
      ++draws;
      const double x = R32 * std::exp(lx(rng)), v = sR * uv(rng);
      const auto c = classify(x, v, sc);
      if (c.region == Region::P && nP < members) {
        ++nP;
        const double lit = R * std::max(v, 3.0 * sR), proved = 3.0 * R32 + R * std::max(v, 0.0);
        record(PLit, (x - lit) / lit - rel, x, v);
        record(PProved, (x - proved) / proved - rel, x, v);
        record(PVel, (-2.0 * sR - v) / (2.0 * sR) - rel, x, v);
      }
      // Theta_R: outside P_{R/2}, outgoing distance at most sqrt(R/10)
      if (c.d_in > std::sqrt(R / 2.0) && c.d_out <= std::sqrt(R / 10.0) && nT < members) {
        ++nT;
        const double lim = R / 4.0;
        record(Theta, (x / std::fabs(v) - lim) / lim - rel, x, v);
      }
      if (c.region == Region::N && nN < members) {
        ++nN;
        const double lim = R / 10.0 * std::fabs(v);
        record(NBound, lim > 0 ? (lim - x) / lim - rel : -1.0, x, v);
      }
      if (c.region == Region::N && x >= -v * v * v && nW < members) {
        ++nW;
        const double ratio = prof.phi_adjoint(x, v) / std::pow(R, 0.25);
        phi_min = std::min(phi_min, ratio);
        record(PhiLow, (c_phi - ratio) / c_phi, x, v);
      }
    }
    draws_used += draws;
    cnt[PLit].members = cnt[PProved].members = cnt[PVel].members = nP;
    cnt[Theta].members = nT;
    cnt[NBound].members = nN;
    cnt[PhiLow].members = nW;
    json jr = {{"R", R}, {"draws", draws}, {"phi_min_ratio", phi_min}};
    for (int b = 0; b < kBounds; ++b) {
      jr[names[b]] = {{"members", cnt[b].members}, {"violations", cnt[b].violations}, {"max_excess", cnt[b].worst}};
      total[b].members += cnt[b].members;
      total[b].violations += cnt[b].violations;
      total[b].worst = std::max(total[b].worst, cnt[b].worst);
    }
    per_R.push_back(jr);
    phi_min_all = std::min(phi_min_all, phi_min);
    phi_min_R.push_back(phi_min);
  }
  cx.timing("regions", sw.seconds());

  const std::size_t needed = members * Rs.size();
  for (int b = 0; b < kBounds; ++b) {
    const bool full = total[b].members == needed;
    cx.check(std::string("bound_") + names[b], full && total[b].violations == 0,
             static_cast<double>(total[b].violations),
             fmt::format("{} violations over {} members (max relative excess {:.3g})", total[b].violations,
                         total[b].members, total[b].worst));
  }
  cx.summary("per_R", per_R);
  cx.summary("phi_min_ratio", phi_min_all);
  cx.summary("draws", draws_used);
  cx.out.write("violations.csv", viol_csv);

  // label map on a node grid at scale gR
  const RegionScale gs(gR);
  const WeightSpec ws(gR);
  std::string csv = "x1,v1,label,sub,d_in,d_out,d_wall,mu_tilde,phi_adjoint\n";
  std::vector<double> lab(gnx * gnv);
  for (std::size_t i = 0; i < gnx; ++i)
    for (std::size_t j = 0; j < gnv; ++j) {
      const double x = gx * (i + 1.0) / gnx, v = -gv + 2.0 * gv * j / (gnv - 1);
      const auto c = classify(x, v, gs);
      const double code = c.region == Region::P ? 0 : c.region == Region::O ? 1 : c.sub == NSubregion::Isolated ? 3 : 2;
      lab[i * gnv + j] = code;
      csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", fmt_num(x), fmt_num(v), to_string(c.region), to_string(c.sub),
                         fmt_num(c.d_in), fmt_num(c.d_out), fmt_num(c.d_wall), fmt_num(eval_mu_tilde(ws, x, v)),
                         fmt_num(prof.phi_adjoint(x, v)));
    }
  cx.out.write("grid.csv", csv);
  cx.out.write("labels.svg", svg_heatmap(fmt::format("Regions at R = {} (0 P, 1 O, 2 N weighted, 3 N isolated)", gR),
                                         lab, gnx, gnv, 0.0, gx, -gv, gv));
}

// --------------------------------------------------------------------- mu-check

json mu_defaults() {
  return {{"R_list", {4.0, 16.0, 64.0}}, {"support_samples", 100000}, {"check_samples", 40000}, {"h", 0.05},
          {"isolated_samples", 20000}};
}

void run_mu(Context& cx) {
  const auto& p = cx.p;
  const auto Rs = numbers(p, "R_list", 1);
  for (double R : Rs)
    if (!(R > 0)) throw ConfigError("mu-check: R values must be positive");
  const std::size_t ns = count(p, "support_samples"), nc = count(p, "check_samples"),
                    ni = count(p, "isolated_samples");
  const double h = positive(p, "h");
  if (h >= 0.5) throw ConfigError("mu-check: h must be below 1/2");

  Stopwatch sw;
  const auto prof = SelfSimilarProfile::solve();
  std::size_t support_viol = 0, range_viol = 0, plateau_viol = 0, plateau_hits = 0, op_viol = 0, op_hits = 0;
  std::size_t zero_v = 0, zero_x = 0;
  double c_lo = std::numeric_limits<double>::infinity(), c_hi = 0.0;
  json per_R = json::array();
  for (double R : Rs) {
    const WeightSpec w(R, h);
    const RegionScale sc(R);
    const double srb = std::sqrt(w.rbar()), sR = std::sqrt(R), R32 = std::pow(R, 1.5);
    std::mt19937_64 rng(cx.cfg.seed + static_cast<std::uint64_t>(R));
    std::uniform_real_distribution<double> lx(std::log(1e-4), std::log(30.0)), uv(-6.0, 6.0);
    for (std::size_t k = 0; k < ns; ++k) {
      const double x = R32 * std::exp(lx(rng)), v = sR * uv(rng);
      const double m = eval_mu_tilde(w, x, v);
      if (!(m >= 0.0 && m <= 1.0)) ++range_viol;
      if (v > -0.5 * srb) ++zero_v, support_viol += m != 0.0;
      if (x >= 2.0 * std::fabs(v * v * v)) ++zero_x, support_viol += m != 0.0;
      if (eval_mu(w, x, -v) != m) ++support_viol;
    }
    // targeted: the isolated part of N, where mu~ = 1 and the operator vanishes
    std::uniform_real_distribution<double> li(std::log(1e-3), std::log(30.0)), vi(-6.0, 0.0);
    for (std::size_t k = 0; k < ni; ++k) {
      const double x = R32 * std::exp(li(rng)), v = sR * vi(rng);
      if (x > -v * v * v) continue;
      const auto c = classify(x, v, sc);
      if (c.region != Region::N || c.ambiguous) continue;
      ++plateau_hits;
      if (eval_mu_tilde(w, x, v) != 1.0) ++plateau_viol;
      // all three factors flat: E argument <= 1, psi arguments >= 1
      if (-w.rbar() * v / x <= 1.0 && -v * v * v / x >= 1.0 && -2.0 * v / srb - 1.0 >= 1.0) {
        ++op_hits;
        if (mu_tilde_operator(w, x, v).value() != 0.0) ++op_viol;
      }
    }
    const auto res = mu_inequality_check(w, prof, nc, cx.cfg.seed);
    c_lo = std::min(c_lo, res.C_best);
    c_hi = std::max(c_hi, res.C_best);
    json cases = json::array();
    for (auto n : res.case_counts) cases.push_back(n);
    per_R.push_back({{"R", R}, {"C_best", res.C_best}, {"worst", {res.worst.x, res.worst.v}},
                     {"positive", res.positive}, {"samples", res.samples}, {"case_counts", cases}});
  }
  cx.timing("mu", sw.seconds());
  const double spread = c_hi / c_lo - 1.0;
  cx.check("mu_support", support_viol == 0 && range_viol == 0 && zero_v > 0 && zero_x > 0,
           static_cast<double>(support_viol + range_viol),
           fmt::format("{} support and {} range violations ({} samples with v > -sqrt(Rb)/2, {} with x >= 2|v|^3)",
                       support_viol, range_viol, zero_v, zero_x));
  cx.check("mu_plateau_one", plateau_viol == 0 && plateau_hits > 0, static_cast<double>(plateau_viol),
           fmt::format("mu~ != 1 at {} of {} isolated-region samples", plateau_viol, plateau_hits));
  cx.check("mu_plateau_operator", op_viol == 0 && op_hits > 0, static_cast<double>(op_viol),
           fmt::format("operator nonzero at {} of {} plateau samples", op_viol, op_hits));
  cx.check("mu_C_best_finite", std::isfinite(c_hi) && c_lo > 0.0, c_hi,
           fmt::format("C_best in [{:.6g}, {:.6g}]", c_lo, c_hi));
  cx.check("mu_C_best_stable", spread <= criteria::kCBestSpread, spread,
           fmt::format("max/min - 1 = {:.3g} across R", spread));
  cx.summary("per_R", per_R);
  cx.out.write_json("mu_check.json", per_R);
}

}  // namespace kinfp::detail
