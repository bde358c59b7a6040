#include "kinfp/inequality.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "kinfp/errors.hpp"

namespace kinfp {

namespace {

struct TxvGrid {
  const GridAxis& t;
  const GridAxis& x;
  const GridAxis& v;
  std::size_t nt, nx, nv;
  std::size_t at(std::size_t n, std::size_t i, std::size_t j) const { return (n * nx + i) * nv + j; }
};

TxvGrid txv(const GridFunction& g) {
  if (g.rank() != 3 || g.axis(0).name != "t" || g.axis(1).name != "x" || g.axis(2).name != "v")
    throw DomainError("expected a (t, x, v) grid");
  for (std::size_t k = 0; k < 3; ++k)
    if (g.axis(k).count < 3) throw DomainError("need at least 3 nodes per axis");
  return {g.axis(0), g.axis(1), g.axis(2), g.axis(0).count, g.axis(1).count, g.axis(2).count};
}

double ratio_of(double lhs, double rhs) {
  if (rhs > 0.0) return lhs / rhs;
  return lhs <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

// Window test with a relative slack of one part in 1e9 of the step.
NodeMask time_window(double a, double b, double dt) {
  const double eps = 1e-9 * dt;
  return [=](double t, double, double) { return t >= a - eps && t <= b + eps; };
}

NodeMask both(NodeMask p, NodeMask q) {
  return [p = std::move(p), q = std::move(q)](double t, double x, double v) { return p(t, x, v) && q(t, x, v); };
}

void require_window(const GridAxis& t, double a, double b, const char* who) {
  const double eps = 1e-9 * t.spacing();
  if (t.min > a - t.spacing() + eps || t.max < b - eps)
    throw DomainError(fmt::format("{}: window [{}, {}] with its ghost step leaves the grid [{}, {}]", who, a, b,
                                  t.min, t.max));
}

void require_half_space(const GridFunction& g, const char* who) {
  const auto G = txv(g);
  if (G.x.min != 0.0) throw DomainError(fmt::format("{}: x axis must start at the wall x = 0", who));
}

double smooth_bump(double y) { return std::fabs(y) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - y * y)) : 0.0; }

}  // namespace

double dirichlet_dual_sq(std::span<const double> rhs, double dv) {
  const std::size_t n = rhs.size();
  if (n < 3) return 0.0;
  const std::size_t m = n - 2;
  // (2 u_j - u_{j-1} - u_{j+1}) = dv^2 rhs_j, Thomas sweep
  std::vector<double> c(m), d(m);
  const double h2 = dv * dv;
  double denom = 2.0;
  c[0] = -1.0 / denom;
  d[0] = h2 * rhs[1] / denom;
  for (std::size_t k = 1; k < m; ++k) {
    denom = 2.0 + c[k - 1];
    c[k] = -1.0 / denom;
    d[k] = (h2 * rhs[k + 1] + d[k - 1]) / denom;
  }
  std::vector<double> u(n, 0.0);
  u[m] = d[m - 1];
  for (std::size_t k = m - 1; k-- > 0;) u[k + 1] = d[k] - c[k] * u[k + 2];
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) s += (u[k + 1] - u[k]) * (u[k + 1] - u[k]);
  return s / dv;
}

H1KinResult h1kin_seminorm(const GridFunction& g, const H1KinOptions& opt) {
  const auto G = txv(g);
  const auto vals = g.values();
  const double dt = G.t.spacing(), dx = G.x.spacing(), dv = G.v.spacing();
  const auto masked = [&](std::size_t n, std::size_t i, std::size_t j) {
    return !opt.mask || opt.mask(G.t.node(n), G.x.node(i), G.v.node(j));
  };
  // value at x index i (possibly off the grid) or nothing
  const auto xval = [&](std::size_t n, long i, std::size_t j) -> std::optional<double> {
    if (i >= 0 && i < static_cast<long>(G.nx)) return vals[G.at(n, static_cast<std::size_t>(i), j)];
    if (i < 0 && opt.absorbing_wall) return 0.0;
    if (opt.zero_far_field) return 0.0;
    return std::nullopt;
  };
  const auto missing = [&](std::size_t n, std::size_t i, std::size_t j) {
    return DomainError(fmt::format("h1kin: masked node (t, x, v) = ({}, {}, {}) lacks ghost data", G.t.node(n),
                                   G.x.node(i), G.v.node(j)));
  };
  double grad2 = 0.0, dual2 = 0.0;
  std::vector<double> rhs(G.nv);
  for (std::size_t n = 0; n < G.nt; ++n) {
    for (std::size_t i = 0; i < G.nx; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < G.nv; ++j) {
        rhs[j] = 0.0;
        if (!masked(n, i, j)) continue;
        any = true;
        const double w = G.t.weight(n) * G.x.weight(i) * G.v.weight(j);
        const double gp = j + 1 < G.nv ? vals[G.at(n, i, j + 1)] : vals[G.at(n, i, j)];
        const double gm = j > 0 ? vals[G.at(n, i, j - 1)] : vals[G.at(n, i, j)];
        const double span = (j > 0 && j + 1 < G.nv) ? 2.0 * dv : dv;
        const double gv = (gp - gm) / span;
        grad2 += w * gv * gv;
        if (j == 0 || j + 1 == G.nv) continue;  // Dirichlet ends
        if (n == 0) throw missing(n, i, j);
        const double g0 = vals[G.at(n, i, j)];
        // 3 (g0 - g1) - (g1 - g2) keeps constant data exactly at zero
        const double g1 = vals[G.at(n - 1, i, j)];
        double yt = (g0 - g1) / dt;
        if (n >= 2) yt = (3.0 * (g0 - g1) - (g1 - vals[G.at(n - 2, i, j)])) / (2.0 * dt);
        const double v = G.v.node(j);
        double yx = 0.0;
        if (v != 0.0) {
          const long dir = v > 0.0 ? -1 : 1;
          const long ii = static_cast<long>(i);
          const auto p1 = xval(n, ii + dir, j);
          if (!p1) throw missing(n, i, j);
          const auto p2 = xval(n, ii + 2 * dir, j);
          const double d = p2 ? (3.0 * (g0 - *p1) - (*p1 - *p2)) / (2.0 * dx) : (g0 - *p1) / dx;
          yx = v * (v > 0.0 ? d : -d);
        }
        rhs[j] = yt + yx;
      }
      if (any) dual2 += G.t.weight(n) * G.x.weight(i) * dirichlet_dual_sq(rhs, dv);
    }
  }
  return {std::sqrt(grad2), std::sqrt(dual2)};
}

double masked_lp_norm(const GridFunction& g, const NodeMask& mask, double p) {
  const auto G = txv(g);
  const auto vals = g.values();
  double s = 0.0;
  for (std::size_t n = 0; n < G.nt; ++n)
    for (std::size_t i = 0; i < G.nx; ++i)
      for (std::size_t j = 0; j < G.nv; ++j) {
        if (mask && !mask(G.t.node(n), G.x.node(i), G.v.node(j))) continue;
        const double a = std::fabs(vals[G.at(n, i, j)]);
        if (std::isinf(p)) s = std::max(s, a);
        else s += G.t.weight(n) * G.x.weight(i) * G.v.weight(j) * std::pow(a, p);
      }
  return std::isinf(p) ? s : std::pow(s, 1.0 / p);
}

bool FamilyReport::finite() const { return std::isfinite(C_star); }

FamilyReport summarize(std::string inequality, std::vector<InequalityReport> members) {
  FamilyReport r;
  r.inequality = std::move(inequality);
  r.members = std::move(members);
  for (const auto& m : r.members)
    if (!(m.ratio <= r.C_star)) {
      r.C_star = m.ratio;
      r.worst = m.member;
    }
  return r;
}

InequalityReport nash_check(const GridFunction& g, const PhaseBox& omega1, const PhaseBox& omega2, const PhaseBox& B,
                            std::span<const double> s_list) {
  const auto G = txv(g);
  if (s_list.empty()) throw ConfigError("nash_check: empty s list");
  for (double s : s_list) {
    if (!(s > 0.0)) throw ConfigError("nash_check: s must be positive");
    if (!compose_inverse_hull(omega1, dilate_box(s, B)).inside(omega2))
      throw DomainError(fmt::format("nash_check: Omega1 o (delta_s B)^-1 leaves Omega2 at s = {}", s));
  }
  const PhaseBox grid = g.box_txv();
  if (!omega2.inside(grid) || omega2.t0 - G.t.spacing() < grid.t0 - 1e-9 * G.t.spacing())
    throw DomainError("nash_check: Omega2 and its time ghost step must lie inside the grid");
  const auto in_box = [](const PhaseBox& b) -> NodeMask {
    return [b](double t, double x, double v) { return b.contains({t, x, v}); };
  };
  InequalityReport r;
  r.inequality = "nash";
  const double l2_1 = masked_lp_norm(g, in_box(omega1), 2.0);
  r.lhs = l2_1 * l2_1;
  H1KinOptions o;
  o.mask = in_box(omega2);
  const double H = h1kin_seminorm(g, o).total();
  const double l2 = masked_lp_norm(g, in_box(omega2), 2.0);
  const double l1 = masked_lp_norm(g, in_box(omega2), 1.0);
  double best = std::numeric_limits<double>::infinity();
  for (double s : s_list) {
    const double rhs = s * H * l2 + l1 * l1 / std::pow(s, 6);
    r.parameters.push_back(s);
    r.rhs_curve.push_back(rhs);
    if (rhs < best) {
      best = rhs;
      r.best_parameter = s;
      r.terms = {{"s*H1kin*L2", s * H * l2}, {"L1^2/s^6", l1 * l1 / std::pow(s, 6)}};
    }
  }
  r.rhs = best;
  r.ratio = ratio_of(r.lhs, r.rhs);
  return r;
}

RegionMap::RegionMap(const GridAxis& x, const GridAxis& v, double R) : R_(R), nv_(v.count) {
  if (!(R > 0.0)) throw ConfigError("RegionMap: R must be positive");
  if (!(x.min >= 0.0)) throw DomainError("RegionMap: x axis must lie in x >= 0");
  const RegionScale scale(R);
  labels_.resize(x.count * v.count);
  subs_.resize(x.count * v.count);
  const double inside = 1e-9 * x.spacing();
  for (std::size_t i = 0; i < x.count; ++i)
    for (std::size_t j = 0; j < v.count; ++j) {
      const auto c = classify(std::max(x.node(i), inside), v.node(j), scale);
      labels_[i * nv_ + j] = c.region;
      subs_[i * nv_ + j] = c.sub;
    }
}

NodeMask RegionMap::mask(Region r, const GridAxis& x, const GridAxis& v) const {
  if (x.count * v.count != labels_.size()) throw DomainError("RegionMap: grid mismatch");
  return [this, r, x, v](double, double xx, double vv) {
    const auto i = static_cast<std::size_t>(std::lround((xx - x.min) / x.spacing()));
    const auto j = static_cast<std::size_t>(std::lround((vv - v.min) / v.spacing()));
    return at(std::min(i, x.count - 1), std::min(j, v.count - 1)) == r;
  };
}

namespace {

void require_incoming_zero(const GridFunction& g, const char* who) {
  const auto G = txv(g);
  const auto vals = g.values();
  const double tol = 1e-12 * std::max(1.0, g.lp_norm(std::numeric_limits<double>::infinity()));
  for (std::size_t n = 0; n < G.nt; ++n)
    for (std::size_t j = 0; j < G.nv; ++j)
      if (G.v.node(j) > 0.0 && std::fabs(vals[G.at(n, 0, j)]) > tol)
        throw DomainError(fmt::format("{}: g does not vanish on the incoming boundary at (t, v) = ({}, {})", who,
                                      G.t.node(n), G.v.node(j)));
}

void require_times(double R, double T1, double T2, const char* who) {
  if (!(R > 0.0) || !(2.0 * R < T1) || !(T1 < T2))
    throw ConfigError(fmt::format("{}: need 2R < T1 < T2 (R = {}, T1 = {}, T2 = {})", who, R, T1, T2));
}

struct PoincareParts {
  double H, l2;
};

PoincareParts h1_and_l2(const GridFunction& g, double a, double b, double c) {
  const double dt = g.axis(0).spacing();
  H1KinOptions o;
  o.mask = time_window(a, b, dt);
  o.absorbing_wall = true;
  const double H = h1kin_seminorm(g, o).total();
  return {H, masked_lp_norm(g, time_window(a, c, dt), 2.0)};
}

}  // namespace

InequalityReport poincare_check(const GridFunction& g, double R, double T1, double T2, const RegionMap* regions) {
  const char* who = "poincare_check";
  require_times(R, T1, T2, who);
  require_half_space(g, who);
  const auto G = txv(g);
  require_window(G.t, T1 - 2.0 * R, T2, who);
  require_incoming_zero(g, who);
  std::optional<RegionMap> own;
  if (!regions || regions->R() != R) regions = &own.emplace(G.x, G.v, R);
  InequalityReport r;
  r.inequality = "poincare";
  const double l2P = masked_lp_norm(g, both(time_window(T1, T2, G.t.spacing()), regions->mask(Region::P, G.x, G.v)), 2.0);
  r.lhs = l2P * l2P;
  const auto [H, l2] = h1_and_l2(g, T1 - 2.0 * R, T2, T2);
  r.terms = {{"R*H1kin^2", R * H * H}, {"sqrtR*H1kin*L2", std::sqrt(R) * H * l2}};
  r.rhs = r.terms[0].value + r.terms[1].value;
  r.best_parameter = R;
  r.ratio = ratio_of(r.lhs, r.rhs);
  return r;
}

InequalityReport outgoing_check(const GridFunction& g, double R, double T1, double T2, const RegionMap* regions) {
  const char* who = "outgoing_check";
  require_times(R, T1, T2, who);
  require_half_space(g, who);
  const auto G = txv(g);
  require_window(G.t, T1, T2 + 2.0 * R, who);
  std::optional<RegionMap> own;
  if (!regions || regions->R() != R) regions = &own.emplace(G.x, G.v, R);
  InequalityReport r;
  r.inequality = "outgoing";
  const double l2O = masked_lp_norm(g, both(time_window(T1, T2, G.t.spacing()), regions->mask(Region::O, G.x, G.v)), 2.0);
  r.lhs = l2O * l2O;
  const auto [H, l2] = h1_and_l2(g, T1, T2 + R, T2 + 2.0 * R);
  // boundary flux of g^2 through x = 0 over [T1, T2 + R]
  const auto vals = g.values();
  const auto win = time_window(T1, T2 + R, G.t.spacing());
  double bnd = 0.0;
  for (std::size_t n = 0; n < G.nt; ++n) {
    if (!win(G.t.node(n), 0.0, 0.0)) continue;
    for (std::size_t j = 0; j < G.nv; ++j) {
      const double v = G.v.node(j);
      if (v >= 0.0) continue;
      const double q = vals[G.at(n, 0, j)];
      bnd += G.t.weight(n) * G.v.weight(j) * (-v) * q * q;
    }
  }
  r.terms = {{"R*H1kin^2", R * H * H}, {"sqrtR*H1kin*L2", std::sqrt(R) * H * l2}, {"R*boundary", R * bnd}};
  r.rhs = r.terms[0].value + r.terms[1].value + r.terms[2].value;
  r.best_parameter = R;
  r.ratio = ratio_of(r.lhs, r.rhs);
  return r;
}

namespace {

// Trapezoid integral of a channel over [a, b], interpolating linearly at the ends.
double integrate_rows(const std::vector<DiagnosticsRow>& rows, double (*get)(const DiagnosticsRow&), double a,
                      double b) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const double t0 = rows[k].t, t1 = rows[k + 1].t;
    const double lo = std::max(a, t0), hi = std::min(b, t1);
    if (!(hi > lo) || !(t1 > t0)) continue;
    const auto at = [&](double t) { return get(rows[k]) + (get(rows[k + 1]) - get(rows[k])) * (t - t0) / (t1 - t0); };
    s += 0.5 * (at(lo) + at(hi)) * (hi - lo);
  }
  return s;
}

}  // namespace

InequalityReport combined_check(const Diagnostics& d, double R, double delta, double T1, double T2) {
  const char* who = "combined_check";
  require_times(R, T1, T2, who);
  if (!(delta > 0.0)) throw ConfigError("combined_check: delta must be positive");
  if (d.rows.empty() || d.rows.front().t != 0.0) throw DomainError("combined_check: diagnostics must start at t = 0");
  const double lo = T1 - 2.0 * R, hi = T2 + R;
  const double eps = 1e-9 * std::max(1.0, hi);
  if (d.rows.back().t < hi - eps)
    throw DomainError(fmt::format("combined_check: diagnostics end at t = {} before {}", d.rows.back().t, hi));
  std::size_t idx = d.R_list.size();
  for (std::size_t k = 0; k < d.R_list.size(); ++k)
    if (std::fabs(d.R_list[k] - R) <= 1e-12 * R) idx = k;
  if (idx == d.R_list.size() || d.rows.front().wmu.size() <= idx)
    throw DomainError(fmt::format("combined_check: no weighted-mass channel for R = {}", R));
  const auto E = [](const DiagnosticsRow& r) { return r.energy; };
  const auto D = [](const DiagnosticsRow& r) { return r.dissipation; };
  const auto B = [](const DiagnosticsRow& r) { return r.boundary_f2; };
  InequalityReport r;
  r.inequality = "combined";
  r.lhs = integrate_rows(d.rows, E, T1, T2) - delta * integrate_rows(d.rows, E, lo, T2);
  const double H2 = 4.0 * integrate_rows(d.rows, D, lo, hi);
  const double phi = d.rows.front().wphi, mu = d.rows.front().wmu[idx];
  const double span = T2 - T1;
  r.terms = {{"R/delta*H1kin^2", R / delta * H2},
             {"R*boundary", R * integrate_rows(d.rows, B, T1, hi)},
             {"phi_term", (std::pow(span, 4) / std::pow(R, 5.5) + std::pow(R, -1.5)) * phi * phi},
             {"mu_term", span * span / std::pow(R, 3) * mu * mu}};
  for (const auto& t : r.terms) r.rhs += t.value;
  r.mu_dominates = r.terms[3].value > r.terms[2].value;
  r.best_parameter = R;
  r.ratio = ratio_of(r.lhs, r.rhs);
  return r;
}

std::vector<FamilyMember> whole_space_family(const PhaseBox& sup, std::uint64_t seed, std::size_t random_count) {
  const double ct = 0.5 * (sup.t0 + sup.t1), cx = 0.5 * (sup.x0 + sup.x1), cv = 0.5 * (sup.v0 + sup.v1);
  const double ht = 0.5 * (sup.t1 - sup.t0), hx = 0.5 * (sup.x1 - sup.x0), hv = 0.5 * (sup.v1 - sup.v0);
  const auto envelope = [=](const PhasePoint& z) {
    return smooth_bump((z.t - ct) / ht) * smooth_bump((z.x - cx) / hx) * smooth_bump((z.v - cv) / hv);
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<FamilyMember> out;
  const double widths[4] = {0.15, 0.22, 0.3, 0.4};
  for (int c = 0; c < 5; ++c) {
    const double t0 = ct + 0.3 * ht * u(rng), x0 = cx + 0.3 * hx * u(rng), v0 = cv + 0.3 * hv * u(rng);
    for (int k = 0; k < 4; ++k) {
      const double w = widths[k];
      out.push_back({fmt::format("gauss-c{}-w{}", c, k), [=](const PhasePoint& z) {
                       const double a = (z.t - t0) / (w * ht), b = (z.x - x0) / (w * hx), q = (z.v - v0) / (w * hv);
                       return std::exp(-0.5 * (a * a + b * b + q * q)) * envelope(z);
                     }});
    }
  }
  std::uniform_int_distribution<int> mode(-2, 2);
  std::normal_distribution<double> amp;
  for (std::size_t k = 0; k < random_count; ++k) {
    struct Wave {
      double a, mt, mx, mv, phase;
    };
    std::vector<Wave> waves(6);
    for (auto& w : waves)
      w = {amp(rng), double(mode(rng)), double(mode(rng)), double(mode(rng)), std::numbers::pi * u(rng)};
    out.push_back({fmt::format("wave-{}", k), [=](const PhasePoint& z) {
                     double s = 0.0;
                     for (const auto& w : waves)
                       s += w.a * std::cos(0.5 * std::numbers::pi *
                                               (w.mt * (z.t - ct) / ht + w.mx * (z.x - cx) / hx + w.mv * (z.v - cv) / hv) +
                                           w.phase);
                     return s * envelope(z);
                   }});
  }
  return out;
}

std::vector<FamilyMember> half_space_family(const PhaseBox& sup, std::uint64_t seed, std::size_t count) {
  if (sup.x0 != 0.0) throw ConfigError("half_space_family: support must start at x = 0");
  const double ct = 0.5 * (sup.t0 + sup.t1), ht = 0.5 * (sup.t1 - sup.t0);
  const double X = sup.x1, cv = 0.5 * (sup.v0 + sup.v1), hv = 0.5 * (sup.v1 - sup.v0);
  // 1 near the wall, smooth decay to 0 at the far x end and at the v ends
  const auto far = [=](const PhasePoint& z) {
    return smoothstep5((X - z.x) / (0.4 * X)) * smooth_bump((z.v - cv) / hv) * smooth_bump((z.t - ct) / ht);
  };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<FamilyMember> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double x0 = 0.4 * X * u(rng), v0 = cv + 0.5 * hv * (2.0 * u(rng) - 1.0);
    const double sx = (0.08 + 0.2 * u(rng)) * X, sv = (0.15 + 0.3 * u(rng)) * hv;
    const double t0 = ct + 0.4 * ht * (2.0 * u(rng) - 1.0), st = (0.3 + 0.5 * u(rng)) * ht;
    const double ell = (0.05 + 0.2 * u(rng)) * X, vw = 0.1 * hv;
    const double freq = k % 2 ? 0.0 : 1.0 + 2.0 * u(rng), phase = 2.0 * std::numbers::pi * u(rng);
    out.push_back({fmt::format("{}-{}", k % 2 ? "hs-bump" : "hs-wave", k), [=](const PhasePoint& z) {
                     const double a = (z.t - t0) / st, b = (z.x - x0) / sx, q = (z.v - v0) / sv;
                     const double wall = 1.0 - std::exp(-z.x / ell) * smoothstep5((z.v + vw) / vw);
                     const double wave = 1.0 + 0.5 * std::cos(freq * (b + q - a) + phase);
                     return std::exp(-0.5 * (a * a + b * b + q * q)) * wall * wave * far(z);
                   }});
  }
  return out;
}

Resolution Resolution::refined() const {
  const auto twice = [](GridAxis a) {
    a.count = 2 * (a.count - 1) + 1;
    return a;
  };
  return {twice(t), twice(x), twice(v)};
}

GridFunction sample_member(const FamilyMember& m, const Resolution& r) {
  return GridFunction::sample_txv(r.t, r.x, r.v, m.fn);
}

GridFunction stack_snapshots(std::span<const PhaseField> frames, const GridAxis& t, const GridAxis& x,
                             const GridAxis& v, bool half_space) {
  if (frames.size() != t.count) throw DomainError("stack_snapshots: one frame per time node required");
  GridFunction out({GridAxis{"t", t.min, t.max, t.count}, GridAxis{"x", x.min, x.max, x.count},
                    GridAxis{"v", v.min, v.max, v.count}});
  auto vals = out.values();
  for (std::size_t n = 0; n < frames.size(); ++n) {
    const PhaseField& f = frames[n];
    const auto& ax = f.x_axis();
    const auto& av = f.v_axis();
    const auto trace = half_space ? wall_trace(f) : std::vector<double>(f.nv(), 0.0);
    // (index, weight) pairs along one axis; index -1 stands for the wall/face value
    struct Stencil {
      long i0, i1;
      double w0, w1;
    };
    const auto stencil = [](const CellAxis& a, double y) -> Stencil {
      if (y < a.min() || y > a.max()) return {-2, -2, 0.0, 0.0};
      if (y <= a.center(0)) {
        const double s = (y - a.min()) / (a.center(0) - a.min());
        return {-1, 0, 1.0 - s, s};
      }
      const std::size_t last = a.size() - 1;
      if (y >= a.center(last)) {
        const double s = (a.max() - y) / (a.max() - a.center(last));
        return {static_cast<long>(last), -2, s, 0.0};
      }
      const std::size_t k = a.center_bracket(y);
      const double s = (y - a.center(k)) / (a.center(k + 1) - a.center(k));
      return {static_cast<long>(k), static_cast<long>(k + 1), 1.0 - s, s};
    };
    std::vector<Stencil> sv(v.count);
    for (std::size_t j = 0; j < v.count; ++j) {
      auto s = stencil(av, v.node(j));
      if (s.i0 == -1) s.i0 = -2;  // Dirichlet face in v
      sv[j] = s;
    }
    for (std::size_t i = 0; i < x.count; ++i) {
      const auto sx = stencil(ax, x.node(i));
      const auto col = [&](long ii, const Stencil& s) {
        const auto one = [&](long jj) -> double {
          if (jj < 0) return 0.0;
          if (ii == -1) return trace[static_cast<std::size_t>(jj)];
          if (ii < 0) return 0.0;
          return f(static_cast<std::size_t>(ii), static_cast<std::size_t>(jj));
        };
        return s.w0 * one(s.i0) + s.w1 * one(s.i1);
      };
      for (std::size_t j = 0; j < v.count; ++j)
        vals[(n * x.count + i) * v.count + j] = sx.w0 * col(sx.i0, sv[j]) + sx.w1 * col(sx.i1, sv[j]);
    }
  }
  return out;
}

}  // namespace kinfp
