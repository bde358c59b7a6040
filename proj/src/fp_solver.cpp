#include "kinfp/fp_solver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "kinfp/weights.hpp"

namespace kinfp {

// ---------------------------------------------------------------- coefficients

Coefficient Coefficient::constant(double a) {
  if (!(a > 0.0)) throw ConfigError("coefficient: constant must be positive");
  Coefficient c;
  c.fn = [a](double, double, double) { return a; };
  c.lower = c.upper = a;
  c.description = fmt::format("constant {}", a);
  return c;
}

Coefficient Coefficient::sin_v(double base, double amp, double freq) {
  if (!(base - std::fabs(amp) > 0.0)) throw ConfigError("coefficient: base - |amp| must be positive");
  Coefficient c;
  c.fn = [=](double, double, double v) { return base + amp * std::sin(freq * v); };
  c.lower = base - std::fabs(amp);
  c.upper = base + std::fabs(amp);
  c.description = fmt::format("{} + {} sin({} v)", base, amp, freq);
  return c;
}

Coefficient Coefficient::table_v(std::vector<double> v, std::vector<double> a) {
  if (v.size() != a.size() || v.size() < 2) throw ConfigError("coefficient: table needs matching v, a of size >= 2");
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] > v[k - 1])) throw ConfigError("coefficient: table v must increase");
  const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
  if (!(*lo > 0.0)) throw ConfigError("coefficient: table values must be positive");
  Coefficient c;
  c.lower = *lo;
  c.upper = *hi;
  c.fn = [v = std::move(v), a = std::move(a)](double, double, double vv) {
    if (vv <= v.front()) return a.front();
    if (vv >= v.back()) return a.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), vv) - v.begin()) - 1;
    const double w = (vv - v[k]) / (v[k + 1] - v[k]);
    return (1.0 - w) * a[k] + w * a[k + 1];
  };
  c.description = "table in v";
  return c;
}

double GaussianBump::operator()(double x, double v) const {
  const double p = (x - x0) / sx, q = (v - v0) / sv;
  const double r2 = p * p + q * q;
  if (r2 > cutoff * cutoff) return 0.0;
  return amplitude * std::exp(-0.5 * r2);
}

double InitialData::operator()(double x, double v) const {
  double s = custom ? custom(x, v) : 0.0;
  for (const auto& b : bumps) s += b(x, v);
  return s;
}

void SolverConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("solver: dt must be positive");
  if (!(t_end > 0.0)) throw ConfigError("solver: t_end must be positive");
  if (!(theta >= 0.5 && theta <= 1.0)) throw ConfigError("solver: theta must lie in [0.5, 1]");
  if (!(fine.length >= 0.0 && fine.dt >= 0.0)) throw ConfigError("solver: fine window must be nonnegative");
  if (fine.length > 0.0 && !(fine.dt > 0.0)) throw ConfigError("solver: fine window needs a positive dt");
  if (!a.fn) throw ConfigError("solver: coefficient missing");
  if (!(a.lower > 0.0 && a.upper >= a.lower)) throw ConfigError("solver: coefficient bounds must satisfy 0 < lower <= upper");
  if (!(clip_tol >= 0.0)) throw ConfigError("solver: clip_tol must be >= 0");
  if (mode == DomainMode::HalfSpace && x.min != 0.0) throw ConfigError("solver: half-space x axis must start at 0");
  if (!(x.max > x.min && v.max > v.min)) throw ConfigError("solver: empty box");
  for (const auto& b : f_in.bumps) {
    if (!(b.sx > 0.0 && b.sv > 0.0 && b.cutoff > 0.0)) throw ConfigError("solver: bump widths must be positive");
    if (!(b.amplitude >= 0.0)) throw ConfigError("solver: f_in must be nonnegative");
    if (!(b.x0 - b.cutoff * b.sx >= x.min && b.x0 + b.cutoff * b.sx <= x.max && b.v0 - b.cutoff * b.sv >= v.min &&
          b.v0 + b.cutoff * b.sv <= v.max))
      throw ConfigError("solver: f_in support must lie inside the box");
  }
  for (double T : output_times)
    if (!(T > 0.0 && T <= t_end)) throw ConfigError("solver: output times must lie in (0, t_end]");
  for (double R : R_list)
    if (!(R > 0.0)) throw ConfigError("solver: R values must be positive");
}

// ---------------------------------------------------------------- phase field

PhaseField::PhaseField(CellAxis x, CellAxis v)
    : x_(std::move(x)), v_(std::move(v)), data_(x_.size() * v_.size(), 0.0) {}

double PhaseField::mass() const { return power_sum(1.0); }

double PhaseField::sup() const {
  double s = 0.0;
  for (double d : data_) s = std::max(s, d);
  return s;
}

double PhaseField::power_sum(double p) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < nx(); ++i) {
    double col = 0.0;
    for (std::size_t j = 0; j < nv(); ++j) {
      const double d = data_[i * nv() + j];
      col += (p == 1.0 ? d : p == 2.0 ? d * d : std::pow(std::fabs(d), p)) * v_.width(j);
    }
    acc += col * x_.width(i);
  }
  return acc;
}

double PhaseField::weighted(std::span<const double> w) const {
  if (w.size() != data_.size()) throw std::invalid_argument("PhaseField::weighted: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < nx(); ++i) {
    double col = 0.0;
    for (std::size_t j = 0; j < nv(); ++j) col += data_[i * nv() + j] * w[i * nv() + j] * v_.width(j);
    acc += col * x_.width(i);
  }
  return acc;
}

std::vector<double> PhaseField::cell_averages(const std::function<double(double, double)>& g) const {
  static constexpr std::array<double, 3> gx = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> gw = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  std::vector<double> out(data_.size());
  for (std::size_t i = 0; i < nx(); ++i)
    for (std::size_t j = 0; j < nv(); ++j) {
      double acc = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          acc += gw[a] * gw[b] *
                 g(x_.center(i) + 0.5 * x_.width(i) * gx[a], v_.center(j) + 0.5 * v_.width(j) * gx[b]);
      out[i * nv() + j] = acc / 4.0;
    }
  return out;
}

void PhaseField::fill(const std::function<double(double, double)>& g) { data_ = cell_averages(g); }

// ---------------------------------------------------------------- transport

namespace {

// Fritsch-Butland slopes of the cumulative mass at the faces; the secant
// slopes are the cell averages themselves.
void face_slopes(std::span<const double> h, std::span<const double> dens, std::vector<double>& d) {
  const std::size_t n = dens.size();
  d.assign(n + 1, 0.0);
  if (n == 1) {
    d[0] = d[1] = dens[0];
    return;
  }
  for (std::size_t k = 1; k < n; ++k) {
    const double a = dens[k - 1], b = dens[k];
    if (a <= 0.0 || b <= 0.0) continue;
    const double w1 = 2.0 * h[k] + h[k - 1], w2 = h[k] + 2.0 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / a + w2 / b);
  }
  const auto end_slope = [](double h0, double h1, double d0, double d1) {
    double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (s <= 0.0 || d0 <= 0.0) return 0.0;
    return std::min(s, 3.0 * d0);
  };
  d[0] = end_slope(h[0], h[1], dens[0], dens[1]);
  d[n] = end_slope(h[n - 1], h[n - 2], dens[n - 1], dens[n - 2]);
}

struct RowRemap {
  std::span<const double> faces, h;
  std::span<const double> dens;
  const std::vector<double>& d;
  std::size_t k = 0;  // walking cell pointer

  // Reconstructed mass of cell c on [face_c, face_c + u h_c].
  double primitive(std::size_t c, double u) const {
    const double u2 = u * u, u3 = u2 * u;
    return dens[c] * h[c] * (3.0 * u2 - 2.0 * u3) + h[c] * (d[c] * (u3 - 2.0 * u2 + u) + d[c + 1] * (u3 - u2));
  }
  std::size_t find(double y) {
    const std::size_t n = h.size();
    while (k + 1 < n && faces[k + 1] <= y) ++k;
    while (k > 0 && faces[k] > y) --k;
    return k;
  }
  double frac(std::size_t c, double y) const { return std::clamp((y - faces[c]) / h[c], 0.0, 1.0); }
  // Reconstructed mass on [lo, hi] inside the row's range.
  double mass(double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    const std::size_t a = find(lo);
    const double ta = frac(a, lo);
    const std::size_t save = k;
    const std::size_t b = find(hi);
    const double tb = frac(b, hi);
    k = save;
    double m;
    if (a == b) {
      m = primitive(a, tb) - primitive(a, ta);
    } else {
      m = dens[a] * h[a] - primitive(a, ta);
      for (std::size_t c = a + 1; c < b; ++c) m += dens[c] * h[c];
      m += primitive(b, tb);
    }
    return std::max(m, 0.0);
  }
};

}  // namespace

TransportFlux transport_step(PhaseField& f, double dt) {
  TransportFlux flux;
  const CellAxis& xa = f.x_axis();
  const std::size_t nx = f.nx(), nv = f.nv();
  const auto faces = xa.faces();
  const auto h = xa.widths();
  const double x0 = xa.min(), xN = xa.max();
  std::vector<double> row(nx), out(nx), d;
  for (std::size_t j = 0; j < nv; ++j) {
    const double s = f.v_axis().center(j) * dt;
    if (s == 0.0) continue;
    bool any = false;
    for (std::size_t i = 0; i < nx; ++i) {
      row[i] = f(i, j);
      any = any || row[i] != 0.0;
    }
    if (!any) continue;
    face_slopes(h, row, d);
    RowRemap r{faces, h, row, d};
    for (std::size_t i = 0; i < nx; ++i) {
      const double lo = std::max(faces[i] - s, x0), hi = std::min(faces[i + 1] - s, xN);
      out[i] = r.mass(lo, hi) / h[i];
    }
    r.k = 0;
    if (s < 0.0) flux.left += r.mass(x0, std::min(x0 - s, xN)) * f.v_axis().width(j);
    r.k = nx - 1;
    if (s > 0.0) flux.right += r.mass(std::max(xN - s, x0), xN) * f.v_axis().width(j);
    for (std::size_t i = 0; i < nx; ++i) f(i, j) = out[i];
  }
  return flux;
}

std::vector<double> wall_trace(const PhaseField& f) {
  const std::size_t nx = f.nx(), nv = f.nv();
  std::vector<double> tr(nv, 0.0);
  const auto h = f.x_axis().widths();
  for (std::size_t j = 0; j < nv; ++j) {
    if (nx == 1) {
      tr[j] = f(0, j);
      continue;
    }
    const double d0 = f(0, j), d1 = f(1, j);
    double s = ((2.0 * h[0] + h[1]) * d0 - h[0] * d1) / (h[0] + h[1]);
    tr[j] = (s <= 0.0 || d0 <= 0.0) ? 0.0 : std::min(s, 3.0 * d0);
  }
  return tr;
}

// ---------------------------------------------------------------- diffusion

namespace {

// Face conductances a / (distance between the unknowns across the face);
// the end faces see the Dirichlet value at distance half a cell.
void conductances(const CellAxis& va, const Coefficient& a, double t, double x, std::vector<double>& kap) {
  const std::size_t n = va.size();
  kap.resize(n + 1);
  kap[0] = a(t, x, va.face(0)) / (va.center(0) - va.face(0));
  kap[n] = a(t, x, va.face(n)) / (va.face(n) - va.center(n - 1));
  for (std::size_t k = 1; k < n; ++k) kap[k] = a(t, x, va.face(k)) / (va.center(k) - va.center(k - 1));
}

}  // namespace

namespace {

// LU factors of the implicit matrix for one column.
struct Factored {
  std::vector<double> lower, cp, inv_m;
};

void factor(const CellAxis& va, const std::vector<double>& kap, double dt, double theta, Factored& F) {
  const std::size_t nv = va.size();
  F.lower.resize(nv);
  F.cp.resize(nv);
  F.inv_m.resize(nv);
  double prev_cp = 0.0;
  for (std::size_t j = 0; j < nv; ++j) {
    const double diag = va.width(j) + theta * dt * (kap[j] + kap[j + 1]);
    const double lo = -theta * dt * kap[j], up = -theta * dt * kap[j + 1];
    const double m = diag - (j > 0 ? lo * prev_cp : 0.0);
    // diagonally dominant M-matrix: m > 0 always
    if (!(m > 0.0)) throw NumericalError("diffusion_step: tridiagonal breakdown");
    F.lower[j] = lo;
    F.inv_m[j] = 1.0 / m;
    F.cp[j] = up / m;
    prev_cp = F.cp[j];
  }
}

}  // namespace

DiffusionStats diffusion_step(PhaseField& f, double dt, const Coefficient& a, double t, double theta,
                              double clip_tol) {
  DiffusionStats st;
  const CellAxis& va = f.v_axis();
  const std::size_t nv = f.nv();
  std::vector<double> kap, y(nv);
  Factored F;
  const bool shared = !a.depends_on_tx;
  if (shared) {
    conductances(va, a, t, 0.0, kap);
    factor(va, kap, dt, theta, F);
  }
  double scale = -1.0;
  for (std::size_t i = 0; i < f.nx(); ++i) {
    auto col = f.column(i);
    if (std::all_of(col.begin(), col.end(), [](double q) { return q == 0.0; })) continue;
    if (!shared) {
      conductances(va, a, t, f.x_axis().center(i), kap);
      factor(va, kap, dt, theta, F);
    }
    const double old0 = col[0], oldN = col[nv - 1];
    // forward sweep on the right-hand side
    double prev = 0.0;
    for (std::size_t j = 0; j < nv; ++j) {
      double r = va.width(j) * col[j];
      if (theta < 1.0) {
        const double fl = j > 0 ? col[j - 1] : 0.0, fr = j + 1 < nv ? col[j + 1] : 0.0;
        r += (1.0 - theta) * dt * (kap[j + 1] * (fr - col[j]) - kap[j] * (col[j] - fl));
      }
      prev = (r - F.lower[j] * prev) * F.inv_m[j];
      y[j] = prev;
    }
    for (std::size_t j = nv - 1; j-- > 0;) y[j] -= F.cp[j] * y[j + 1];
    const double out0 = theta * y[0] + (1.0 - theta) * old0;
    const double outN = theta * y[nv - 1] + (1.0 - theta) * oldN;
    st.wall_loss += dt * (kap[0] * out0 + kap[nv] * outN) * f.x_axis().width(i);
    for (std::size_t j = 0; j < nv; ++j) {
      double q = y[j];
      if (q < 0.0) {
        if (scale < 0.0) scale = std::max(f.sup(), std::numeric_limits<double>::min());
        if (q < -clip_tol * scale) ++st.clipped;
        q = 0.0;
      }
      col[j] = q;
    }
  }
  return st;
}

double dissipation(const PhaseField& f, const Coefficient& a, double t) {
  const CellAxis& va = f.v_axis();
  const std::size_t nv = f.nv();
  std::vector<double> kap;
  const bool shared = !a.depends_on_tx;
  if (shared) conductances(va, a, t, 0.0, kap);
  double acc = 0.0;
  for (std::size_t i = 0; i < f.nx(); ++i) {
    if (!shared) conductances(va, a, t, f.x_axis().center(i), kap);
    const auto col = f.column(i);
    double s = kap[0] * col[0] * col[0] + kap[nv] * col[nv - 1] * col[nv - 1];
    for (std::size_t k = 1; k < nv; ++k) {
      const double g = col[k] - col[k - 1];
      s += kap[k] * g * g;
    }
    acc += s * f.x_axis().width(i);
  }
  return acc;
}

// ---------------------------------------------------------------- solver

FokkerPlanckSolver::FokkerPlanckSolver(SolverConfig cfg, std::shared_ptr<const SelfSimilarProfile> profile)
    : cfg_(std::move(cfg)), profile_(std::move(profile)), f_(CellAxis(cfg_.x), CellAxis(cfg_.v)) {
  cfg_.validate();
  // coefficient must respect its declared bounds on the grid
  const CellAxis& va = f_.v_axis();
  const CellAxis& xa = f_.x_axis();
  const std::size_t stride = cfg_.a.depends_on_tx ? std::max<std::size_t>(1, xa.size() / 16) : xa.size();
  for (std::size_t i = 0; i < xa.size(); i += stride)
    for (double v : va.faces()) {
      const double q = cfg_.a(0.0, xa.center(i), v);
      if (!(q >= cfg_.a.lower * (1 - 1e-12) && q <= cfg_.a.upper * (1 + 1e-12)))
        throw ConfigError(fmt::format("solver: coefficient {} leaves its bounds at v = {}", q, v));
    }
  if (!cfg_.f_in.empty()) f_.fill([this](double x, double v) { return cfg_.f_in(x, v); });
  for (double q : f_.data())
    if (!(q >= 0.0 && std::isfinite(q))) throw ConfigError("solver: f_in must be finite and nonnegative");
  if (cfg_.mode == DomainMode::HalfSpace) {
    if (!profile_) profile_ = std::make_shared<const SelfSimilarProfile>(SelfSimilarProfile::solve());
    phi_w_ = f_.cell_averages([this](double x, double v) { return profile_->phi_adjoint(x, v); });
    for (double R : cfg_.R_list) {
      const WeightSpec w(R);
      mu_w_.push_back(f_.cell_averages([&w](double x, double v) { return eval_mu_tilde(w, x, v); }));
    }
  }
  e0_ = f_.power_sum(2.0);
  trace_ = wall_trace(f_);
  last_rate_ = rate_now();
}

double FokkerPlanckSolver::rate_now() const {
  double r = 2.0 * dissipation(f_, cfg_.a, t_);
  if (cfg_.mode == DomainMode::HalfSpace) {
    const auto tr = wall_trace(f_);
    const CellAxis& va = f_.v_axis();
    for (std::size_t j = 0; j < f_.nv(); ++j)
      if (va.center(j) < 0.0) r += -va.center(j) * tr[j] * tr[j] * va.width(j);
  }
  return r;
}

void FokkerPlanckSolver::step(double h) {
  if (!(h > 0.0)) throw std::invalid_argument("FokkerPlanckSolver::step: h must be positive");
  const auto d1 = diffusion_step(f_, 0.5 * h, cfg_.a, t_, cfg_.theta, cfg_.clip_tol);
  const auto tr = transport_step(f_, h);
  const auto d2 = diffusion_step(f_, 0.5 * h, cfg_.a, t_ + 0.5 * h, cfg_.theta, cfg_.clip_tol);
  truncation_ += d1.wall_loss + d2.wall_loss + tr.right;
  if (cfg_.mode == DomainMode::HalfSpace) outflow_ += tr.left;
  else truncation_ += tr.left;
  clipped_ += d1.clipped + d2.clipped;
  t_ += h;
  ++steps_;
  const double rate = rate_now();
  dissipated_ += 0.5 * h * (last_rate_ + rate);
  last_rate_ = rate;
}

DiagnosticsRow FokkerPlanckSolver::measure() const {
  DiagnosticsRow r;
  r.t = t_;
  r.mass = f_.mass();
  r.energy = f_.power_sum(2.0);
  r.dissipation = dissipation(f_, cfg_.a, t_);
  r.sup = f_.sup();
  if (cfg_.mode == DomainMode::HalfSpace) {
    const auto tr = wall_trace(f_);
    const CellAxis& va = f_.v_axis();
    for (std::size_t j = 0; j < f_.nv(); ++j)
      if (va.center(j) < 0.0) {
        r.boundary_f2 += -va.center(j) * tr[j] * tr[j] * va.width(j);
        r.outflux += -va.center(j) * tr[j] * va.width(j);
      }
    r.wphi = f_.weighted(phi_w_);
    for (const auto& w : mu_w_) r.wmu.push_back(f_.weighted(w));
  }
  r.energy_residual = e0_ > 0.0 ? (r.energy - e0_ + dissipated_) / e0_ : 0.0;
  r.outflow_total = outflow_;
  r.truncation_total = truncation_;
  r.clipped_total = clipped_;
  r.steps = steps_;
  return r;
}

Diagnostics FokkerPlanckSolver::run(const OutputHook& on_output) {
  Diagnostics diag;
  diag.R_list = cfg_.R_list;
  std::vector<double> times = cfg_.output_times;
  times.push_back(cfg_.t_end);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  const auto record = [&] {
    diag.rows.push_back(measure());
    if (on_output) on_output(diag.rows.back(), f_);
  };
  if (t_ == 0.0) record();
  for (double T : times) {
    if (T <= t_) continue;
    while (t_ < T) {
      double h = cfg_.dt;
      if (cfg_.fine.length > 0.0) {
        const double start = T - cfg_.fine.length;
        if (t_ >= start - 1e-12 * std::max(1.0, T)) h = cfg_.fine.dt;
        else if (t_ + h > start) h = start - t_;
      }
      if (t_ + h >= T - 1e-3 * h) h = T - t_;
      try {
        step(h);
      } catch (const NumericalError& e) {
        throw SolverAbort(fmt::format("solver: {} at t = {}", e.what(), t_), diag);
      }
      if (t_ > T - 1e-13 * std::max(1.0, T)) t_ = T;
      bool bad = false;
      for (double q : f_.data())
        if (!std::isfinite(q)) {
          bad = true;
          break;
        }
      if (bad) throw SolverAbort(fmt::format("solver: non-finite value at t = {}", t_), diag);
    }
    record();
  }
  return diag;
}

std::string Diagnostics::csv() const {
  std::string out = "t,mass,energy,dissipation,boundary_f2,outflux,supnorm,wphi";
  for (double R : R_list) out += fmt::format(",wmu_R{}", R);
  out += ",energy_residual,outflow_total,truncation_total,clipped,steps\n";
  for (const auto& r : rows) {
    out += fmt::format("{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g},{:.12g}", r.t, r.mass, r.energy,
                       r.dissipation, r.boundary_f2, r.outflux, r.sup, r.wphi);
    for (std::size_t k = 0; k < R_list.size(); ++k) out += fmt::format(",{:.12g}", k < r.wmu.size() ? r.wmu[k] : 0.0);
    out += fmt::format(",{:.12g},{:.12g},{:.12g},{},{}\n", r.energy_residual, r.outflow_total, r.truncation_total,
                       r.clipped_total, r.steps);
  }
  return out;
}

// ---------------------------------------------------------------- profiles

namespace {

// log f = c0 + c1 * p + c2 * q by least squares (centred normal equations).
std::array<double, 3> fit_two_regressors(std::span<const double> p, std::span<const double> q,
                                         std::span<const double> y) {
  const std::size_t n = y.size();
  double mp = 0, mq = 0, my = 0;
  for (std::size_t k = 0; k < n; ++k) mp += p[k], mq += q[k], my += y[k];
  mp /= n, mq /= n, my /= n;
  double spp = 0, sqq = 0, spq = 0, spy = 0, sqy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = p[k] - mp, b = q[k] - mq, c = y[k] - my;
    spp += a * a, sqq += b * b, spq += a * b, spy += a * c, sqy += b * c;
  }
  const double det = spp * sqq - spq * spq;
  if (!(std::fabs(det) > 0.0)) return {my, 0.0, 0.0};
  const double c1 = (spy * sqq - sqy * spq) / det, c2 = (sqy * spp - spy * spq) / det;
  return {my - c1 * mp - c2 * mq, c1, c2};
}

}  // namespace

ProfileTable extract_profile(const PhaseField& f, const SliceSpec& slice) {
  ProfileTable t;
  t.slice = slice;
  const CellAxis& xa = f.x_axis();
  const CellAxis& va = f.v_axis();
  if (!(slice.hi > slice.lo)) throw DomainError("extract_profile: empty fit window");
  if (slice.kind == SliceKind::AlongX || slice.kind == SliceKind::AlongInverseX) {
    const double v0 = slice.fixed;
    if (!(v0 >= va.center(0) && v0 <= va.center(va.size() - 1))) throw DomainError("extract_profile: v0 outside grid");
    if (!(slice.lo >= xa.min() && slice.hi <= xa.max())) throw DomainError("extract_profile: x window outside grid");
    if (slice.kind == SliceKind::AlongInverseX && !(v0 > 0.0 && slice.lo > 0.0))
      throw DomainError("extract_profile: inverse-x slice needs v0 > 0 and x > 0");
    const std::size_t j = va.center_bracket(v0);
    const double w = va.size() > 1 ? (v0 - va.center(j)) / (va.center(j + 1) - va.center(j)) : 0.0;
    for (std::size_t i = 0; i < xa.size(); ++i) {
      t.coord.push_back(xa.center(i));
      t.value.push_back(va.size() > 1 ? (1 - w) * f(i, j) + w * f(i, j + 1) : f(i, j));
    }
  } else {
    const double x0 = slice.fixed;
    if (!(x0 >= xa.min() && x0 <= xa.center(xa.size() - 1))) throw DomainError("extract_profile: x0 outside grid");
    if (!(slice.lo >= va.min() && slice.hi <= va.max())) throw DomainError("extract_profile: v window outside grid");
    const auto tr = wall_trace(f);
    const std::size_t i = xa.size() > 1 ? xa.center_bracket(x0) : 0;
    for (std::size_t j = 0; j < va.size(); ++j) {
      double val;
      if (x0 <= xa.center(0)) {
        const double w = (x0 - xa.min()) / (xa.center(0) - xa.min());
        val = (1 - w) * tr[j] + w * f(0, j);
      } else {
        const double w = (x0 - xa.center(i)) / (xa.center(i + 1) - xa.center(i));
        val = (1 - w) * f(i, j) + w * f(i + 1, j);
      }
      t.coord.push_back(va.center(j));
      t.value.push_back(val);
    }
  }

  std::vector<double> X, Y, L;
  for (std::size_t k = 0; k < t.coord.size(); ++k) {
    const double c = t.coord[k], y = t.value[k];
    if (c < slice.lo || c > slice.hi || !(y > 0.0)) continue;
    switch (slice.kind) {
      case SliceKind::AlongX: X.push_back(std::log(c)); break;
      case SliceKind::AlongV:
        if (c == 0.0) continue;
        X.push_back(std::log(std::fabs(c)));
        break;
      case SliceKind::AlongInverseX:
        X.push_back(-1.0 / c);
        L.push_back(std::log(c));
        break;
    }
    Y.push_back(std::log(y));
  }
  t.fit_points = Y.size();
  if (Y.size() < 3) throw DomainError("extract_profile: fewer than 3 positive samples in the window");
  t.fit = fit_line(X, Y);
  double ss = 0.0;
  for (std::size_t k = 0; k < Y.size(); ++k) {
    const double r = Y[k] - (t.fit.slope * X[k] + t.fit.intercept);
    ss += r * r;
  }
  t.fit_rms = std::sqrt(ss / static_cast<double>(Y.size()));
  for (std::size_t k = 1; k < Y.size(); ++k) t.local_slope.push_back((Y[k] - Y[k - 1]) / (X[k] - X[k - 1]));
  if (slice.kind == SliceKind::AlongInverseX) {
    const auto c = fit_two_regressors(X, L, Y);
    t.rate_with_power = c[1];
    t.power = c[2];
  }
  return t;
}

}  // namespace kinfp
