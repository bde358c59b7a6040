#include "kinfp/steady_profile.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "kinfp/errors.hpp"

namespace kinfp {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

namespace {

struct State {
  double F, dF;
};

State rhs(double s, State y) { return {y.dF, (s / 6.0) * y.F - (s * s / 3.0) * y.dF}; }

State rk4(double s, State y, double h) {
  const State k1 = rhs(s, y);
  const State k2 = rhs(s + 0.5 * h, {y.F + 0.5 * h * k1.F, y.dF + 0.5 * h * k1.dF});
  const State k3 = rhs(s + 0.5 * h, {y.F + 0.5 * h * k2.F, y.dF + 0.5 * h * k2.dF});
  const State k4 = rhs(s + h, {y.F + h * k3.F, y.dF + h * k3.dF});
  return {y.F + h / 6.0 * (k1.F + 2 * k2.F + 2 * k3.F + k4.F),
          y.dF + h / 6.0 * (k1.dF + 2 * k2.dF + 2 * k3.dF + k4.dF)};
}

}  // namespace

SelfSimilarProfile SelfSimilarProfile::solve(double S, std::size_t n) {
  if (!(S >= 6.0)) throw std::invalid_argument("solve_profile: S must be >= 6");
  if (static_cast<double>(n) < 4.0 * S / 0.01)
    throw std::invalid_argument("solve_profile: n must be >= 4 S / 0.01");
  if (n % 2) ++n;

  SelfSimilarProfile p;
  p.S_ = S;
  p.h_ = 2.0 * S / static_cast<double>(n);
  p.s_.resize(n + 1);
  p.F_.resize(n + 1);
  p.dF_.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) p.s_[i] = -S + p.h_ * static_cast<double>(i);
  p.s_[n / 2] = 0.0;
  p.s_[n] = S;
  const std::size_t mid = n / 2;

  // Right branch: WKB seed at s = S, integrate towards 0.
  const double seed = std::pow(S, -2.5) * std::exp(-S * S * S / 9.0);
  if (!(seed > DBL_MIN * 1e20)) throw NumericalError("solve_profile: seed underflows for this S");
  State y{seed, (-S * S / 3.0 - 2.5 / S) * seed};
  p.F_[n] = y.F;
  p.dF_[n] = y.dF;
  for (std::size_t i = n; i > mid; --i) {
    y = rk4(p.s_[i], y, p.s_[i - 1] - p.s_[i]);
    p.F_[i - 1] = y.F;
    p.dF_[i - 1] = y.dF;
  }
  const double right0_F = y.F, right0_dF = y.dF;

  // Left branch: power-mode seed at s = -S, integrate towards 0.
  const double u = S;
  y = {std::sqrt(u) + 0.25 * std::pow(u, -2.5), -(0.5 / std::sqrt(u) - 0.625 * std::pow(u, -3.5))};
  p.F_[0] = y.F;
  p.dF_[0] = y.dF;
  for (std::size_t i = 0; i < mid; ++i) {
    y = rk4(p.s_[i], y, p.s_[i + 1] - p.s_[i]);
    p.F_[i + 1] = y.F;
    p.dF_[i + 1] = y.dF;
  }
  const double left0_F = y.F, left0_dF = y.dF;

  if (!std::isfinite(right0_F) || !(right0_F > 0.0) || !std::isfinite(left0_F) || !(left0_F > 0.0))
    throw NumericalError("solve_profile: branch value at s = 0 is not positive and finite");

  for (std::size_t i = 0; i < mid; ++i) {
    p.F_[i] /= left0_F;
    p.dF_[i] /= left0_F;
  }
  for (std::size_t i = mid + 1; i <= n; ++i) {
    p.F_[i] /= right0_F;
    p.dF_[i] /= right0_F;
  }
  const double dl = left0_dF / left0_F, dr = right0_dF / right0_F;
  p.F_[mid] = 1.0;
  p.dF_[mid] = 0.5 * (dl + dr);
  p.derivative_jump_ = dr - dl;

  for (std::size_t i = 0; i <= n; ++i)
    if (!(p.F_[i] > 0.0) || !std::isfinite(p.F_[i]))
      throw NumericalError(fmt::format("solve_profile: F not positive at s = {}", p.s_[i]));
  for (std::size_t i = 0; i < n; ++i)
    if (p.s_[i] > 2.0 && !(p.F_[i + 1] < p.F_[i]))
      throw NumericalError(fmt::format("solve_profile: F not decreasing at s = {} (step too coarse)", p.s_[i]));

  p.c_left_ = p.F_[0] / (std::sqrt(S) * (1.0 + 0.25 / (S * S * S)));
  p.a_right_ = p.F_[n] / seed;
  return p;
}

std::size_t SelfSimilarProfile::locate(double s) const {
  const double pos = (s + S_) / h_;
  const auto last = static_cast<double>(s_.size() - 2);
  return static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, last));
}

double SelfSimilarProfile::F(double s) const {
  if (s < -S_) {
    const double u = -s;
    return c_left_ * std::sqrt(u) * (1.0 + 0.25 / (u * u * u));
  }
  if (s > S_) return a_right_ * std::exp(-s * s * s / 9.0 - 2.5 * std::log(s));
  const std::size_t i = locate(s);
  const double h = s_[i + 1] - s_[i];
  const double t = (s - s_[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * F_[i] + (t3 - 2 * t2 + t) * h * dF_[i] + (-2 * t3 + 3 * t2) * F_[i + 1] +
         (t3 - t2) * h * dF_[i + 1];
}

double SelfSimilarProfile::dF(double s) const {
  if (s < -S_) {
    const double u = -s;
    return -c_left_ * (0.5 / std::sqrt(u) - 0.625 * std::pow(u, -3.5));
  }
  if (s > S_) return F(s) * (-s * s / 3.0 - 2.5 / s);
  const std::size_t i = locate(s);
  const double h = s_[i + 1] - s_[i];
  const double t = (s - s_[i]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * F_[i] + (-6 * t2 + 6 * t) * F_[i + 1]) / h +
         (3 * t2 - 4 * t + 1) * dF_[i] + (3 * t2 - 2 * t) * dF_[i + 1];
}

double SelfSimilarProfile::log_F(double s) const {
  if (s > S_) return std::log(a_right_) - s * s * s / 9.0 - 2.5 * std::log(s);
  return std::log(F(s));
}

double SelfSimilarProfile::log_phi(double x, double v) const {
  if (!(x > 0.0)) throw std::invalid_argument("log_phi: x must be positive");
  return std::log(x) / 6.0 + log_F(v / std::cbrt(x));
}

double SelfSimilarProfile::phi(double x, double v) const {
  if (!(x > 0.0)) throw std::invalid_argument("phi: x must be positive");
  return std::pow(x, 1.0 / 6.0) * F(v / std::cbrt(x));
}

double SelfSimilarProfile::phi_x(double x, double v) const {
  if (!(x > 0.0)) throw std::invalid_argument("phi_x: x must be positive");
  const double s = v / std::cbrt(x);
  return std::pow(x, -5.0 / 6.0) * (F(s) / 6.0 - s * dF(s) / 3.0);
}

double SelfSimilarProfile::phi_v(double x, double v) const {
  if (!(x > 0.0)) throw std::invalid_argument("phi_v: x must be positive");
  return std::pow(x, -1.0 / 6.0) * dF(v / std::cbrt(x));
}

double SelfSimilarProfile::phi_vv(double x, double v) const {
  if (!(x > 0.0)) throw std::invalid_argument("phi_vv: x must be positive");
  return std::pow(x, -0.5) * d2F(v / std::cbrt(x));
}

LineFit SelfSimilarProfile::left_power_fit() const {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < s_.size(); ++i)
    if (s_[i] <= -0.5 * S_) {
      lx.push_back(std::log(-s_[i]));
      ly.push_back(std::log(F_[i]));
    }
  return fit_line(lx, ly);
}

LineFit SelfSimilarProfile::right_rate_fit() const {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < s_.size(); ++i)
    if (s_[i] >= 0.5 * S_) {
      lx.push_back(s_[i] * s_[i] * s_[i]);
      ly.push_back(-std::log(F_[i]));
    }
  return fit_line(lx, ly);
}

double SelfSimilarProfile::ode_residual() const {
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 1; i + 1 < s_.size(); ++i) {
    const double s = s_[i];
    if (std::fabs(s) > 2.0 * S_ / 3.0) continue;
    const double d2 = (F_[i + 1] - 2 * F_[i] + F_[i - 1]) / (h_ * h_);
    const double a = s * s / 3.0 * dF_[i], b = s / 6.0 * F_[i];
    worst = std::max(worst, std::fabs(d2 + a - b));
    scale = std::max(scale, std::fabs(d2) + std::fabs(a) + std::fabs(b));
  }
  return worst / scale;
}

void SelfSimilarProfile::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "s,F,F_prime\n";
  for (std::size_t i = 0; i < s_.size(); ++i) out << fmt::format("{:.17g},{:.17g},{:.17g}\n", s_[i], F_[i], dF_[i]);
}

}  // namespace kinfp
