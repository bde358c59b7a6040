#include "kinfp/weights.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "kinfp/errors.hpp"
#include "kinfp/regions.hpp"

namespace kinfp {

namespace {

double raw_bump(double u) { return std::fabs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

// Gauss-Legendre, 8 nodes on [-1, 1].
constexpr double kGLx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                            -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                            0.7966664774136267,  0.9602898564975363};
constexpr double kGLw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                            0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                            0.2223810344533745, 0.1012285362903763};

template <class Fn>
double gauss8(Fn&& f, double a, double b, int pieces) {
  double acc = 0.0;
  const double w = (b - a) / pieces;
  for (int p = 0; p < pieces; ++p) {
    const double lo = a + p * w, mid = lo + 0.5 * w;
    for (int i = 0; i < 8; ++i) acc += kGLw[i] * f(mid + 0.5 * w * kGLx[i]);
  }
  return 0.5 * w * acc;
}

}  // namespace

ExpCutoff::ExpCutoff(double h, double table_step) : h_(h), step_(table_step) {
  if (!(h > 0.0 && h < 0.5)) throw std::invalid_argument("ExpCutoff: h must lie in (0, 1/2)");
  if (!(table_step > 0.0 && table_step <= h)) throw std::invalid_argument("ExpCutoff: bad table step");
  const auto n = static_cast<std::size_t>(std::llround(2.0 * h / table_step));
  step_ = 2.0 * h / static_cast<double>(n);
  M_.assign(n + 1, 0.0);
  K_.assign(n + 1, 0.0);
  norm_ = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = -h + step_ * static_cast<double>(j), b = a + step_;
    M_[j + 1] = M_[j] + gauss8([&](double y) { return raw_bump(y / h); }, a, b, 4);
    K_[j + 1] = K_[j] + gauss8([&](double y) { return raw_bump(y / h) * std::exp(y); }, a, b, 4);
  }
  norm_ = M_[n];
  for (std::size_t j = 0; j <= n; ++j) {
    M_[j] /= norm_;
    K_[j] /= norm_;
  }
  M_[n] = 1.0;
  ck_ = K_[n];
}

double ExpCutoff::kernel(double y) const { return raw_bump(y / h_) / norm_; }

double ExpCutoff::kernel_d1(double y) const {
  const double u = y / h_;
  if (std::fabs(u) >= 1.0) return 0.0;
  const double q = 1.0 - u * u;
  return kernel(y) * (-2.0 * u / (q * q)) / h_;
}

// Quintic Hermite on values, first and second derivatives, so E is C^2 across
// table nodes.
ExpCutoff::Tables ExpCutoff::tables(double y) const {
  const double pos = (y + h_) / step_;
  const auto last = static_cast<double>(M_.size() - 2);
  const auto j = static_cast<std::size_t>(std::clamp(std::floor(pos), 0.0, last));
  const double y0 = -h_ + step_ * static_cast<double>(j), y1 = y0 + step_;
  const double t = std::clamp((y - y0) / step_, 0.0, 1.0);
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5, h1 = t - 6 * t3 + 8 * t4 - 3 * t5,
               h2 = 0.5 * (t2 - 3 * t3 + 3 * t4 - t5), h3 = 10 * t3 - 15 * t4 + 6 * t5,
               h4 = -4 * t3 + 7 * t4 - 3 * t5, h5 = 0.5 * (t3 - 2 * t4 + t5);
  const double s = step_, s2 = s * s;
  const double k0 = kernel(y0), k1 = kernel(y1), dk0 = kernel_d1(y0), dk1 = kernel_d1(y1);
  const double e0 = std::exp(y0), e1 = std::exp(y1);
  const auto blend = [&](double f0, double d0, double dd0, double f1, double d1, double dd1) {
    return h0 * f0 + h1 * s * d0 + h2 * s2 * dd0 + h3 * f1 + h4 * s * d1 + h5 * s2 * dd1;
  };
  return {blend(M_[j], k0, dk0, M_[j + 1], k1, dk1),
          blend(K_[j], k0 * e0, (dk0 + k0) * e0, K_[j + 1], k1 * e1, (dk1 + k1) * e1)};
}

double ExpCutoff::operator()(double rho) const {
  const double y = rho - 1.0 - h_;
  if (y <= -h_) return 1.0;
  if (y >= h_) return ck_ * std::exp(-y);
  const Tables t = tables(y);
  return std::min(1.0, 1.0 - t.M + std::exp(-y) * t.K);
}

double ExpCutoff::d1(double rho) const {
  const double y = rho - 1.0 - h_;
  if (y <= -h_) return 0.0;
  if (y >= h_) return -ck_ * std::exp(-y);
  return -std::exp(-y) * tables(y).K;
}

double ExpCutoff::d2(double rho) const {
  const double y = rho - 1.0 - h_;
  if (y <= -h_) return 0.0;
  if (y >= h_) return ck_ * std::exp(-y);
  return std::exp(-y) * tables(y).K - kernel(y);
}

double ExpCutoff::scaled(double rho) const {
  const double y = rho - 1.0 - h_;
  if (y >= h_) return ck_ * std::exp(1.0 + h_);
  return (*this)(rho) * std::exp(rho);
}

double ExpCutoff::scaled_d1(double rho) const {
  const double y = rho - 1.0 - h_;
  if (y >= h_) return -ck_ * std::exp(1.0 + h_);
  return d1(rho) * std::exp(rho);
}

double ExpCutoff::scaled_d2(double rho) const {
  const double y = rho - 1.0 - h_;
  if (y >= h_) return ck_ * std::exp(1.0 + h_);
  return d2(rho) * std::exp(rho);
}

WeightSpec::WeightSpec(double R_, double h) : R(R_), E(h) {
  if (!(R > 0.0)) throw std::invalid_argument("WeightSpec: R must be positive");
}

double psi_step(double rho) { return smoothstep5(2.0 * rho - 1.0); }
double psi_step_d1(double rho) { return 2.0 * smoothstep5_d1(2.0 * rho - 1.0); }
double psi_step_d2(double rho) { return 4.0 * smoothstep5_d2(2.0 * rho - 1.0); }

double eval_mu_tilde(const WeightSpec& w, double x, double v) {
  if (!(x > 0.0)) throw std::invalid_argument("eval_mu_tilde: x must be positive");
  const double rb = w.rbar();
  const double c = -2.0 * v / std::sqrt(rb) - 1.0;
  const double b = -v * v * v / x;
  if (c <= 0.5 || b <= 0.5) return 0.0;
  return w.E(-rb * v / x) * psi_step(b) * psi_step(c);
}

double eval_mu(const WeightSpec& w, double x, double v) { return eval_mu_tilde(w, x, -v); }

double ScaledValue::value() const { return mantissa == 0.0 ? 0.0 : mantissa * std::exp(log_scale); }

ScaledValue mu_tilde_operator(const WeightSpec& w, double x, double v) {
  if (!(x > 0.0)) throw std::invalid_argument("mu_tilde_operator: x must be positive");
  const double rb = w.rbar();
  const double srb = std::sqrt(rb);
  const double a = -rb * v / x, b = -v * v * v / x, c = -2.0 * v / srb - 1.0;
  ScaledValue out;
  if (c <= 0.5 || b <= 0.5) return out;

  double E0, E1, E2;
  if (a > 1.0) {
    out.log_scale = -a;
    E0 = w.E.scaled(a);
    E1 = w.E.scaled_d1(a);
    E2 = w.E.scaled_d2(a);
  } else {
    E0 = w.E(a);
    E1 = w.E.d1(a);
    E2 = w.E.d2(a);
  }
  const double P0 = psi_step(b), P1 = psi_step_d1(b), P2 = psi_step_d2(b);
  const double Q0 = psi_step(c), Q1 = psi_step_d1(c), Q2 = psi_step_d2(c);

  const double a_v = -rb / x, a_x = rb * v / (x * x);
  const double b_v = -3.0 * v * v / x, b_vv = -6.0 * v / x, b_x = v * v * v / (x * x);
  const double c_v = -2.0 / srb;

  const double vv = E2 * a_v * a_v * P0 * Q0 + 2.0 * E1 * a_v * P1 * b_v * Q0 +
                    2.0 * E1 * a_v * P0 * Q1 * c_v + E0 * P2 * b_v * b_v * Q0 + E0 * P1 * b_vv * Q0 +
                    2.0 * E0 * P1 * b_v * Q1 * c_v + E0 * P0 * Q2 * c_v * c_v;
  const double transport = v * (E1 * a_x * P0 * Q0 + E0 * P1 * b_x * Q0);
  out.mantissa = vv + transport;
  return out;
}

MuCheckResult mu_inequality_check(const WeightSpec& w, const SelfSimilarProfile& profile,
                                  std::size_t sample_count, unsigned long long seed) {
  MuCheckResult res;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double rb1 = w.rbar_factor;  // Rb at unit scale
  const double sr = std::sqrt(w.R);
  const double log_R54 = 1.25 * std::log(w.R);
  for (std::size_t i = 0; i < sample_count; ++i) {
    // Half the samples where psi(-2v/sqrt(Rb) - 1) varies, half up to |v| = 3.
    const double speed = (i % 2 == 0) ? std::sqrt(rb1) * (0.75 + 0.3 * unit(rng))
                                      : std::sqrt(rb1) * 0.75 + (3.0 - std::sqrt(rb1) * 0.75) * unit(rng);
    const double x_lo = rb1 * speed / 40.0, x_hi = 2.0 * speed * speed * speed;
    const double xu = std::exp(std::log(x_lo) + (std::log(x_hi) - std::log(x_lo)) * unit(rng));
    const double x = w.R * sr * xu, v = -sr * speed;

    const double a = w.rbar() * speed * sr / x, b = speed * speed * speed * w.R * sr / x;
    const double c = 2.0 * speed * sr / std::sqrt(w.rbar()) - 1.0;
    const int bits = (a > 1.0 ? 1 : 0) | (b > 0.5 && b < 1.0 ? 2 : 0) | (c > 0.5 && c < 1.0 ? 4 : 0);
    ++res.case_counts[bits];
    ++res.samples;

    const ScaledValue lhs = mu_tilde_operator(w, x, v);
    if (!(lhs.mantissa > 0.0)) continue;
    ++res.positive;
    const double log_phi = profile.log_phi(x, -v);
    if (!std::isfinite(log_phi)) throw NumericalError("mu_inequality_check: phi~ vanished (profile corrupted)");
    const double ratio = lhs.mantissa * std::exp(lhs.log_scale + log_R54 - log_phi);
    if (ratio > res.C_best) {
      res.C_best = ratio;
      res.worst = {x, v, ratio};
    }
  }
  return res;
}

}  // namespace kinfp
