#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace kinfp {

// Least-squares line y = slope * x + intercept.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Steady solution of v d_x phi = d_v^2 phi on {x > 0}, vanishing on the
// incoming boundary {x = 0, v > 0}, in the self-similar form
//   phi(x, v) = x^{1/6} F(v x^{-1/3}),
// where F solves F'' + (s^2/3) F' - (s/6) F = 0, F(0) = 1.
//
// At s -> +inf the admissible mode is s^{-5/2} e^{-s^3/9}; at s -> -inf it is
// (-s)^{1/2} (1 + (-s)^{-3}/4 + ...). Each side is integrated with RK4 from
// its far end towards s = 0, the direction in which the unwanted mode decays,
// and the two branches are scaled to F(0) = 1. The jump in F' at 0 is kept as
// a consistency diagnostic (it vanishes for the exact exponent 1/6).
class SelfSimilarProfile {
 public:
  // Requires S >= 6 and n >= 4 S / 0.01; n is rounded up to even so that
  // s = 0 is a node.
  static SelfSimilarProfile solve(double S = 8.0, std::size_t n = 16000);

  double half_width() const { return S_; }
  std::span<const double> s_grid() const { return s_; }
  std::span<const double> F_values() const { return F_; }
  std::span<const double> F_prime() const { return dF_; }

  // F and its derivatives at any s; beyond [-S, S] the matched tails
  //   c_left (-s)^{1/2} (1 + (-s)^{-3}/4),  A_right s^{-5/2} e^{-s^3/9}.
  double F(double s) const;
  double dF(double s) const;
  // log F, finite where F itself underflows (s beyond about 18).
  double log_F(double s) const;
  double d2F(double s) const { return (s / 6.0) * F(s) - (s * s / 3.0) * dF(s); }

  // phi(x, v) = x^{1/6} F(v x^{-1/3}); throws std::invalid_argument for x <= 0.
  double phi(double x, double v) const;
  double log_phi(double x, double v) const;
  // Adjoint steady solution phi~(x, v) = phi(x, -v).
  double phi_adjoint(double x, double v) const { return phi(x, -v); }
  // Partial derivatives of phi.
  double phi_x(double x, double v) const;
  double phi_v(double x, double v) const;
  double phi_vv(double x, double v) const;

  // Diagnostics from the solve.
  double derivative_jump() const { return derivative_jump_; }
  double left_tail_constant() const { return c_left_; }
  double right_tail_constant() const { return a_right_; }

  // log F against log(-s) on [-S, -S/2]: slope ~ 1/2, exp(intercept) = c_-.
  LineFit left_power_fit() const;
  // -log F against s^3 on [S/2, S]: slope ~ 1/9.
  LineFit right_rate_fit() const;
  // Max over the interior two thirds of |F'' + s^2/3 F' - s/6 F| relative to
  // the sum of the term magnitudes, with F'' by second differences of F.
  double ode_residual() const;

  void write_csv(const std::string& path) const;

 private:
  SelfSimilarProfile() = default;
  std::size_t locate(double s) const;

  double S_ = 0.0;
  double h_ = 0.0;
  std::vector<double> s_, F_, dF_;
  double c_left_ = 0.0;
  double a_right_ = 0.0;
  double derivative_jump_ = 0.0;
};

}  // namespace kinfp
