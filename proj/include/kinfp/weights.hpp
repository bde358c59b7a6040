#pragma once

#include <cstddef>
#include <vector>

#include "kinfp/steady_profile.hpp"

namespace kinfp {

// Decreasing profile E = k_h * min{1, e^{1 + h - rho}} with k_h the standard
// C^infinity mollifier on [-h, h]. The shift by h makes E = 1 exactly for
// rho <= 1 and E = C_k e^{1 + h - rho} exactly for rho >= 1 + 2h. With
//   M(rho) = int_{-h}^{rho-1-h} k,  K(rho) = int_{-h}^{rho-1-h} k(y) e^y dy
// one has, on the transition,
//   E = 1 - M + e^{1+h-rho} K,  E' = -e^{1+h-rho} K,  E'' = e^{1+h-rho} K - k,
// so that E'' + E' = -k <= 0.
class ExpCutoff {
 public:
  explicit ExpCutoff(double h = 0.05, double table_step = 1e-3);

  double width() const { return h_; }
  double operator()(double rho) const;
  double d1(double rho) const;
  double d2(double rho) const;
  // E e^{rho} and its scaled derivatives E' e^{rho}, E'' e^{rho}; bounded for
  // all rho, used where E itself underflows.
  double scaled(double rho) const;
  double scaled_d1(double rho) const;
  double scaled_d2(double rho) const;

  // Mollifier density and the tail constant C_k = int k(y) e^y dy.
  double kernel(double y) const;
  double kernel_d1(double y) const;
  double tail_constant() const { return ck_; }

 private:
  struct Tables {
    double M, K;
  };
  Tables tables(double y) const;  // y = rho - 1 - h in [-h, h]

  double h_;
  double step_;
  double norm_;
  double ck_;
  std::vector<double> M_, K_;
};

// Isolated-region weight at scale R:
//   mu~_R(x, v) = E(-Rb v / x) psi(-v^3 / x) psi(-2 v / sqrt(Rb) - 1),  Rb = R / 10,
// with psi the quintic smoothstep from 0 at 1/2 to 1 at 1.
struct WeightSpec {
  double R = 1.0;
  double rbar_factor = 0.1;
  ExpCutoff E;

  explicit WeightSpec(double R_, double h = 0.05);
  double rbar() const { return rbar_factor * R; }
};

// psi: 0 on (-inf, 1/2], 1 on [1, inf), quintic smoothstep between.
double psi_step(double rho);
double psi_step_d1(double rho);
double psi_step_d2(double rho);

double eval_mu_tilde(const WeightSpec& w, double x, double v);
// mu_R(x, v) = mu~_R(x, -v).
double eval_mu(const WeightSpec& w, double x, double v);

// (d_v^2 + v d_x) mu~_R by the chain rule, returned as mantissa * e^{log_scale}
// so that it stays representable where E underflows.
struct ScaledValue {
  double mantissa = 0.0;
  double log_scale = 0.0;
  double value() const;
};
ScaledValue mu_tilde_operator(const WeightSpec& w, double x, double v);

struct MuCheckPoint {
  double x = 0.0;
  double v = 0.0;
  double ratio = 0.0;
};

struct MuCheckResult {
  // Smallest C with (d_v^2 + v d_x) mu~_R <= C R^{-5/4} phi~ at every sample.
  double C_best = 0.0;
  MuCheckPoint worst;
  std::size_t samples = 0;
  std::size_t positive = 0;
  // How many samples fell in each combination of (E varying, psi(-v^3/x)
  // varying, psi(-2v/sqrt(Rb) - 1) varying), indexed by the bit pattern.
  std::size_t case_counts[8] = {};
};

// Samples are drawn in unit-scale coordinates and dilated by sqrt(R), so the
// same seed gives the same unit-scale points for every R.
MuCheckResult mu_inequality_check(const WeightSpec& w, const SelfSimilarProfile& profile,
                                  std::size_t sample_count, unsigned long long seed = 1);

}  // namespace kinfp
