#pragma once

#include <string>

namespace kinfp {

// Which part of the boundary {x = 0} a distance is measured to.
enum class BoundaryTarget {
  Incoming,  // x = 0, v >= 0
  Outgoing,  // x = 0, v <= 0
  Wall,      // x = 0, any v
};

struct BoundaryDistance {
  double value = 0.0;
  // A minimizing boundary displacement: elapsed time tau and arrival
  // velocity u (so the target point is (tau, 0, u)).
  double tau = 0.0;
  double u = 0.0;
  bool degraded = false;
};

// dist(R x target, (0, x, v)) = inf { |||z'||| : (0, x, v) o z' on the target }.
//
// Writing z' = (tau, -x - tau v, u - v), the objective is
//   D(tau, u) = max{ sqrt|tau|, |u - v|/2, L(|x + tau v|), L(|x + tau u|) },
// L the root of r^3 + |tau| r = y. For a fixed level r and a fixed sign of
// tau every constraint of {D <= r} is linear in tau, so feasibility is decided
// exactly and the distance is found by bisection on r.
BoundaryDistance boundary_distance(double x, double v, BoundaryTarget target, double tol = 1e-12);

double dist_to_incoming(double x, double v, double tol = 1e-12);
double dist_to_outgoing(double x, double v, double tol = 1e-12);
double dist_to_wall(double x, double v, double tol = 1e-12);

// Region thresholds at scale R: P_R uses sqrt(p_factor R), O_R uses
// sqrt(o_factor R) and N_R uses sqrt(n_factor R).
struct RegionScale {
  double R = 1.0;
  double tol = 1e-9;
  double p_factor = 1.0;
  double o_factor = 0.1;
  double n_factor = 0.1;

  explicit RegionScale(double R_, double tol_ = 1e-9);
  double p_radius() const;
  double o_radius() const;
  double n_radius() const;
};

enum class Region { P, O, N };
enum class NSubregion { None, Isolated, Weighted };

struct Classification {
  Region region = Region::P;
  NSubregion sub = NSubregion::None;
  // A threshold decided the label within tol.
  bool ambiguous = false;
  double d_in = 0.0;
  double d_out = 0.0;
  double d_wall = 0.0;
};

// P first, O among non-P points, N by wall distance; the isolated part of N
// is {v <= 0, x <= -v^3}. Throws std::invalid_argument for x <= 0.
Classification classify(double x, double v, const RegionScale& scale);

std::string to_string(Region r);
std::string to_string(NSubregion s);

// Quintic smoothstep 6u^5 - 15u^4 + 10u^3 on [0, 1], clamped outside.
double smoothstep5(double u);
double smoothstep5_d1(double u);
double smoothstep5_d2(double u);

// Cutoffs built from a fixed unit-scale profile of the scaled distance, so
// chi_{X,R}(x, v) = chi_{X,1}(x / R^{3/2}, v / sqrt R).
//   P: 1 on P_R, 0 outside P_{3R/2}.
//   N: 1 on N_R, 0 outside N_{3R/4}.
//   O: 1 on O_R, 0 on P_{R/2} and where d_out >= sqrt(2 R / 10).
double chi(Region region, double R, double x, double v);

}  // namespace kinfp
