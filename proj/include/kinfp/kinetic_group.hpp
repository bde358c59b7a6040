#pragma once

#include <stdexcept>
#include <vector>

#include "kinfp/errors.hpp"

namespace kinfp {

// A point z = (t, x, v) of the kinetic group in the reduced coordinates
// (t, x1, v1). All geometry in this library lives here; transverse
// components never enter the boundary problems.
struct PhasePoint {
  double t = 0.0;
  double x = 0.0;
  double v = 0.0;

  bool operator==(const PhasePoint&) const = default;
};

// Full-dimensional point, used only for the group law itself.
struct PhasePointNd {
  double t = 0.0;
  std::vector<double> x;
  std::vector<double> v;
};

// z o z' = (t + t', x + x' + t' v, v + v')
PhasePoint compose(const PhasePoint& z, const PhasePoint& z2);
// z^{-1} = (-t, -x + t v, -v)
PhasePoint inverse(const PhasePoint& z);
// delta_r z = (r^2 t, r^3 x, r v); throws std::invalid_argument for r <= 0.
PhasePoint dilate(double r, const PhasePoint& z);

PhasePointNd compose(const PhasePointNd& z, const PhasePointNd& z2);
PhasePointNd inverse(const PhasePointNd& z);
PhasePointNd dilate(double r, const PhasePointNd& z);

// Unique nonnegative root r of r^3 + a r = y for a, y >= 0.
double cubic_level(double a, double y);

// |||z||| = min_w max{|t|^{1/2}, |x - t w|^{1/3}, |v - w|, |w|}.
//
// For d = 1 the minimum has a closed form. |||z||| <= r iff the three
// w-intervals [-r, r], [v - r, v + r] and {|x - t w| <= r^3} intersect,
// and intervals on a line intersect iff they intersect pairwise. That gives
//   |||z||| = max{ sqrt|t|, |v|/2, L_t(|x|), L_t(|x - t v|) }
// with L_t(y) the root of r^3 + |t| r = y.
double knorm(const PhasePoint& z);

// Same quantity by ternary search over w (the objective is quasiconvex in w).
// Result is within `tol` of the minimum. Throws ConvergenceError when the
// bracket does not close within the iteration cap.
double knorm_search(const PhasePoint& z, double tol = 1e-8, int max_iter = 200);

// d_kin(z1, z2) = |||z2^{-1} o z1|||
double kdist(const PhasePoint& z1, const PhasePoint& z2);
double kdist_search(const PhasePoint& z1, const PhasePoint& z2, double tol = 1e-8);

// Q_r(z0) = {z : t <= t0, d_kin(z, z0) <= r}
struct KineticCylinder {
  PhasePoint center;
  double radius;

  KineticCylinder(PhasePoint c, double r);
  bool contains(const PhasePoint& z) const;
};

// Axis-aligned box in (t, x, v).
struct PhaseBox {
  double t0, t1, x0, x1, v0, v1;

  bool contains(const PhasePoint& z) const {
    return z.t >= t0 && z.t <= t1 && z.x >= x0 && z.x <= x1 && z.v >= v0 && z.v <= v1;
  }
  bool inside(const PhaseBox& outer) const {
    return t0 >= outer.t0 && t1 <= outer.t1 && x0 >= outer.x0 && x1 <= outer.x1 &&
           v0 >= outer.v0 && v1 <= outer.v1;
  }
};

// Bounding box of A o B^{-1} = {a o b^{-1}}. For a in A, b = (t', x', v') in B,
//   a o b^{-1} = (t - t', x - x' - t'(v - v'), v - v'),
// so the hull is the sum of the coordinate ranges plus the range of the
// bilinear shear term -t'(v - v'), which is attained at corners.
PhaseBox compose_inverse_hull(const PhaseBox& a, const PhaseBox& b);

// Dilated box delta_s B (s > 0 keeps orientation).
PhaseBox dilate_box(double s, const PhaseBox& b);

}  // namespace kinfp
