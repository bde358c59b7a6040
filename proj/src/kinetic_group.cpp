#include "kinfp/kinetic_group.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kinfp {

PhasePoint compose(const PhasePoint& z, const PhasePoint& z2) {
  return {z.t + z2.t, z.x + z2.x + z2.t * z.v, z.v + z2.v};
}

PhasePoint inverse(const PhasePoint& z) { return {-z.t, -z.x + z.t * z.v, -z.v}; }

PhasePoint dilate(double r, const PhasePoint& z) {
  if (!(r > 0.0)) throw std::invalid_argument("dilate: r must be positive");
  return {r * r * z.t, r * r * r * z.x, r * z.v};
}

namespace {

void check_dims(const PhasePointNd& z) {
  if (z.x.size() != z.v.size())
    throw std::invalid_argument("phase point: dim(x) != dim(v)");
}

}  // namespace

PhasePointNd compose(const PhasePointNd& z, const PhasePointNd& z2) {
  check_dims(z);
  check_dims(z2);
  if (z.x.size() != z2.x.size())
    throw std::invalid_argument("compose: dimension mismatch");
  PhasePointNd out{z.t + z2.t, z.x, z.v};
  for (std::size_t i = 0; i < z.x.size(); ++i) {
    out.x[i] = z.x[i] + z2.x[i] + z2.t * z.v[i];
    out.v[i] = z.v[i] + z2.v[i];
  }
  return out;
}

PhasePointNd inverse(const PhasePointNd& z) {
  check_dims(z);
  PhasePointNd out{-z.t, z.x, z.v};
  for (std::size_t i = 0; i < z.x.size(); ++i) {
    out.x[i] = -z.x[i] + z.t * z.v[i];
    out.v[i] = -z.v[i];
  }
  return out;
}

PhasePointNd dilate(double r, const PhasePointNd& z) {
  check_dims(z);
  if (!(r > 0.0)) throw std::invalid_argument("dilate: r must be positive");
  PhasePointNd out{r * r * z.t, z.x, z.v};
  for (std::size_t i = 0; i < z.x.size(); ++i) {
    out.x[i] *= r * r * r;
    out.v[i] *= r;
  }
  return out;
}

double cubic_level(double a, double y) {
  if (y <= 0.0) return 0.0;
  if (a <= 0.0) return std::cbrt(y);
  // min(y^{1/3}, y/a) bounds the root from above within a factor 2; Newton on
  // the convex increasing cubic then decreases monotonically to the root.
  double r = std::min(std::cbrt(y), y / a);
  for (int it = 0; it < 60; ++it) {
    const double f = (r * r + a) * r - y;
    const double next = r - f / (3.0 * r * r + a);
    if (!(next < r)) break;
    r = next;
  }
  return r;
}

double knorm(const PhasePoint& z) {
  const double at = std::fabs(z.t);
  return std::max({std::sqrt(at), 0.5 * std::fabs(z.v), cubic_level(at, std::fabs(z.x)),
                   cubic_level(at, std::fabs(z.x - z.t * z.v))});
}

double knorm_search(const PhasePoint& z, double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::invalid_argument("knorm_search: tol must be positive");
  const double root_t = std::sqrt(std::fabs(z.t));
  auto objective = [&](double w) {
    return std::max({root_t, std::cbrt(std::fabs(z.x - z.t * w)), std::fabs(z.v - w),
                     std::fabs(w)});
  };
  // Any minimizer satisfies |w| <= value <= objective(0).
  const double bound = objective(0.0);
  double lo = -bound;
  double hi = bound;
  int it = 0;
  while (hi - lo > tol) {
    if (++it > max_iter)
      throw ConvergenceError("knorm_search: no convergence within " + std::to_string(max_iter) +
                             " iterations (tol too tight)");
    const double m1 = lo + (hi - lo) / 3.0;
    const double m2 = hi - (hi - lo) / 3.0;
    if (objective(m1) <= objective(m2))
      hi = m2;
    else
      lo = m1;
  }
  return objective(0.5 * (lo + hi));
}

namespace {

// z2^{-1} o z1 written as differences, so that it vanishes exactly at z1 = z2.
PhasePoint relative(const PhasePoint& z1, const PhasePoint& z2) {
  const double dt = z1.t - z2.t;
  return {dt, (z1.x - z2.x) - dt * z2.v, z1.v - z2.v};
}

}  // namespace

double kdist(const PhasePoint& z1, const PhasePoint& z2) { return knorm(relative(z1, z2)); }

double kdist_search(const PhasePoint& z1, const PhasePoint& z2, double tol) {
  return knorm_search(relative(z1, z2), tol);
}

KineticCylinder::KineticCylinder(PhasePoint c, double r) : center(c), radius(r) {
  if (!(r > 0.0)) throw std::invalid_argument("KineticCylinder: radius must be positive");
}

bool KineticCylinder::contains(const PhasePoint& z) const {
  return z.t <= center.t && kdist(z, center) <= radius;
}

PhaseBox compose_inverse_hull(const PhaseBox& a, const PhaseBox& b) {
  const double dv_lo = a.v0 - b.v1;
  const double dv_hi = a.v1 - b.v0;
  const double c[4] = {-b.t0 * dv_lo, -b.t0 * dv_hi, -b.t1 * dv_lo, -b.t1 * dv_hi};
  const double shear_lo = *std::min_element(c, c + 4);
  const double shear_hi = *std::max_element(c, c + 4);
  return {a.t0 - b.t1,
          a.t1 - b.t0,
          a.x0 - b.x1 + shear_lo,
          a.x1 - b.x0 + shear_hi,
          dv_lo,
          dv_hi};
}

PhaseBox dilate_box(double s, const PhaseBox& b) {
  if (!(s > 0.0)) throw std::invalid_argument("dilate_box: s must be positive");
  return {s * s * b.t0, s * s * b.t1, s * s * s * b.x0, s * s * s * b.x1, s * b.v0, s * b.v1};
}

}  // namespace kinfp
