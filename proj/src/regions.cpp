#include "kinfp/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kinfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo, hi;
  // Intersect with {a tau <= b}.
  void restrict(double a, double b) {
    if (a > 0.0)
      hi = std::min(hi, b / a);
    else if (a < 0.0)
      lo = std::max(lo, b / a);
    else if (b < 0.0)
      lo = kInf;
  }
  bool empty() const { return !(lo <= hi); }
};

struct Velocities {
  double lo, hi;
};

Velocities admissible(BoundaryTarget target) {
  switch (target) {
    case BoundaryTarget::Incoming: return {0.0, kInf};
    case BoundaryTarget::Outgoing: return {-kInf, 0.0};
    case BoundaryTarget::Wall: break;
  }
  return {-kInf, kInf};
}

// Is there (tau, u) with D(tau, u) <= r? On success stores a witness.
bool feasible(double x, double v, Velocities c, double r, double& tau_out, double& u_out) {
  const double a = std::max(v - 2.0 * r, c.lo);
  const double b = std::min(v + 2.0 * r, c.hi);
  if (!(a <= b)) return false;
  const double r3 = r * r * r;
  for (int sigma : {1, -1}) {
    Interval I = sigma > 0 ? Interval{0.0, r * r} : Interval{-r * r, 0.0};
    // |x + tau v| <= r^3 + sigma tau r
    I.restrict(v - sigma * r, r3 - x);
    I.restrict(-v - sigma * r, r3 + x);
    // the range of x + tau u over u in [a, b] meets [-c, c], c = r^3 + sigma tau r
    if (sigma > 0) {
      I.restrict(a - r, r3 - x);
      I.restrict(-b - r, r3 + x);
    } else {
      I.restrict(b + r, r3 - x);
      I.restrict(-a + r, r3 + x);
    }
    if (I.empty()) continue;
    const double tau = 0.5 * (I.lo + I.hi);
    tau_out = tau;
    u_out = tau == 0.0 ? std::clamp(v, a, b) : std::clamp(-x / tau, a, b);
    return true;
  }
  return false;
}

}  // namespace

BoundaryDistance boundary_distance(double x, double v, BoundaryTarget target, double tol) {
  if (!(x >= 0.0)) throw std::invalid_argument("boundary_distance: x must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("boundary_distance: tol must be positive");
  const Velocities c = admissible(target);
  const double gap = std::max({0.0, c.lo - v, v - c.hi});
  BoundaryDistance res;
  double hi = std::max(std::cbrt(x), 0.5 * gap);
  res.tau = 0.0;
  res.u = std::clamp(v, c.lo, c.hi);
  if (hi == 0.0) return res;
  double lo = 0.0;
  double tau = 0.0, u = 0.0;
  int it = 0;
  for (; it < 400 && hi - lo > tol * std::max(1.0, hi) && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(x, v, c, mid, tau, u)) {
      hi = mid;
      res.tau = tau;
      res.u = u;
    } else {
      lo = mid;
    }
  }
  res.value = hi;
  res.degraded = hi - lo > tol * std::max(1.0, hi) && it >= 400;
  return res;
}

double dist_to_incoming(double x, double v, double tol) {
  return boundary_distance(x, v, BoundaryTarget::Incoming, tol).value;
}
double dist_to_outgoing(double x, double v, double tol) {
  return boundary_distance(x, v, BoundaryTarget::Outgoing, tol).value;
}
double dist_to_wall(double x, double v, double tol) {
  return boundary_distance(x, v, BoundaryTarget::Wall, tol).value;
}

RegionScale::RegionScale(double R_, double tol_) : R(R_), tol(tol_) {
  if (!(R > 0.0)) throw std::invalid_argument("RegionScale: R must be positive");
  if (!(tol >= 0.0)) throw std::invalid_argument("RegionScale: tol must be >= 0");
}
double RegionScale::p_radius() const { return std::sqrt(p_factor * R); }
double RegionScale::o_radius() const { return std::sqrt(o_factor * R); }
double RegionScale::n_radius() const { return std::sqrt(n_factor * R); }

Classification classify(double x, double v, const RegionScale& scale) {
  if (!(x > 0.0)) throw std::invalid_argument("classify: x must be positive");
  Classification c;
  const double dtol = std::min(1e-12, 1e-3 * scale.tol + 1e-15);
  c.d_in = dist_to_incoming(x, v, dtol);
  c.d_out = dist_to_outgoing(x, v, dtol);
  c.d_wall = dist_to_wall(x, v, dtol);
  const auto near = [&](double d, double r) { return std::fabs(d - r) <= scale.tol; };
  if (c.d_in <= scale.p_radius()) {
    c.region = Region::P;
    c.ambiguous = near(c.d_in, scale.p_radius());
  } else if (c.d_out <= scale.o_radius()) {
    c.region = Region::O;
    c.ambiguous = near(c.d_in, scale.p_radius()) || near(c.d_out, scale.o_radius());
  } else {
    c.region = Region::N;
    c.ambiguous = near(c.d_in, scale.p_radius()) || near(c.d_out, scale.o_radius()) ||
                  c.d_wall < scale.n_radius() + scale.tol;
    c.sub = (v <= 0.0 && x <= -v * v * v) ? NSubregion::Isolated : NSubregion::Weighted;
  }
  return c;
}

std::string to_string(Region r) {
  switch (r) {
    case Region::P: return "P";
    case Region::O: return "O";
    case Region::N: return "N";
  }
  return "?";
}

std::string to_string(NSubregion s) {
  switch (s) {
    case NSubregion::None: return "";
    case NSubregion::Isolated: return "I";
    case NSubregion::Weighted: return "W";
  }
  return "?";
}

double smoothstep5(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}

double smoothstep5_d1(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 30.0 * u * u * (u - 1.0) * (u - 1.0);
}

double smoothstep5_d2(double u) {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 60.0 * u * (u - 1.0) * (2.0 * u - 1.0);
}

double chi(Region region, double R, double x, double v) {
  if (!(x > 0.0)) throw std::invalid_argument("chi: x must be positive");
  if (!(R > 0.0)) throw std::invalid_argument("chi: R must be positive");
  const double sr = std::sqrt(R);
  const double tol = 1e-13;
  switch (region) {
    case Region::P: {
      const double d = dist_to_incoming(x, v, tol) / sr;
      return 1.0 - smoothstep5((d - 1.0) / (std::sqrt(1.5) - 1.0));
    }
    case Region::N: {
      const double d = dist_to_wall(x, v, tol) / sr;
      const double lo = std::sqrt(0.075), hi = std::sqrt(0.1);
      return smoothstep5((d - lo) / (hi - lo));
    }
    case Region::O: {
      const double din = dist_to_incoming(x, v, tol) / sr;
      const double dout = dist_to_outgoing(x, v, tol) / sr;
      const double away_from_p = smoothstep5((din - std::sqrt(0.5)) / (1.0 - std::sqrt(0.5)));
      const double lo = std::sqrt(0.1), hi = std::sqrt(0.2);
      return away_from_p * (1.0 - smoothstep5((dout - lo) / (hi - lo)));
    }
  }
  return 0.0;
}

}  // namespace kinfp
