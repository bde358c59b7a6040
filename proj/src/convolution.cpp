#include "kinfp/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kinfp {

namespace {

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

void require_txv(const GridFunction& g, const char* what) {
  if (g.rank() != 3 || g.axis(0).name != "t" || g.axis(1).name != "x" || g.axis(2).name != "v")
    throw std::invalid_argument(std::string(what) + ": grid must have axes (t, x, v)");
}

}  // namespace

GridFunction kconvolve(const GridFunction& f, const GridFunction& psi, const GridAxis& out_t,
                       const GridAxis& out_x, const GridAxis& out_v) {
  require_txv(f, "kconvolve f");
  require_txv(psi, "kconvolve psi");
  GridAxis ta = out_t, xa = out_x, va = out_v;
  ta.name = "t";
  xa.name = "x";
  va.name = "v";
  GridFunction out({ta, xa, va});

  const PhaseBox a{ta.min, ta.max, xa.min, xa.max, va.min, va.max};
  const PhaseBox hull = compose_inverse_hull(a, psi.box_txv());
  const PhaseBox fb = f.box_txv();
  const auto slack = [](double lo, double hi) { return 1e-12 * (hi - lo); };
  if (hull.t0 < fb.t0 - slack(fb.t0, fb.t1) || hull.t1 > fb.t1 + slack(fb.t0, fb.t1) ||
      hull.x0 < fb.x0 - slack(fb.x0, fb.x1) || hull.x1 > fb.x1 + slack(fb.x0, fb.x1) ||
      hull.v0 < fb.v0 - slack(fb.v0, fb.v1) || hull.v1 > fb.v1 + slack(fb.v0, fb.v1))
    throw DomainError("kconvolve: enlarged domain A o B^{-1} exits the box of f");

  // Precompute psi nodes with nonzero weight.
  struct Node {
    PhasePoint inv;
    double w;
  };
  std::vector<Node> nodes;
  nodes.reserve(psi.size());
  double c[3];
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double val = psi.values()[i];
    if (val == 0.0) continue;
    psi.coords(i, c);
    nodes.push_back({inverse(PhasePoint{c[0], c[1], c[2]}), val * psi.weight(i)});
  }

  double zc[3];
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.coords(i, zc);
    const PhasePoint z{zc[0], zc[1], zc[2]};
    double acc = 0.0;
    for (const auto& n : nodes) {
      const PhasePoint w = compose(z, n.inv);
      const double p[3] = {w.t, w.x, w.v};
      acc += n.w * f.interpolate(p);
    }
    out.values()[i] = acc;
  }
  return out;
}

double restricted_lp_norm(const GridFunction& f, const PhaseBox& box, double p) {
  require_txv(f, "restricted_lp_norm");
  const double lo[3] = {box.t0, box.x0, box.v0};
  const double hi[3] = {box.t1, box.x1, box.v1};
  std::size_t i0[3], i1[3];
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& ax = f.axis(k);
    const double h = ax.spacing();
    const double eps = 1e-9;
    const double a = std::floor((lo[k] - ax.min) / h + eps);
    const double b = std::ceil((hi[k] - ax.min) / h - eps);
    i0[k] = static_cast<std::size_t>(std::clamp(a, 0.0, static_cast<double>(ax.count - 1)));
    i1[k] = static_cast<std::size_t>(std::clamp(b, 0.0, static_cast<double>(ax.count - 1)));
  }
  double acc = 0.0;
  for (std::size_t i = i0[0]; i <= i1[0]; ++i)
    for (std::size_t j = i0[1]; j <= i1[1]; ++j)
      for (std::size_t k = i0[2]; k <= i1[2]; ++k) {
        // Trapezoid weights of the sub-box.
        const auto w1 = [](std::size_t n, std::size_t a, std::size_t b, double h) {
          if (a == b) return 0.0;
          return (n == a || n == b) ? 0.5 * h : h;
        };
        const double w = w1(i, i0[0], i1[0], f.axis(0).spacing()) *
                         w1(j, i0[1], i1[1], f.axis(1).spacing()) *
                         w1(k, i0[2], i1[2], f.axis(2).spacing());
        const double val = std::fabs(f.at(i, j, k));
        if (std::isinf(p))
          acc = std::max(acc, val);
        else
          acc += w * std::pow(val, p);
      }
  return std::isinf(p) ? acc : std::pow(acc, 1.0 / p);
}

YoungResult young_check(const GridFunction& f, const GridFunction& psi, const GridAxis& out_t,
                        const GridAxis& out_x, const GridAxis& out_v, double p, double q,
                        double r, double quad_slack) {
  for (double e : {p, q, r})
    if (!(e >= 1.0)) throw std::invalid_argument("young_check: exponents must lie in [1, inf]");
  if (std::fabs(inv(r) + 1.0 - inv(p) - inv(q)) > 1e-12)
    throw std::invalid_argument("young_check: exponents violate 1/r + 1 = 1/p + 1/q");
  if (!f.nonnegative() || !psi.nonnegative())
    throw std::invalid_argument("young_check: f and psi must be nonnegative");

  const GridFunction conv = kconvolve(f, psi, out_t, out_x, out_v);
  const PhaseBox a{out_t.min, out_t.max, out_x.min, out_x.max, out_v.min, out_v.max};
  const PhaseBox hull = compose_inverse_hull(a, psi.box_txv());

  YoungResult res;
  res.lhs = conv.lp_norm(r);
  res.rhs = restricted_lp_norm(f, hull, p) * psi.lp_norm(q);
  res.pass = res.lhs <= res.rhs * (1.0 + quad_slack);
  return res;
}

}  // namespace kinfp
