#pragma once

#include "kinfp/grid_function.hpp"

namespace kinfp {

// (f * psi)(z) = int f(w) psi(w^{-1} o z) dw = int_B f(z o s^{-1}) psi(s) ds,
// evaluated at every node of the (t, x, v) output grid with the trapezoid rule
// over psi's nodes and multilinear sampling of f. Throws DomainError when
// A o B^{-1} leaves f's box.
GridFunction kconvolve(const GridFunction& f, const GridFunction& psi, const GridAxis& out_t,
                       const GridAxis& out_x, const GridAxis& out_v);

// L^p norm of f restricted to the node sub-box covering `box`
// (snapped outward to grid nodes).
double restricted_lp_norm(const GridFunction& f, const PhaseBox& box, double p);

struct YoungResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

// ||f * psi||_{L^r(A)} <= ||f||_{L^p(A o B^{-1})} ||psi||_{L^q(B)} with
// 1/r + 1 = 1/p + 1/q. Infinite exponents are passed as +inf.
YoungResult young_check(const GridFunction& f, const GridFunction& psi, const GridAxis& out_t,
                        const GridAxis& out_x, const GridAxis& out_v, double p, double q,
                        double r, double quad_slack = 0.05);

}  // namespace kinfp
