#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kinfp/fp_solver.hpp"
#include "kinfp/grid_function.hpp"
#include "kinfp/kinetic_group.hpp"
#include "kinfp/regions.hpp"
#include "kinfp/weights.hpp"

namespace kinfp {

// Node predicate on (t, x, v).
using NodeMask = std::function<bool(double t, double x, double v)>;

struct H1KinOptions {
  // Nodes entering the seminorm; empty means every node.
  NodeMask mask;
  // Half space: g = 0 for x < x_min when v > 0 (vanishing on the incoming boundary).
  bool absorbing_wall = false;
  // g = 0 beyond the x ends of the grid (other than the wall side).
  bool zero_far_field = true;
};

struct H1KinResult {
  double grad_part = 0.0;  // ||d_v g||_{L^2}
  double dual_part = 0.0;  // ||Y g||_{L^2_{t,x} H^{-1}_v}
  double total() const { return grad_part + dual_part; }
};

// Rank-3 grid with axes named t, x, v. Y g = d_t g + v d_x g by upwind
// one-sided differences (second order where two upwind nodes exist); for
// every (t, x) node the Dirichlet problem -u'' = Y g on the v line gives the
// dual part as ||u'||_{L^2}. Throws DomainError when a masked node needs a
// t or x neighbour that the grid does not provide.
H1KinResult h1kin_seminorm(const GridFunction& g, const H1KinOptions& opt = {});

// ||u'||^2 for -u'' = rhs on nodes with spacing dv and u = 0 at both ends
// (rhs at the end nodes is ignored).
double dirichlet_dual_sq(std::span<const double> rhs, double dv);

// Trapezoid L^p norm over masked nodes.
double masked_lp_norm(const GridFunction& g, const NodeMask& mask, double p);

struct ReportTerm {
  std::string name;
  double value = 0.0;
};

struct InequalityReport {
  std::string inequality;
  std::string member;
  double lhs = 0.0;
  double rhs = 0.0;  // at the best parameter
  std::vector<ReportTerm> terms;
  double best_parameter = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> parameters;  // Nash: the s values
  std::vector<double> rhs_curve;
  double ratio = 0.0;  // lhs / rhs (0 when both vanish)
  // combined check: the mu~ term exceeds the phi~ term
  bool mu_dominates = false;
};

// C* = max ratio over the members, with the member attaining it.
struct FamilyReport {
  std::string inequality;
  std::vector<InequalityReport> members;
  double C_star = 0.0;
  std::string worst;
  bool finite() const;
};
FamilyReport summarize(std::string inequality, std::vector<InequalityReport> members);

// ||g||^2_{L^2(O1)} <~ s [[g]]_{O2} ||g||_{L^2(O2)} + s^{-6} ||g||^2_{L^1(O2)}
// for each s. Requires O1 o (delta_s B)^{-1} inside O2 for every s (box hull);
// the time ghost layer of O2 must lie inside the grid.
InequalityReport nash_check(const GridFunction& g, const PhaseBox& omega1, const PhaseBox& omega2, const PhaseBox& B,
                            std::span<const double> s_list);

// Region labels of a node grid, one per (x, v) node; x = 0 nodes are
// classified just inside the wall.
class RegionMap {
 public:
  RegionMap(const GridAxis& x, const GridAxis& v, double R);
  double R() const { return R_; }
  Region at(std::size_t i, std::size_t j) const { return labels_[i * nv_ + j]; }
  NSubregion sub(std::size_t i, std::size_t j) const { return subs_[i * nv_ + j]; }
  // Mask of the nodes labelled r (any t), on the grid the map was built for.
  NodeMask mask(Region r, const GridAxis& x, const GridAxis& v) const;

 private:
  double R_;
  std::size_t nv_;
  std::vector<Region> labels_;
  std::vector<NSubregion> subs_;
};

// ||g||^2 on [T1, T2] x P_R against R [[g]]^2 + sqrt(R) [[g]] ||g|| over
// [T1 - 2R, T2]. g must vanish on the incoming boundary within 1e-12 (relative
// to sup |g|, floor 1) and the grid must hold [T1 - 2R, T2] plus a ghost step.
InequalityReport poincare_check(const GridFunction& g, double R, double T1, double T2,
                                const RegionMap* regions = nullptr);

// ||g||^2 on [T1, T2] x O_R against R [[g]]^2 + sqrt(R) [[g]] ||g|| + R B with
// [[g]] on [T1, T2 + R], ||g|| on [T1, T2 + 2R], B = int_{T1}^{T2+R} int_{v<0} |v| g(t, 0, v)^2.
InequalityReport outgoing_check(const GridFunction& g, double R, double T1, double T2,
                                const RegionMap* regions = nullptr);

// Every term of the combined estimate from stored diagnostics (d = 1, a = 1):
//   lhs = int_{T1}^{T2} E - delta int_{T1-2R}^{T2} E,        E = int f^2,
//   (R / delta) [[f]]^2 with [[f]] = 2 (int D)^{1/2} on [T1 - 2R, T2 + R],
//   R int_{T1}^{T2+R} B,
//   ((T2 - T1)^4 / R^{11/2} + R^{-3/2}) (int f_in phi~)^2,
//   (T2 - T1)^2 / R^3 (int f_in mu~_R)^2.
// The time integrals use the trapezoid rule over the diagnostics rows, which
// must cover [T1 - 2R, T2 + R] and carry a weighted mass for R.
InequalityReport combined_check(const Diagnostics& d, double R, double delta, double T1, double T2);

// Deterministic test families.
struct FamilyMember {
  std::string id;
  std::function<double(const PhasePoint&)> fn;
};
// 20 Gaussians (5 centres x 4 widths relative to the box) and `random_count`
// band-limited fields, all smoothly cut off inside `support`.
std::vector<FamilyMember> whole_space_family(const PhaseBox& support, std::uint64_t seed, std::size_t random_count = 30);
// Bumps near the wall in x >= 0 multiplied by 1 - e^{-x/l} s(v), which
// vanishes on the incoming boundary; smoothly cut off in t inside [t0, t1].
std::vector<FamilyMember> half_space_family(const PhaseBox& support, std::uint64_t seed, std::size_t count = 50);

struct Resolution {
  GridAxis t, x, v;
  Resolution refined() const;  // twice as many intervals per axis
};
GridFunction sample_member(const FamilyMember& m, const Resolution& r);

// Solver snapshots at uniform times resampled to a node grid: bilinear in
// (x, v) between cell centres and linear to 0 at the outer faces, except at
// the wall in half space, where the wall trace is used.
GridFunction stack_snapshots(std::span<const PhaseField> frames, const GridAxis& t, const GridAxis& x,
                             const GridAxis& v, bool half_space);

}  // namespace kinfp
