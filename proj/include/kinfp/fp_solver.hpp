#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kinfp/axis.hpp"
#include "kinfp/errors.hpp"
#include "kinfp/steady_profile.hpp"

namespace kinfp {

enum class DomainMode { HalfSpace, WholeSpace };

// Diffusion coefficient a(t, x, v) with known bounds lower <= a <= upper.
struct Coefficient {
  std::function<double(double, double, double)> fn;
  double lower = 1.0;
  double upper = 1.0;
  // False when a depends on v only; the tridiagonal coefficients are then
  // shared by all columns and steps of equal length.
  bool depends_on_tx = false;
  std::string description = "constant 1";

  static Coefficient constant(double a);
  // base + amp sin(freq v)
  static Coefficient sin_v(double base, double amp, double freq = 1.0);
  // Piecewise linear in v through (v_k, a_k), constant beyond the ends.
  static Coefficient table_v(std::vector<double> v, std::vector<double> a);

  double operator()(double t, double x, double v) const { return fn(t, x, v); }
};

// amplitude * exp(-((x-x0)/sx)^2/2 - ((v-v0)/sv)^2/2), set to 0 outside the
// ellipse of radius `cutoff` so the data is compactly supported.
struct GaussianBump {
  double x0 = 1.0;
  double v0 = 0.0;
  double sx = 0.2;
  double sv = 0.2;
  double amplitude = 1.0;
  double cutoff = 6.0;
  double operator()(double x, double v) const;
};

struct InitialData {
  std::vector<GaussianBump> bumps;
  // Optional extra term, e.g. from a snapshot; must be nonnegative.
  std::function<double(double, double)> custom;
  double operator()(double x, double v) const;
  bool empty() const { return bumps.empty() && !custom; }
};

// Optional smaller step in [T - length, T] before every output time T.
struct FineWindow {
  double length = 0.0;
  double dt = 0.0;
};

struct SolverConfig {
  DomainMode mode = DomainMode::HalfSpace;
  AxisSpec x = AxisSpec::uniform(0.0, 10.0, 200);
  AxisSpec v = AxisSpec::uniform(-10.0, 10.0, 200);
  double dt = 1e-3;
  double t_end = 1.0;
  FineWindow fine;
  // 1 = backward Euler (monotone), 0.5 = Crank-Nicolson.
  double theta = 1.0;
  Coefficient a = Coefficient::constant(1.0);
  InitialData f_in;
  // Diagnostics are recorded at t = 0, at these times and at t_end.
  std::vector<double> output_times;
  // Scales for the weighted masses int f mu~_R (half space only).
  std::vector<double> R_list;
  // Negative values above -clip_tol * sup are roundoff; below count as real clips.
  double clip_tol = 1e-12;

  void validate() const;  // throws ConfigError
};

// Cell averages on a product of cell axes, v fastest: index = i * nv + j.
class PhaseField {
 public:
  PhaseField(CellAxis x, CellAxis v);

  const CellAxis& x_axis() const { return x_; }
  const CellAxis& v_axis() const { return v_; }
  std::size_t nx() const { return x_.size(); }
  std::size_t nv() const { return v_.size(); }
  std::size_t size() const { return data_.size(); }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * nv() + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * nv() + j]; }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  // The v-column at x-cell i.
  std::span<double> column(std::size_t i) { return {data_.data() + i * nv(), nv()}; }
  std::span<const double> column(std::size_t i) const { return {data_.data() + i * nv(), nv()}; }
  double area(std::size_t i, std::size_t j) const { return x_.width(i) * v_.width(j); }

  double mass() const;
  double sup() const;
  // sum f^p * area
  double power_sum(double p) const;
  // sum f * w * area for a weight table of the same shape
  double weighted(std::span<const double> w) const;
  // Cell averages of g by 3x3 Gauss-Legendre per cell.
  void fill(const std::function<double(double, double)>& g);
  std::vector<double> cell_averages(const std::function<double(double, double)>& g) const;

 private:
  CellAxis x_, v_;
  std::vector<double> data_;
};

// Mass leaving through the two ends of the x range during a transport step.
struct TransportFlux {
  double left = 0.0;
  double right = 0.0;
};

// Conservative semi-Lagrangian step for d_t f + v d_x f = 0 over time dt.
// Each row is remapped through its cumulative mass, reconstructed by a
// monotone (Fritsch-Butland) cubic; new cell averages are exact integrals of
// the shifted reconstruction, so mass is conserved up to what crosses the ends
// and averages stay nonnegative. Nothing enters through either end (absorbing
// incoming data in half space, empty far field in both modes).
TransportFlux transport_step(PhaseField& f, double dt);

struct DiffusionStats {
  double wall_loss = 0.0;    // mass through v = +-V_max (Dirichlet)
  std::size_t clipped = 0;   // negative values set to 0 beyond roundoff
};

// theta-scheme finite-volume step for d_t f = d_v (a d_v f) on every column,
// homogeneous Dirichlet at the v ends, tridiagonal (Thomas) solve.
DiffusionStats diffusion_step(PhaseField& f, double dt, const Coefficient& a, double t, double theta = 1.0,
                              double clip_tol = 1e-12);

// Extrapolated trace f(x_min, v_j) per v cell, from the end slope of the
// monotone cumulative-mass reconstruction used by the transport.
std::vector<double> wall_trace(const PhaseField& f);

// Discrete int a |d_v f|^2 with the same face fluxes as diffusion_step.
double dissipation(const PhaseField& f, const Coefficient& a, double t);

struct DiagnosticsRow {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;        // int f^2
  double dissipation = 0.0;   // int a |d_v f|^2
  double boundary_f2 = 0.0;   // int_{v<0} |v| f(t,0,v)^2
  double outflux = 0.0;       // int_{v<0} |v| f(t,0,v)
  double sup = 0.0;
  double wphi = 0.0;          // int f phi~ (half space)
  std::vector<double> wmu;    // int f mu~_R, one per R in R_list (half space)
  // (E(t) - E(0) + int_0^t (2 D + B) ds) / E(0)
  double energy_residual = 0.0;
  double outflow_total = 0.0;     // mass left through x = 0 so far (half space)
  double truncation_total = 0.0;  // mass lost at the truncation ends so far
  std::size_t clipped_total = 0;
  std::size_t steps = 0;
};

struct Diagnostics {
  std::vector<double> R_list;
  std::vector<DiagnosticsRow> rows;
  std::string csv() const;
};

// Thrown on NaN or loss of positivity; carries the last good diagnostics.
class SolverAbort : public NumericalError {
 public:
  SolverAbort(const std::string& what, Diagnostics last_good)
      : NumericalError(what), last_good_(std::move(last_good)) {}
  const Diagnostics& last_good() const { return last_good_; }

 private:
  Diagnostics last_good_;
};

class FokkerPlanckSolver {
 public:
  // The profile is needed for int f phi~ in half-space mode; solved on demand
  // when not supplied.
  explicit FokkerPlanckSolver(SolverConfig cfg, std::shared_ptr<const SelfSimilarProfile> profile = nullptr);

  const SolverConfig& config() const { return cfg_; }
  const PhaseField& state() const { return f_; }
  double time() const { return t_; }

  // One Strang step D(h/2) T(h) D(h/2).
  void step(double h);
  DiagnosticsRow measure() const;
  // Runs to t_end. The callback sees every output time.
  using OutputHook = std::function<void(const DiagnosticsRow&, const PhaseField&)>;
  Diagnostics run(const OutputHook& on_output = {});

 private:
  SolverConfig cfg_;
  std::shared_ptr<const SelfSimilarProfile> profile_;
  PhaseField f_;
  double t_ = 0.0;
  std::vector<double> phi_w_;
  std::vector<std::vector<double>> mu_w_;
  double e0_ = 0.0;
  double dissipated_ = 0.0;  // int_0^t (2 D + B) ds
  double last_rate_ = 0.0;   // 2 D + B at the current time
  double outflow_ = 0.0;
  double truncation_ = 0.0;
  std::size_t clipped_ = 0;
  std::size_t steps_ = 0;
  std::vector<double> trace_;
  double rate_now() const;
};

enum class SliceKind {
  AlongX,         // f(x, v0) against x, fit log f vs log x
  AlongV,         // f(x0, v) against v, fit log f vs log |v|
  AlongInverseX,  // f(x, v0) with v0 > 0, fit log f vs -1/x
};

struct SliceSpec {
  SliceKind kind = SliceKind::AlongX;
  double fixed = 0.0;  // v0 or x0
  // Fit window in the slice coordinate (x for AlongX / AlongInverseX, v for
  // AlongV; a window with hi <= 0 selects the v < 0 side).
  double lo = 0.0;
  double hi = 0.0;
};

struct ProfileTable {
  SliceSpec slice;
  std::vector<double> coord;
  std::vector<double> value;
  // Fit over the window on points with value > 0.
  LineFit fit;
  std::size_t fit_points = 0;
  double fit_rms = 0.0;
  // AlongInverseX only: log f = c - rate / x + power log x.
  double rate_with_power = 0.0;
  double power = 0.0;
  // Local slopes of the fitted pair (for plateau checks).
  std::vector<double> local_slope;
};

// Cells are sampled at their centres along the slice coordinate; the fixed
// coordinate is interpolated linearly between cell centres (the wall trace
// is used below the first x centre). Throws DomainError if the slice or its
// window leaves the grid.
ProfileTable extract_profile(const PhaseField& f, const SliceSpec& slice);

}  // namespace kinfp
