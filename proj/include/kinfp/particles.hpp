#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kinfp/fp_solver.hpp"
#include "kinfp/grid_function.hpp"

namespace kinfp {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  explicit Philox4x32(std::uint64_t seed)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}
  Counter operator()(Counter ctr) const;

 private:
  std::array<std::uint32_t, 2> key_;
};

// Two independent standard normals for the stream (particle, step, lane).
std::array<double, 2> philox_normals(const Philox4x32& gen, std::uint64_t particle, std::uint32_t step,
                                     std::uint32_t lane = 0);

// Cholesky factor of the covariance of (dV, dX - V dt) over a step dt:
// [[2 dt, dt^2], [dt^2, 2 dt^3 / 3]].
struct KineticIncrement {
  double l11 = 0.0;
  double l21 = 0.0;
  double l22 = 0.0;
  explicit KineticIncrement(double dt);  // throws NumericalError for dt <= 0
};

struct ExitRecord {
  std::size_t particle = 0;
  double time = 0.0;
  double velocity = 0.0;  // < 0
};

class ParticleEnsemble {
 public:
  ParticleEnsemble(std::vector<double> x, std::vector<double> v, double total_mass, DomainMode mode,
                   std::uint64_t seed);
  // n samples of f_in (Gaussian bumps only); total_mass = int f_in.
  static ParticleEnsemble sample(const InitialData& f_in, std::size_t n, DomainMode mode, std::uint64_t seed);

  std::size_t size() const { return x_.size(); }
  std::size_t alive_count() const;
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& v() const { return v_; }
  bool alive(std::size_t k) const { return alive_[k] != 0; }
  const std::vector<ExitRecord>& exits() const { return exits_; }
  double time() const { return t_; }
  double particle_mass() const { return particle_mass_; }
  double total_mass() const { return particle_mass_ * static_cast<double>(size()); }
  double surviving_mass() const { return particle_mass_ * static_cast<double>(alive_count()); }
  DomainMode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }

  // Advance to t_end with steps of dt (the last one shortened). Requires
  // 0 < dt <= 1e-2. In half space a particle is absorbed at the first zero
  // in the step of the cubic Hermite interpolant of x through the step ends.
  void simulate(double dt, double t_end);

  std::string exits_csv() const;

 private:
  std::vector<double> x_, v_;
  std::vector<std::uint8_t> alive_;
  std::vector<ExitRecord> exits_;
  double particle_mass_ = 0.0;
  DomainMode mode_ = DomainMode::HalfSpace;
  std::uint64_t seed_ = 0;
  double t_ = 0.0;
  std::uint32_t step_ = 0;
};

// Earliest s in (0, 1] where the cubic Hermite p with p(0) = x0, p(1) = x1,
// p'(0) = d0, p'(1) = d1 vanishes, or a negative value if p > 0 on (0, 1].
// x0 must be > 0. The slope p'(s) at the root is written to *slope.
double first_hermite_root(double x0, double x1, double d0, double d1, double* slope);

// Uniform bins on [x_min, x_max] x [v_min, v_max].
struct HistogramSpec {
  double x_min = 0.0, x_max = 1.0;
  std::size_t nx = 2;
  double v_min = -1.0, v_max = 1.0;
  std::size_t nv = 2;
  double bin_area() const;
};

// Densities at bin centres, stored as a GridFunction with axes (x, v).
struct Histogram {
  HistogramSpec spec;
  GridFunction density;
  GridFunction error;      // density / sqrt(count)
  std::vector<std::size_t> counts;
  double outside_mass = 0.0;
};

// Count density of the live particles scaled by the particle mass. Throws
// DomainError for an empty ensemble, and when require_cover is set and a live
// particle lies outside the bins.
Histogram histogram_density(const ParticleEnsemble& e, const HistogramSpec& bins, bool require_cover = true);

// Mean density of a solver field over the same bins (cells split by overlap).
GridFunction coarse_bin(const PhaseField& f, const HistogramSpec& bins);

// Sum |a - b| * area / sum |b| * area over bins.
double relative_l1(const GridFunction& a, const GridFunction& b);

struct WeightedMass {
  double value = 0.0;
  double stderr_ = 0.0;
};

// Monte-Carlo estimate of int f w over the live particles with its standard error.
WeightedMass weighted_mass(const ParticleEnsemble& e, const std::function<double(double, double)>& w);

}  // namespace kinfp
