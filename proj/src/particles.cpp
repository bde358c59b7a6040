#include "kinfp/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "kinfp/errors.hpp"

namespace kinfp {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
// Step index reserved for drawing the initial positions.
constexpr std::uint32_t kInitStep = std::numeric_limits<std::uint32_t>::max();

// Uniform in (0, 1) from 64 random bits (53-bit mantissa, never 0).
double to_unit(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

std::array<double, 2> uniforms(const Philox4x32& gen, std::uint64_t particle, std::uint32_t step,
                               std::uint32_t lane) {
  const auto r = gen({static_cast<std::uint32_t>(particle), static_cast<std::uint32_t>(particle >> 32), step, lane});
  return {to_unit(r[0], r[1]), to_unit(r[2], r[3])};
}

double bump_mass(const GaussianBump& b) {
  return b.amplitude * 2.0 * std::numbers::pi * b.sx * b.sv * (1.0 - std::exp(-0.5 * b.cutoff * b.cutoff));
}

}  // namespace

Philox4x32::Counter Philox4x32::operator()(Counter ctr) const {
  auto key = key_;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::array<double, 2> philox_normals(const Philox4x32& gen, std::uint64_t particle, std::uint32_t step,
                                     std::uint32_t lane) {
  const auto [u1, u2] = uniforms(gen, particle, step, lane);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

KineticIncrement::KineticIncrement(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw NumericalError(fmt::format("kinetic increment: covariance not positive definite for dt = {}", dt));
  l11 = std::sqrt(2.0 * dt);
  l21 = dt * std::sqrt(dt) / std::numbers::sqrt2;
  l22 = dt * std::sqrt(dt / 6.0);
}

ParticleEnsemble::ParticleEnsemble(std::vector<double> x, std::vector<double> v, double total_mass, DomainMode mode,
                                   std::uint64_t seed)
    : x_(std::move(x)), v_(std::move(v)), alive_(x_.size(), 1), mode_(mode), seed_(seed) {
  if (x_.size() != v_.size()) throw ConfigError("particles: x and v sizes differ");
  if (!(total_mass >= 0.0)) throw ConfigError("particles: total mass must be nonnegative");
  particle_mass_ = x_.empty() ? 0.0 : total_mass / static_cast<double>(x_.size());
  if (mode_ == DomainMode::HalfSpace)
    for (double q : x_)
      if (!(q > 0.0)) throw ConfigError("particles: half-space particles need x > 0");
}

ParticleEnsemble ParticleEnsemble::sample(const InitialData& f_in, std::size_t n, DomainMode mode,
                                          std::uint64_t seed) {
  if (f_in.custom) throw ConfigError("particles: only Gaussian-bump initial data can be sampled");
  std::vector<double> cum;
  double total = 0.0;
  for (const auto& b : f_in.bumps) {
    if (!(b.amplitude >= 0.0) || !(b.sx > 0.0) || !(b.sv > 0.0) || !(b.cutoff > 0.0))
      throw ConfigError("particles: bump needs amplitude >= 0 and positive widths and cutoff");
    if (mode == DomainMode::HalfSpace && !(b.x0 - b.cutoff * b.sx > 0.0))
      throw ConfigError("particles: bump support reaches x <= 0");
    total += bump_mass(b);
    cum.push_back(total);
  }
  if (n > 0 && !(total > 0.0)) throw ConfigError("particles: initial data has no mass");
  const Philox4x32 gen(seed);
  std::vector<double> x(n), v(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto [u0, u1] = uniforms(gen, k, kInitStep, 0);
    const double u2 = uniforms(gen, k, kInitStep, 1)[0];
    const auto it = std::lower_bound(cum.begin(), cum.end(), u0 * total);
    const auto& b = f_in.bumps[std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1)];
    // radius of a standard 2-D Gaussian truncated at the cutoff
    const double tail = std::exp(-0.5 * b.cutoff * b.cutoff);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1 * (1.0 - tail)));
    const double a = 2.0 * std::numbers::pi * u2;
    x[k] = b.x0 + b.sx * r * std::cos(a);
    v[k] = b.v0 + b.sv * r * std::sin(a);
  }
  return ParticleEnsemble(std::move(x), std::move(v), n > 0 ? total : 0.0, mode, seed);
}

std::size_t ParticleEnsemble::alive_count() const {
  return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), std::uint8_t{1}));
}

double first_hermite_root(double x0, double x1, double d0, double d1, double* slope) {
  const double a = 2.0 * x0 + d0 - 2.0 * x1 + d1;
  const double b = -3.0 * x0 - 2.0 * d0 + 3.0 * x1 - d1;
  const double c = d0;
  const auto p = [&](double s) { return ((a * s + b) * s + c) * s + x0; };
  const auto dp = [&](double s) { return (3.0 * a * s + 2.0 * b) * s + c; };
  // monotone pieces between the critical points in (0, 1)
  std::array<double, 4> cuts{0.0, 1.0, 1.0, 1.0};
  std::size_t m = 1;
  const double qa = 3.0 * a, qb = 2.0 * b;
  if (qa != 0.0) {
    const double disc = qb * qb - 4.0 * qa * c;
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (qb + std::copysign(sq, qb));
      std::array<double, 2> r{q / qa, q != 0.0 ? c / q : q / qa};
      std::sort(r.begin(), r.end());
      for (double s : r)
        if (s > 0.0 && s < 1.0) cuts[m++] = s;
    }
  } else if (qb != 0.0) {
    const double s = -c / qb;
    if (s > 0.0 && s < 1.0) cuts[m++] = s;
  }
  cuts[m] = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    double lo = cuts[k], hi = cuts[k + 1];
    if (p(hi) > 0.0) continue;
    // p(lo) > 0 >= p(hi) on a monotone piece
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (p(mid) > 0.0 ? lo : hi) = mid;
    }
    if (slope) *slope = dp(hi);
    return hi;
  }
  return -1.0;
}

void ParticleEnsemble::simulate(double dt, double t_end) {
  if (!(dt > 0.0)) throw NumericalError(fmt::format("particles: covariance not positive definite for dt = {}", dt));
  if (dt > 1e-2) throw ConfigError(fmt::format("particles: dt = {} exceeds the crossing-detection limit 1e-2", dt));
  const Philox4x32 gen(seed_);
  const bool wall = mode_ == DomainMode::HalfSpace;
  while (t_ < t_end - 1e-12 * std::max(1.0, t_end)) {
    const double h = std::min(dt, t_end - t_);
    const KineticIncrement inc(h);
    const std::size_t n = size();
    for (std::size_t k = 0; k < n; ++k) {
      if (!alive_[k]) continue;
      const auto [z1, z2] = philox_normals(gen, k, step_);
      const double x0 = x_[k], v0 = v_[k];
      const double v1 = v0 + inc.l11 * z1;
      const double x1 = x0 + v0 * h + inc.l21 * z1 + inc.l22 * z2;
      if (wall) {
        double slope = 0.0;
        const double s = first_hermite_root(x0, x1, v0 * h, v1 * h, &slope);
        if (s >= 0.0) {
          // slope <= 0 at a first zero; a tangential touch still exits
          const double vexit = std::min(slope / h, -std::numeric_limits<double>::denorm_min());
          exits_.push_back({k, t_ + s * h, vexit});
          alive_[k] = 0;
          x_[k] = 0.0;
          v_[k] = vexit;
          continue;
        }
      }
      x_[k] = x1;
      v_[k] = v1;
    }
    t_ = (t_end - t_ - h <= 1e-12 * std::max(1.0, t_end)) ? t_end : t_ + h;
    ++step_;
  }
}

std::string ParticleEnsemble::exits_csv() const {
  std::string out = "particle,time,velocity\n";
  for (const auto& e : exits_) out += fmt::format("{},{:.12g},{:.12g}\n", e.particle, e.time, e.velocity);
  return out;
}

double HistogramSpec::bin_area() const {
  return (x_max - x_min) / static_cast<double>(nx) * (v_max - v_min) / static_cast<double>(nv);
}

namespace {

void check_bins(const HistogramSpec& b) {
  if (b.nx < 2 || b.nv < 2) throw ConfigError("histogram: need at least 2 bins per axis");
  if (!(b.x_max > b.x_min) || !(b.v_max > b.v_min)) throw ConfigError("histogram: empty bin range");
}

std::vector<GridAxis> bin_axes(const HistogramSpec& b) {
  const double dx = (b.x_max - b.x_min) / static_cast<double>(b.nx);
  const double dv = (b.v_max - b.v_min) / static_cast<double>(b.nv);
  return {GridAxis{"x", b.x_min + 0.5 * dx, b.x_max - 0.5 * dx, b.nx},
          GridAxis{"v", b.v_min + 0.5 * dv, b.v_max - 0.5 * dv, b.nv}};
}

}  // namespace

Histogram histogram_density(const ParticleEnsemble& e, const HistogramSpec& bins, bool require_cover) {
  check_bins(bins);
  if (e.alive_count() == 0) throw DomainError("histogram: no live particles");
  Histogram h{bins, GridFunction(bin_axes(bins)), GridFunction(bin_axes(bins)), std::vector<std::size_t>(bins.nx * bins.nv, 0),
              0.0};
  const double dx = (bins.x_max - bins.x_min) / static_cast<double>(bins.nx);
  const double dv = (bins.v_max - bins.v_min) / static_cast<double>(bins.nv);
  std::size_t outside = 0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (!e.alive(k)) continue;
    const double fx = (e.x()[k] - bins.x_min) / dx, fv = (e.v()[k] - bins.v_min) / dv;
    if (!(fx >= 0.0 && fx < static_cast<double>(bins.nx) && fv >= 0.0 && fv < static_cast<double>(bins.nv))) {
      if (require_cover)
        throw DomainError(fmt::format("histogram: live particle at ({}, {}) outside the bins", e.x()[k], e.v()[k]));
      ++outside;
      continue;
    }
    ++h.counts[static_cast<std::size_t>(fx) * bins.nv + static_cast<std::size_t>(fv)];
  }
  const double scale = e.particle_mass() / bins.bin_area();
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    const double c = static_cast<double>(h.counts[k]);
    h.density.values()[k] = c * scale;
    h.error.values()[k] = c > 0.0 ? std::sqrt(c) * scale : 0.0;
  }
  h.outside_mass = static_cast<double>(outside) * e.particle_mass();
  return h;
}

GridFunction coarse_bin(const PhaseField& f, const HistogramSpec& bins) {
  check_bins(bins);
  GridFunction out(bin_axes(bins));
  const double dx = (bins.x_max - bins.x_min) / static_cast<double>(bins.nx);
  const double dv = (bins.v_max - bins.v_min) / static_cast<double>(bins.nv);
  // overlaps of cells with bins along one axis: (cell, bin, length)
  struct Piece {
    std::size_t cell, bin;
    double len;
  };
  const auto pieces = [](const CellAxis& ax, double lo, double w, std::size_t nb) {
    std::vector<Piece> out;
    for (std::size_t i = 0; i < ax.size(); ++i) {
      const double a = ax.face(i), b = ax.face(i + 1);
      const double fa = std::floor((a - lo) / w);
      for (double k = std::max(0.0, fa); k < static_cast<double>(nb); k += 1.0) {
        const double b0 = lo + k * w, b1 = b0 + w;
        if (b0 >= b) break;
        const double len = std::min(b, b1) - std::max(a, b0);
        if (len > 0.0) out.push_back({i, static_cast<std::size_t>(k), len});
      }
    }
    return out;
  };
  const auto px = pieces(f.x_axis(), bins.x_min, dx, bins.nx);
  const auto pv = pieces(f.v_axis(), bins.v_min, dv, bins.nv);
  auto vals = out.values();
  for (const auto& a : px)
    for (const auto& b : pv) vals[a.bin * bins.nv + b.bin] += f(a.cell, b.cell) * a.len * b.len;
  const double area = bins.bin_area();
  for (double& q : vals) q /= area;
  return out;
}

double relative_l1(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw DomainError("relative_l1: shapes differ");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    num += std::fabs(a.values()[k] - b.values()[k]);
    den += std::fabs(b.values()[k]);
  }
  if (!(den > 0.0)) throw DomainError("relative_l1: reference is zero");
  return num / den;
}

WeightedMass weighted_mass(const ParticleEnsemble& e, const std::function<double(double, double)>& w) {
  const std::size_t n = e.size();
  if (n == 0) return {};
  double s = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!e.alive(k)) continue;
    const double y = w(e.x()[k], e.v()[k]);
    s += y;
    s2 += y * y;
  }
  const double nd = static_cast<double>(n);
  const double mean = s / nd;
  const double var = n > 1 ? std::max(0.0, (s2 - nd * mean * mean) / (nd - 1.0)) : 0.0;
  return {e.particle_mass() * s, e.particle_mass() * nd * std::sqrt(var / nd)};
}

}  // namespace kinfp
