#include "kinfp/grid_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kinfp {

GridFunction::GridFunction(std::vector<GridAxis> axes, double fill) : axes_(std::move(axes)) {
  if (axes_.empty()) throw std::invalid_argument("GridFunction: no axes");
  std::size_t n = 1;
  for (const auto& a : axes_) {
    if (a.count < 2) throw std::invalid_argument("GridFunction: axis '" + a.name + "' needs >= 2 nodes");
    if (!(a.max > a.min) || !std::isfinite(a.min) || !std::isfinite(a.max))
      throw std::invalid_argument("GridFunction: bad range on axis '" + a.name + "'");
    n *= a.count;
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t k = axes_.size() - 1; k > 0; --k) strides_[k - 1] = strides_[k] * axes_[k].count;
  values_.assign(n, fill);
}

GridFunction GridFunction::sample(std::vector<GridAxis> axes,
                                  const std::function<double(std::span<const double>)>& fn) {
  GridFunction g(std::move(axes));
  std::vector<double> pt(g.rank());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.coords(i, pt);
    g.values_[i] = fn(pt);
  }
  return g;
}

GridFunction GridFunction::sample_txv(const GridAxis& t, const GridAxis& x, const GridAxis& v,
                                      const std::function<double(const PhasePoint&)>& fn) {
  GridAxis ta = t, xa = x, va = v;
  ta.name = "t";
  xa.name = "x";
  va.name = "v";
  return sample({ta, xa, va}, [&](std::span<const double> p) { return fn({p[0], p[1], p[2]}); });
}

std::size_t GridFunction::axis_index(const std::string& name) const {
  for (std::size_t k = 0; k < axes_.size(); ++k)
    if (axes_[k].name == name) return k;
  throw std::invalid_argument("GridFunction: no axis named '" + name + "'");
}

std::size_t GridFunction::flat(std::span<const std::size_t> idx) const {
  std::size_t f = 0;
  for (std::size_t k = 0; k < axes_.size(); ++k) f += idx[k] * strides_[k];
  return f;
}

void GridFunction::unflat(std::size_t f, std::span<std::size_t> idx) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    idx[k] = f / strides_[k];
    f %= strides_[k];
  }
}

double& GridFunction::at(std::size_t i, std::size_t j, std::size_t k) {
  return values_[i * strides_[0] + j * strides_[1] + k];
}

double GridFunction::at(std::size_t i, std::size_t j, std::size_t k) const {
  return values_[i * strides_[0] + j * strides_[1] + k];
}

void GridFunction::coords(std::size_t f, std::span<double> out) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    out[k] = axes_[k].node(f / strides_[k]);
    f %= strides_[k];
  }
}

double GridFunction::weight(std::size_t f) const {
  double w = 1.0;
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    w *= axes_[k].weight(f / strides_[k]);
    f %= strides_[k];
  }
  return w;
}

double GridFunction::volume() const {
  double v = 1.0;
  for (const auto& a : axes_) v *= a.max - a.min;
  return v;
}

double GridFunction::integrate() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += weight(i) * values_[i];
  return s;
}

double GridFunction::lp_norm(double p) const {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::fabs(x));
    return m;
  }
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += weight(i) * std::pow(std::fabs(values_[i]), p);
  return std::pow(s, 1.0 / p);
}

bool GridFunction::covers(std::span<const double> point) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const double slack = 1e-12 * (axes_[k].max - axes_[k].min);
    if (point[k] < axes_[k].min - slack || point[k] > axes_[k].max + slack) return false;
  }
  return true;
}

double GridFunction::interpolate(std::span<const double> point) const {
  if (point.size() != axes_.size()) throw std::invalid_argument("interpolate: rank mismatch");
  if (!covers(point)) throw std::out_of_range("interpolate: point outside grid box");
  const std::size_t r = axes_.size();
  std::size_t base[8];
  double frac[8];
  if (r > 8) throw std::invalid_argument("interpolate: rank > 8 unsupported");
  for (std::size_t k = 0; k < r; ++k) {
    const double s = (point[k] - axes_[k].min) / axes_[k].spacing();
    const double cell = std::clamp(std::floor(s), 0.0, static_cast<double>(axes_[k].count - 2));
    base[k] = static_cast<std::size_t>(cell);
    frac[k] = std::clamp(s - cell, 0.0, 1.0);
  }
  double acc = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << r); ++corner) {
    double w = 1.0;
    std::size_t f = 0;
    for (std::size_t k = 0; k < r; ++k) {
      const bool up = (corner >> k) & 1U;
      w *= up ? frac[k] : 1.0 - frac[k];
      f += (base[k] + (up ? 1 : 0)) * strides_[k];
    }
    if (w != 0.0) acc += w * values_[f];
  }
  return acc;
}

bool GridFunction::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

bool GridFunction::nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return x >= 0.0; });
}

PhaseBox GridFunction::box_txv() const {
  if (rank() != 3) throw std::invalid_argument("box_txv: rank-3 grid required");
  const auto& t = axes_[axis_index("t")];
  const auto& x = axes_[axis_index("x")];
  const auto& v = axes_[axis_index("v")];
  if (axis_index("t") != 0 || axis_index("x") != 1 || axis_index("v") != 2)
    throw std::invalid_argument("box_txv: axes must be ordered (t, x, v)");
  return {t.min, t.max, x.min, x.max, v.min, v.max};
}

}  // namespace kinfp
