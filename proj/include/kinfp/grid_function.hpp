#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kinfp/kinetic_group.hpp"

namespace kinfp {

// Uniform node-based axis: `count` nodes from `min` to `max` inclusive.
struct GridAxis {
  std::string name;
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 2;

  double spacing() const { return (max - min) / static_cast<double>(count - 1); }
  double node(std::size_t i) const { return min + spacing() * static_cast<double>(i); }
  // Trapezoid weight of node i.
  double weight(std::size_t i) const {
    const double h = spacing();
    return (i == 0 || i + 1 == count) ? 0.5 * h : h;
  }
};

// Samples on a tensor grid, row-major with the last axis fastest.
class GridFunction {
 public:
  explicit GridFunction(std::vector<GridAxis> axes, double fill = 0.0);

  static GridFunction sample(std::vector<GridAxis> axes,
                             const std::function<double(std::span<const double>)>& fn);
  // Sample over the standard (t, x, v) axes.
  static GridFunction sample_txv(const GridAxis& t, const GridAxis& x, const GridAxis& v,
                                 const std::function<double(const PhasePoint&)>& fn);

  std::size_t rank() const { return axes_.size(); }
  const std::vector<GridAxis>& axes() const { return axes_; }
  const GridAxis& axis(std::size_t k) const { return axes_.at(k); }
  // Index of the axis with the given name; throws if absent.
  std::size_t axis_index(const std::string& name) const;

  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::size_t flat(std::span<const std::size_t> idx) const;
  void unflat(std::size_t flat, std::span<std::size_t> idx) const;
  double& at(std::span<const std::size_t> idx) { return values_[flat(idx)]; }
  double at(std::span<const std::size_t> idx) const { return values_[flat(idx)]; }
  double& at(std::size_t i, std::size_t j, std::size_t k);
  double at(std::size_t i, std::size_t j, std::size_t k) const;

  // Node coordinates of a flat index.
  void coords(std::size_t flat, std::span<double> out) const;
  // Product trapezoid weight of a flat index.
  double weight(std::size_t flat) const;

  double volume() const;
  // Trapezoid quadrature of the samples.
  double integrate() const;
  // L^p norm by trapezoid quadrature; p = +inf gives max |value|.
  double lp_norm(double p) const;

  // Multilinear interpolation; throws std::out_of_range outside the box
  // (beyond a relative slack of 1e-12 of each axis length).
  double interpolate(std::span<const double> point) const;
  bool covers(std::span<const double> point) const;

  bool finite() const;
  bool nonnegative() const;

  // (t, x, v) box spanned by a rank-3 grid with axes named t, x, v.
  PhaseBox box_txv() const;

 private:
  std::vector<GridAxis> axes_;
  std::vector<std::size_t> strides_;
  std::vector<double> values_;
};

}  // namespace kinfp
