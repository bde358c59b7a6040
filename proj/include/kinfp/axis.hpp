#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace kinfp {

// One-dimensional cell partition description.
//   Uniform: `count` equal cells on [min, max].
//   Graded:  cells of width finest * ratio^k growing away from `anchor`
//            (capped at max_width); the outermost cell on each side is
//            clipped to the bound, or merged into its neighbour if the
//            remainder is under half a cell.
struct AxisSpec {
  enum class Kind { Uniform, Graded };
  Kind kind = Kind::Uniform;
  double min = 0.0;
  double max = 1.0;
  std::size_t count = 0;
  double anchor = 0.0;
  double finest = 0.0;
  double ratio = 1.0;
  double max_width = std::numeric_limits<double>::infinity();

  static AxisSpec uniform(double min, double max, std::size_t count);
  static AxisSpec graded(double min, double max, double anchor, double finest, double ratio,
                         double max_width = std::numeric_limits<double>::infinity());
  // Same layout with every cell split roughly in `factor` parts.
  AxisSpec refined(double factor = 2.0) const;
};

class CellAxis {
 public:
  explicit CellAxis(const AxisSpec& spec);
  // Faces must be strictly increasing, at least two.
  explicit CellAxis(std::vector<double> faces);

  std::size_t size() const { return widths_.size(); }
  std::span<const double> faces() const { return faces_; }
  std::span<const double> centers() const { return centers_; }
  std::span<const double> widths() const { return widths_; }
  double face(std::size_t k) const { return faces_[k]; }
  double center(std::size_t i) const { return centers_[i]; }
  double width(std::size_t i) const { return widths_[i]; }
  double min() const { return faces_.front(); }
  double max() const { return faces_.back(); }
  double min_width() const;
  // Index of the cell containing y, clamped to [0, size() - 1].
  std::size_t locate(double y) const;
  // Largest i with center(i) <= y, clamped so that i + 1 is valid.
  std::size_t center_bracket(double y) const;

 private:
  void finish();
  std::vector<double> faces_, centers_, widths_;
};

}  // namespace kinfp
