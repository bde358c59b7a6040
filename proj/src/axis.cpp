#include "kinfp/axis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kinfp {

AxisSpec AxisSpec::uniform(double min, double max, std::size_t count) {
  AxisSpec s;
  s.kind = Kind::Uniform;
  s.min = min;
  s.max = max;
  s.count = count;
  return s;
}

AxisSpec AxisSpec::graded(double min, double max, double anchor, double finest, double ratio, double max_width) {
  AxisSpec s;
  s.kind = Kind::Graded;
  s.min = min;
  s.max = max;
  s.anchor = anchor;
  s.finest = finest;
  s.ratio = ratio;
  s.max_width = max_width;
  return s;
}

AxisSpec AxisSpec::refined(double factor) const {
  if (!(factor >= 1.0)) throw std::invalid_argument("AxisSpec::refined: factor must be >= 1");
  AxisSpec s = *this;
  if (kind == Kind::Uniform) {
    s.count = static_cast<std::size_t>(std::llround(static_cast<double>(count) * factor));
  } else {
    s.finest = finest / factor;
    s.ratio = std::pow(ratio, 1.0 / factor);
    s.max_width = max_width / factor;
  }
  return s;
}

namespace {

// Faces from the anchor outward to `bound` (exclusive of the anchor itself).
std::vector<double> grow(double anchor, double bound, double finest, double ratio, double cap) {
  std::vector<double> out;
  const double span = std::fabs(bound - anchor);
  if (span == 0.0) return out;
  const double dir = bound > anchor ? 1.0 : -1.0;
  double pos = 0.0, w = finest;
  while (true) {
    const double next = pos + w;
    if (next >= span) {
      // clip, or merge a thin remainder into the previous cell
      if (!out.empty() && span - pos < 0.5 * w) out.back() = bound;
      else out.push_back(bound);
      break;
    }
    pos = next;
    out.push_back(anchor + dir * pos);
    w = std::min(w * ratio, cap);
    if (out.size() > 50'000'000) throw std::invalid_argument("AxisSpec: graded axis has too many cells");
  }
  return out;
}

}  // namespace

CellAxis::CellAxis(const AxisSpec& s) {
  if (!(s.max > s.min)) throw std::invalid_argument("CellAxis: max must exceed min");
  if (s.kind == AxisSpec::Kind::Uniform) {
    if (s.count < 1) throw std::invalid_argument("CellAxis: count must be >= 1");
    faces_.resize(s.count + 1);
    for (std::size_t k = 0; k <= s.count; ++k)
      faces_[k] = s.min + (s.max - s.min) * static_cast<double>(k) / static_cast<double>(s.count);
    faces_.back() = s.max;
  } else {
    if (!(s.anchor >= s.min && s.anchor <= s.max)) throw std::invalid_argument("CellAxis: anchor outside [min, max]");
    if (!(s.finest > 0.0)) throw std::invalid_argument("CellAxis: finest width must be positive");
    if (!(s.ratio >= 1.0)) throw std::invalid_argument("CellAxis: ratio must be >= 1");
    if (!(s.max_width >= s.finest)) throw std::invalid_argument("CellAxis: max_width below finest");
    auto left = grow(s.anchor, s.min, s.finest, s.ratio, s.max_width);
    auto right = grow(s.anchor, s.max, s.finest, s.ratio, s.max_width);
    std::reverse(left.begin(), left.end());
    faces_ = std::move(left);
    faces_.push_back(s.anchor);
    faces_.insert(faces_.end(), right.begin(), right.end());
    if (faces_.front() != s.min) faces_.insert(faces_.begin(), s.min);
    if (faces_.back() != s.max) faces_.push_back(s.max);
  }
  finish();
}

CellAxis::CellAxis(std::vector<double> faces) : faces_(std::move(faces)) { finish(); }

void CellAxis::finish() {
  if (faces_.size() < 2) throw std::invalid_argument("CellAxis: need at least two faces");
  for (std::size_t k = 1; k < faces_.size(); ++k)
    if (!(faces_[k] > faces_[k - 1])) throw std::invalid_argument("CellAxis: faces must increase strictly");
  const std::size_t n = faces_.size() - 1;
  centers_.resize(n);
  widths_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    centers_[i] = 0.5 * (faces_[i] + faces_[i + 1]);
    widths_[i] = faces_[i + 1] - faces_[i];
  }
}

double CellAxis::min_width() const { return *std::min_element(widths_.begin(), widths_.end()); }

std::size_t CellAxis::locate(double y) const {
  const auto it = std::upper_bound(faces_.begin(), faces_.end(), y);
  if (it == faces_.begin()) return 0;
  const auto k = static_cast<std::size_t>(it - faces_.begin()) - 1;
  return std::min(k, size() - 1);
}

std::size_t CellAxis::center_bracket(double y) const {
  if (size() < 2) return 0;
  const auto it = std::upper_bound(centers_.begin(), centers_.end(), y);
  if (it == centers_.begin()) return 0;
  const auto k = static_cast<std::size_t>(it - centers_.begin()) - 1;
  return std::min(k, size() - 2);
}

}  // namespace kinfp
