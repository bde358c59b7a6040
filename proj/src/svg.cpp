#include "kinfp/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace kinfp {

namespace {

constexpr double kWidth = 640, kHeight = 440;
constexpr double kLeft = 80, kRight = 150, kTop = 40, kBottom = 60;

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      const double m = std::isfinite(lo) ? lo : 0.0;
      lo = m - 0.5;
      hi = m + 0.5;
    }
  }
};

// Palette stops (viridis-like), interpolated linearly.
std::string colour(double u) {
  static constexpr std::array<std::array<int, 3>, 5> stops{
      {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  u = std::clamp(u, 0.0, 1.0) * (stops.size() - 1);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(u), stops.size() - 2);
  const double w = u - k;
  int rgb[3];
  for (int c = 0; c < 3; ++c) rgb[c] = static_cast<int>(std::lround(stops[k][c] * (1 - w) + stops[k + 1][c] * w));
  return fmt::format("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2]);
}

std::string header(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
      kWidth, kHeight, kWidth, kHeight, (kLeft + kWidth - kRight) / 2, escape(title));
}

std::string tick_label(double v, bool log) { return log ? fmt::format("1e{:g}", v) : fmt::format("{:.3g}", v); }

}  // namespace

std::string svg_line_plot(const PlotAxes& axes, std::span<const PlotSeries> series) {
  const auto tx = [&](double v) { return axes.logx ? std::log10(v) : v; };
  const auto ty = [&](double v) { return axes.logy ? std::log10(v) : v; };
  const auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!axes.logx || x > 0) && (!axes.logy || y > 0);
  };
  Range rx, ry;
  for (const auto& s : series)
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k)
      if (usable(s.x[k], s.y[k])) rx.add(tx(s.x[k])), ry.add(ty(s.y[k]));
  rx.pad();
  ry.pad();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const auto px = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
  const auto py = [&](double v) { return kTop + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::string out = header(axes.title);
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                     kTop, pw, ph);
  for (int k = 0; k <= 4; ++k) {
    const double vx = rx.lo + (rx.hi - rx.lo) * k / 4, vy = ry.lo + (ry.hi - ry.lo) * k / 4;
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", px(vx), kTop + ph + 18,
                       tick_label(vx, axes.logx));
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6, py(vy) + 4,
                       tick_label(vy, axes.logy));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2, kHeight - 16,
                     escape(axes.xlabel));
  out += fmt::format("<text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
                     kTop + ph / 2, kTop + ph / 2, escape(axes.ylabel));
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto c = colour(series.size() > 1 ? static_cast<double>(s) / (series.size() - 1) * 0.85 : 0.0);
    std::string pts;
    for (std::size_t k = 0; k < std::min(series[s].x.size(), series[s].y.size()); ++k) {
      if (!usable(series[s].x[k], series[s].y[k])) continue;
      const double X = px(tx(series[s].x[k])), Y = py(ty(series[s].y[k]));
      pts += fmt::format("{:.2f},{:.2f} ", X, Y);
      if (series[s].markers) out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\"/>\n", X, Y, c);
    }
    if (!pts.empty())
      out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", c, pts);
    const double ly = kTop + 14 + 18 * s;
    out += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n",
                       kWidth - kRight + 10, ly, kWidth - kRight + 30, ly, c);
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kWidth - kRight + 35, ly + 4, escape(series[s].label));
  }
  out += "</svg>\n";
  return out;
}

std::string svg_heatmap(const std::string& title, std::span<const double> values, std::size_t nx, std::size_t ny,
                        double x0, double x1, double y0, double y1, bool log_scale) {
  if (values.size() != nx * ny || nx == 0 || ny == 0) throw std::invalid_argument("svg_heatmap: shape mismatch");
  double vmax = -std::numeric_limits<double>::infinity();
  for (double v : values)
    if (std::isfinite(v)) vmax = std::max(vmax, v);
  const auto map = [&](double v) {
    if (!std::isfinite(v)) return 0.0;
    if (log_scale) {
      const double floor = vmax > 0 ? vmax * 1e-8 : 1e-300;
      return std::log10(std::max(v, floor));
    }
    return v;
  };
  Range r;
  for (double v : values) r.add(map(v));
  r.pad();
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double cw = pw / nx, chh = ph / ny;
  std::string out = header(title);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const double u = (map(values[i * ny + j]) - r.lo) / (r.hi - r.lo);
      out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                         kLeft + i * cw, kTop + ph - (j + 1) * chh, cw + 0.05, chh + 0.05, colour(u));
    }
  out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", kLeft,
                     kTop, pw, ph);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"start\">{:.3g}</text>\n", kLeft, kTop + ph + 18, x0);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft + pw, kTop + ph + 18, x1);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 6, kTop + ph, y0);
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 6, kTop + 10, y1);
  for (int k = 0; k < 4; ++k)
    out += fmt::format("<rect x=\"{}\" y=\"{:.2f}\" width=\"16\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                       kWidth - kRight + 20, kTop + ph - (k + 1) * ph / 4, ph / 4, colour((k + 0.5) / 4));
  for (int k = 0; k <= 4; ++k) {
    const double v = r.lo + k / 4.0 * (r.hi - r.lo);
    out += fmt::format("<text x=\"{}\" y=\"{:.2f}\">{}</text>\n", kWidth - kRight + 42, kTop + ph - k * ph / 4 + 4,
                       log_scale ? fmt::format("1e{:.2g}", v) : fmt::format("{:.3g}", v));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace kinfp
