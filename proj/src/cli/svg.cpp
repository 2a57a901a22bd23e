/*
 * Copyright 2026 The vulntriage Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "vulntriage/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace vulntriage::svg {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr std::array<const char*, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string open(double w, double h, const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\" font-size=\"11\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{3}</text>\n",
      w, h, w / 2.0, escape(title));
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
  double map(double v, double a, double b) const {
    return hi == lo ? (a + b) / 2.0 : a + (v - lo) / (hi - lo) * (b - a);
  }
};

Range range_of(const std::vector<double>& v) {
  if (v.empty()) return {};
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  Range r{*lo, *hi};
  if (r.lo == r.hi) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  return r;
}

std::string axes(const Range& xr, const Range& yr, const std::string& x_label,
                 const std::string& y_label) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::string out = fmt::format(
      "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{2:.1f}\" y2=\"{1:.1f}\" stroke=\"black\"/>\n"
      "<line x1=\"{0:.1f}\" y1=\"{1:.1f}\" x2=\"{0:.1f}\" y2=\"{3:.1f}\" stroke=\"black\"/>\n",
      x0, y0, x1, y1);
  for (int t = 0; t <= 4; ++t) {
    const double fx = xr.lo + (xr.hi - xr.lo) * t / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * t / 4.0;
    const double px = xr.map(fx, x0, x1), py = yr.map(fy, y0, y1);
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", px,
        y0 + 15.0, fx);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n",
                       x0 - 5.0, py + 4.0, fy);
  }
  out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
                     (x0 + x1) / 2.0, kHeight - 12.0, escape(x_label));
  out += fmt::format(
      "<text x=\"16\" y=\"{0:.1f}\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 16 {0:.1f})\">{1}</text>\n",
      (y0 + y1) / 2.0, escape(y_label));
  return out;
}

}  // namespace

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<double>& values) {
  const double label_width = 190.0;
  const double row = 24.0;
  const double h = kTop + row * static_cast<double>(values.size()) + 30.0;
  std::string out = open(kWidth, h, title);
  double max_v = 0.0;
  for (double v : values) max_v = std::max(max_v, v);
  const double span = kWidth - label_width - 80.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double y = kTop + row * static_cast<double>(i);
    const double w = max_v > 0.0 ? values[i] / max_v * span : 0.0;
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n"
        "<rect class=\"bar\" x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.2f}\" height=\"{:.1f}\" fill=\"{}\"/>\n"
        "<text x=\"{:.1f}\" y=\"{:.1f}\">{:.4g}</text>\n",
        label_width - 6.0, y + 15.0, escape(i < labels.size() ? labels[i] : ""), label_width,
        y + 3.0, w, row - 6.0, kPalette[0], label_width + w + 4.0, y + 15.0, values[i]);
  }
  return out + "</svg>\n";
}

std::string line_chart(const std::string& title, const std::vector<Series>& series,
                       const std::string& x_label, const std::string& y_label) {
  std::vector<double> xs, ys;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xs.push_back(x);
      ys.push_back(y);
    }
  }
  const Range xr = range_of(xs), yr = range_of(ys);
  std::string out = open(kWidth, kHeight, title) + axes(xr, yr, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % kPalette.size()];
    std::string pts;
    for (const auto& [x, y] : series[k].points) {
      pts += fmt::format("{:.2f},{:.2f} ", xr.map(x, kLeft, kWidth - kRight),
                         yr.map(y, kHeight - kBottom, kTop));
    }
    if (!pts.empty()) pts.pop_back();
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                       color, pts);
    out += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" fill=\"{}\">{}</text>\n", kWidth - kRight - 150.0,
        kHeight - kBottom - 12.0 - 14.0 * static_cast<double>(series.size() - 1 - k), color,
        escape(series[k].name));
  }
  return out + "</svg>\n";
}

std::string scatter(const std::string& title, const std::vector<ScatterPoint>& points,
                    const std::vector<std::string>& group_names) {
  std::vector<double> xs, ys;
  for (const auto& p : points) {
    xs.push_back(p.x);
    ys.push_back(p.y);
  }
  const Range xr = range_of(xs), yr = range_of(ys);
  std::string out = open(kWidth, kHeight, title) + axes(xr, yr, "component 1", "component 2");
  for (const auto& p : points) {
    out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"{}\" fill-opacity=\"0.7\"/>\n",
                       xr.map(p.x, kLeft, kWidth - kRight), yr.map(p.y, kHeight - kBottom, kTop),
                       kPalette[static_cast<std::size_t>(p.group) % kPalette.size()]);
  }
  for (std::size_t g = 0; g < group_names.size(); ++g) {
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" fill=\"{}\">{}</text>\n",
                       kWidth - kRight - 150.0, kTop + 14.0 * static_cast<double>(g),
                       kPalette[g % kPalette.size()], escape(group_names[g]));
  }
  return out + "</svg>\n";
}

std::string heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                    const std::vector<std::vector<double>>& values) {
  std::size_t cols = 0;
  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (const auto& r : values) {
    cols = std::max(cols, r.size());
    for (double v : r) {
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  const double label_width = 90.0;
  const double cell_w = cols ? std::max(4.0, (kWidth - label_width - kRight) / static_cast<double>(cols)) : 0.0;
  const double cell_h = 20.0;
  const double w = label_width + cell_w * static_cast<double>(cols) + kRight;
  const double h = kTop + cell_h * static_cast<double>(values.size()) + 30.0;
  std::string out = open(w, h, title);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double y = kTop + cell_h * static_cast<double>(i);
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n",
                       label_width - 6.0, y + 14.0,
                       escape(i < row_labels.size() ? row_labels[i] : ""));
    for (std::size_t j = 0; j < values[i].size(); ++j) {
      const double t = hi > lo ? (values[i][j] - lo) / (hi - lo) : 0.0;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - t)));
      out += fmt::format(
          "<rect x=\"{:.2f}\" y=\"{:.1f}\" width=\"{:.2f}\" height=\"{:.1f}\" "
          "fill=\"rgb(255,{},{})\"/>\n",
          label_width + cell_w * static_cast<double>(j), y, cell_w, cell_h - 1.0, shade, shade);
    }
  }
  out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">scale {:.4g} (white) to {:.4g} (red)</text>\n",
                     label_width, h - 10.0, lo, hi);
  return out + "</svg>\n";
}

}  // namespace vulntriage::svg
