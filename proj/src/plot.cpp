#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "qbag/bench.hpp"
#include "qbag/error.hpp"
#include "qbag/metrics.hpp"

namespace qbag {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 62.0;
constexpr double kRight = 624.0;
constexpr double kTop = 34.0;
constexpr double kBottom = 374.0;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

struct SeriesPoint {
  std::size_t b = 0;
  double mean = 0.0;
  double std_dev = 0.0;
};

}  // namespace

std::string plot_svg(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "no rows to plot");
  const std::string& dataset = rows.front().dataset;
  const std::string& learner = rows.front().learner;
  const std::string& metric = rows.front().metric_kind;
  for (const ResultRow& r : rows) {
    if (r.dataset != dataset || r.learner != learner || r.metric_kind != metric) {
      throw Error(ErrorCode::InvalidArgument,
                  "plot rows must share one dataset, learner, and metric");
    }
  }

  std::map<double, std::map<std::size_t, std::vector<double>>> grouped;
  for (const ResultRow& r : rows) grouped[r.delta][r.b].push_back(r.test_metric);

  std::map<double, std::vector<SeriesPoint>> series;
  double y_min = 0.0, y_max = 0.0;
  std::size_t b_min = 0, b_max = 0;
  bool first = true;
  for (const auto& [delta, per_b] : grouped) {
    std::vector<SeriesPoint>& points = series[delta];
    for (const auto& [b, values] : per_b) {
      const RepeatSummary s = summarize_repeats(values);
      points.push_back({b, s.mean, s.std_dev});
      const double lo = s.mean - s.std_dev;
      const double hi = s.mean + s.std_dev;
      if (first) {
        y_min = lo;
        y_max = hi;
        b_min = b_max = b;
        first = false;
      } else {
        y_min = std::min(y_min, lo);
        y_max = std::max(y_max, hi);
        b_min = std::min(b_min, b);
        b_max = std::max(b_max, b);
      }
    }
  }

  if (y_max - y_min < 1e-9) {
    const double pad = std::max(0.05, std::abs(y_max) * 0.05);
    y_min -= pad;
    y_max += pad;
  } else {
    const double pad = (y_max - y_min) * 0.05;
    y_min -= pad;
    y_max += pad;
  }

  const auto x_of = [&](std::size_t b) {
    if (b_max == b_min) return (kLeft + kRight) / 2.0;
    const double t = static_cast<double>(b - b_min) / static_cast<double>(b_max - b_min);
    return kLeft + t * (kRight - kLeft);
  };
  const auto y_of = [&](double v) {
    const double t = (v - y_min) / (y_max - y_min);
    return kBottom - t * (kBottom - kTop);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
         num(kHeight) + "\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + num(kLeft) + "\" y=\"20.00\" font-family=\"monospace\" "
         "font-size=\"13\" fill=\"#222222\">" +
         dataset + " / " + learner + "</text>\n";

  for (int i = 0; i <= 4; ++i) {
    const double v = y_min + (y_max - y_min) * static_cast<double>(i) / 4.0;
    const double y = y_of(v);
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kRight) +
           "\" y2=\"" + num(y) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(kLeft - 6.0) + "\" y=\"" + num(y + 4.0) +
           "\" font-family=\"monospace\" font-size=\"11\" fill=\"#444444\" "
           "text-anchor=\"end\">" +
           tick_label(v) + "</text>\n";
  }

  std::vector<std::size_t> b_ticks;
  for (const auto& [delta, points] : series) {
    for (const SeriesPoint& p : points) {
      if (std::find(b_ticks.begin(), b_ticks.end(), p.b) == b_ticks.end()) {
        b_ticks.push_back(p.b);
      }
    }
  }
  std::sort(b_ticks.begin(), b_ticks.end());
  for (std::size_t b : b_ticks) {
    const double x = x_of(b);
    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(kBottom) + "\" x2=\"" + num(x) +
           "\" y2=\"" + num(kBottom + 5.0) + "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + num(x) + "\" y=\"" + num(kBottom + 18.0) +
           "\" font-family=\"monospace\" font-size=\"11\" fill=\"#444444\" "
           "text-anchor=\"middle\">" +
           std::to_string(b) + "</text>\n";
  }

  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kBottom) + "\" x2=\"" +
         num(kRight) + "\" y2=\"" + num(kBottom) +
         "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) +
         "\" y2=\"" + num(kBottom) + "\" stroke=\"#444444\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"" + num((kLeft + kRight) / 2.0) + "\" y=\"" + num(kHeight - 8.0) +
         "\" font-family=\"monospace\" font-size=\"12\" fill=\"#222222\" "
         "text-anchor=\"middle\">B (ensemble size)</text>\n";
  svg += "<text x=\"16.00\" y=\"" + num((kTop + kBottom) / 2.0) +
         "\" font-family=\"monospace\" font-size=\"12\" fill=\"#222222\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16.00 " +
         num((kTop + kBottom) / 2.0) + ")\">" +
         metric + "</text>\n";

  std::size_t color_index = 0;
  for (auto& [delta, points] : series) {
    std::sort(points.begin(), points.end(),
              [](const SeriesPoint& a, const SeriesPoint& b) { return a.b < b.b; });
    const char* color = kPalette[color_index % kPaletteSize];

    std::string band = "M";
    for (const SeriesPoint& p : points) {
      band += " " + num(x_of(p.b)) + " " + num(y_of(p.mean + p.std_dev));
    }
    for (auto it = points.rbegin(); it != points.rend(); ++it) {
      band += " L " + num(x_of(it->b)) + " " + num(y_of(it->mean - it->std_dev));
    }
    band += " Z";
    svg += "<path d=\"" + band + "\" fill=\"" + color +
           "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";

    std::string line;
    for (const SeriesPoint& p : points) {
      if (!line.empty()) line += " ";
      line += num(x_of(p.b)) + "," + num(y_of(p.mean));
    }
    svg += "<polyline points=\"" + line + "\" fill=\"none\" stroke=\"" + color +
           "\" stroke-width=\"1.5\"/>\n";
    for (const SeriesPoint& p : points) {
      svg += "<circle cx=\"" + num(x_of(p.b)) + "\" cy=\"" + num(y_of(p.mean)) +
             "\" r=\"2.50\" fill=\"" + std::string(color) + "\"/>\n";
    }

    char label[64];
    std::snprintf(label, sizeof(label), "delta=%.2f", delta);
    const double ly = kTop + 14.0 + 16.0 * static_cast<double>(color_index);
    svg += "<rect x=\"" + num(kRight - 110.0) + "\" y=\"" + num(ly - 8.0) +
           "\" width=\"10.00\" height=\"8.00\" fill=\"" + color + "\"/>\n";
    svg += "<text x=\"" + num(kRight - 96.0) + "\" y=\"" + num(ly) +
           "\" font-family=\"monospace\" font-size=\"11\" fill=\"#222222\">" + label +
           "</text>\n";
    ++color_index;
  }

  svg += "</svg>\n";
  return svg;
}

void emit_plot(const std::vector<ResultRow>& rows, const std::string& path) {
  const std::string svg = plot_svg(rows);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path);
  out << svg;
  if (!out) throw Error(ErrorCode::MissingFile, "write failed for " + path);
}

}  // namespace qbag
