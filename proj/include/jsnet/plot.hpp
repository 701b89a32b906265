#pragma once

// Static SVG line plots of sweep CSV content: one series per
// (algorithm, topology), y = per-point mean of a metric.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "jsnet/error.hpp"
#include "jsnet/harness.hpp"

namespace jsnet {

struct PlotSpec {
  std::string x = "m";      // "m" or "V"
  std::string y = "ase";    // ase, pesr, rse, iterations, bits
  bool log_y = false;
  std::vector<std::string> series;  // "algorithm" or "algorithm/topology"; empty = all
  std::string title;
  int width = 640;
  int height = 420;
};

struct Series {
  std::string label;  // "algorithm/topology"
  std::vector<std::pair<double, double>> points;  // sorted by x
};

namespace detail {

inline double metric_of(const SweepRow& r, const std::string& name) {
  if (name == "ase") return r.ase;
  if (name == "pesr") return r.pesr;
  if (name == "rse") return r.rse;
  if (name == "iterations") return static_cast<double>(r.iterations);
  if (name == "bits") return static_cast<double>(r.total_bits);
  throw InvalidParameter("unknown plot metric '" + name + "'");
}

inline double axis_of(const SweepRow& r, const std::string& name) {
  if (name == "m") return static_cast<double>(r.m);
  if (name == "V") return static_cast<double>(r.nodes);
  throw InvalidParameter("plot x axis must be 'm' or 'V'");
}

inline std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

}  // namespace detail

/// Groups rows into series and averages the metric per x value. Every
/// requested series must match at least one row.
inline std::vector<Series> collect_series(const std::vector<SweepRow>& rows, const PlotSpec& spec) {
  std::map<std::string, std::map<double, std::pair<double, std::size_t>>> acc;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    const std::string label = r.algorithm + "/" + r.topology;
    const bool wanted = spec.series.empty() ||
                        std::any_of(spec.series.begin(), spec.series.end(),
                                    [&](const std::string& s) { return s == label || s == r.algorithm; });
    if (!wanted) continue;
    if (!acc.count(label)) order.push_back(label);
    auto& cell = acc[label][detail::axis_of(r, spec.x)];
    cell.first += detail::metric_of(r, spec.y);
    ++cell.second;
  }
  for (const auto& s : spec.series) {
    const bool found = std::any_of(order.begin(), order.end(), [&](const std::string& label) {
      return label == s || label.substr(0, label.find('/')) == s;
    });
    if (!found) throw MissingSeries("no rows for series '" + s + "'");
  }
  if (order.empty()) throw MissingSeries("no rows to plot");
  std::vector<Series> out;
  for (const auto& label : order) {
    Series s{label, {}};
    for (const auto& [x, cell] : acc[label]) s.points.emplace_back(x, cell.first / static_cast<double>(cell.second));
    out.push_back(std::move(s));
  }
  return out;
}

/// With a log axis, values <= 0 are drawn on the bottom edge.
inline std::string render_svg(const std::vector<Series>& series, const PlotSpec& spec) {
  const double left = 70, right = 170, top = 40, bottom = 50;
  const double w = spec.width, h = spec.height;
  const double pw = w - left - right, ph = h - top - bottom;

  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY, pos_min = INFINITY;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
      if (y > 0) pos_min = std::min(pos_min, y);
    }
  if (xmax == xmin) {
    xmin -= 1;
    xmax += 1;
  }

  std::vector<double> yticks;
  double lo, hi;
  if (spec.log_y) {
    if (!std::isfinite(pos_min)) pos_min = ymax > 0 ? ymax : 1.0;
    const double top_val = ymax > 0 ? ymax : pos_min;
    lo = std::floor(std::log10(pos_min));
    hi = std::ceil(std::log10(top_val));
    if (hi <= lo) hi = lo + 1;
    for (double e = lo; e <= hi; e += 1) yticks.push_back(e);
  } else {
    lo = std::min(0.0, ymin);
    hi = ymax > lo ? ymax : lo + 1;
    for (int i = 0; i <= 5; ++i) yticks.push_back(lo + (hi - lo) * i / 5.0);
  }
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) {
    double t = spec.log_y ? (y > 0 ? std::log10(y) : lo) : y;
    t = std::clamp(t, lo, hi);
    return top + (1.0 - (t - lo) / (hi - lo)) * ph;
  };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
     << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!spec.title.empty())
    os << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << spec.title
       << "</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (double t : yticks) {
    const double y = top + (1.0 - (t - lo) / (hi - lo)) * ph;
    const std::string label = spec.log_y ? "1e" + detail::short_number(t) : detail::short_number(t);
    os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << y << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << label << "</text>\n";
  }
  std::vector<double> xs;
  for (const auto& s : series)
    for (auto [x, y] : s.points) xs.push_back(x);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  for (double x : xs)
    os << "<text x=\"" << px(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << detail::short_number(x) << "</text>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">" << spec.x << "</text>\n";
  os << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << spec.y
     << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = palette[i % std::size(palette)];
    const auto& s = series[i];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (auto [x, y] : s.points) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    for (auto [x, y] : s.points)
      os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = top + 10 + 20.0 * static_cast<double>(i);
    os << "<line x1=\"" << left + pw + 12 << "\" x2=\"" << left + pw + 36 << "\" y1=\"" << ly << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << s.label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline void emit_plot(const std::vector<SweepRow>& rows, const PlotSpec& spec, const std::filesystem::path& path) {
  const auto svg = render_svg(collect_series(rows, spec), spec);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << svg;
}

}  // namespace jsnet
