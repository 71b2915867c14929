#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "subthz/io.hpp"

namespace subthz {
namespace {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y), x-sorted
};

const char* kPalette[] = {"#1b6ca8", "#d1495b", "#2e933c", "#8a4fff",
                          "#e09f3e", "#13808b", "#6c464f", "#3d3d3d"};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

// Tick positions covering [lo, hi] with a 1/2/5 step.
std::vector<double> linear_ticks(double lo, double hi) {
  double range = hi - lo;
  if (!(range > 0)) return {lo};
  double raw = range / 5.0;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  double t = std::ceil(lo / step - 1e-9) * step;
  for (; t <= hi + 1e-9 * range; t += step) ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  return ticks;
}

void render_line_plot(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series, bool log_y) {
  const double width = 640, height = 440;
  const double ml = 70, mr = 160, mt = 40, mb = 55;
  const double pw = width - ml - mr, ph = height - mt - mb;

  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
  bool any = false;
  for (const Series& s : series)
    for (auto [x, y] : s.points) {
      if (log_y && !(y > 0)) continue;
      double yy = log_y ? std::log10(y) : y;
      if (!any) {
        x_lo = x_hi = x;
        y_lo = y_hi = yy;
        any = true;
      } else {
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
        y_lo = std::min(y_lo, yy);
        y_hi = std::max(y_hi, yy);
      }
    }
  if (!any) { x_lo = 0; x_hi = 1; y_lo = 0; y_hi = 1; }
  if (x_hi - x_lo < 1e-12) { x_lo -= 0.5; x_hi += 0.5; }
  if (y_hi - y_lo < 1e-12) { y_lo -= 0.5; y_hi += 0.5; }
  if (log_y) {
    y_lo = std::floor(y_lo);
    y_hi = std::ceil(y_hi);
    if (y_hi - y_lo < 1) y_hi = y_lo + 1;
  } else {
    double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }

  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) {
    double yy = log_y ? std::log10(std::max(y, 1e-300)) : y;
    return mt + (y_hi - yy) / (y_hi - y_lo) * ph;
  };

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\""
      << " text-anchor=\"middle\">" << title << "</text>\n";

  // Gridlines and tick labels.
  std::vector<double> yticks;
  if (log_y) {
    for (double t = y_lo; t <= y_hi + 1e-9; t += 1.0) yticks.push_back(t);
  } else {
    yticks = linear_ticks(y_lo, y_hi);
  }
  for (double t : yticks) {
    double y = mt + (y_hi - t) / (y_hi - y_lo) * ph;
    out << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    std::string label = log_y ? ("1e" + fmt(t)) : fmt(t);
    out << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << label
        << "</text>\n";
  }
  for (double t : linear_ticks(x_lo, x_hi)) {
    double x = px(t);
    out << "<line x1=\"" << x << "\" y1=\"" << mt << "\" x2=\"" << x << "\" y2=\"" << mt + ph
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << mt + ph + 18
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt(t)
        << "</text>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444444\"/>\n";
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << x_label
      << "</text>\n";
  out << "<text x=\"18\" y=\"" << mt + ph / 2
      << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 18 " << mt + ph / 2 << ")\">" << y_label << "</text>\n";

  int idx = 0;
  for (const Series& s : series) {
    const char* color = kPalette[idx % (sizeof kPalette / sizeof kPalette[0])];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
    for (auto [x, y] : s.points) {
      if (log_y && !(y > 0)) continue;
      out << px(x) << "," << py(y) << " ";
    }
    out << "\"/>\n";
    for (auto [x, y] : s.points) {
      if (log_y && !(y > 0)) continue;
      out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    double ly = mt + 14 + 18 * idx;
    out << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + pw + 34
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"1.8\"/>\n";
    out << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.name << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<Series> collect(const std::vector<SummaryRow>& rows, double SummaryRow::*field) {
  std::map<std::string, Series> by_name;
  for (const SummaryRow& r : rows) {
    Series& s = by_name[r.estimator];
    s.name = r.estimator;
    s.points.emplace_back(r.axis_value, r.*field);
  }
  std::vector<Series> out;
  for (auto& [name, s] : by_name) {
    std::sort(s.points.begin(), s.points.end());
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

void write_sweep_plots(const std::string& out_dir, const std::vector<MetricRecord>& records) {
  if (records.empty()) throw std::invalid_argument("no records to plot");
  std::vector<SummaryRow> rows = summarize(records);
  const std::string axis = records.front().axis;

  render_line_plot(out_dir + "/nmse.svg", "Channel estimation NMSE", axis, "NMSE",
                   collect(rows, &SummaryRow::nmse_mean), /*log_y=*/true);

  bool any_se = false, any_rt = false;
  for (const MetricRecord& r : records) {
    any_se = any_se || r.se != 0.0;
    any_rt = any_rt || r.runtime_s != 0.0;
  }
  if (any_se)
    render_line_plot(out_dir + "/se.svg", "Effective spectral efficiency", axis,
                     "bits/s/Hz per stream", collect(rows, &SummaryRow::se_mean),
                     /*log_y=*/false);
  if (any_rt)
    render_line_plot(out_dir + "/runtime.svg", "Estimator runtime", axis, "seconds per frame",
                     collect(rows, &SummaryRow::runtime_mean), /*log_y=*/false);
}

}  // namespace subthz
