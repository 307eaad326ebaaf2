#include "calderon/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace calderon {

namespace {

constexpr int kWidth = 720;
constexpr int kHeight = 480;
constexpr int kMarginLeft = 80;
constexpr int kMarginRight = 30;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 60;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double map(double v, double pix_lo, double pix_hi) const {
    double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    t = std::clamp(t, 0.0, 1.0);
    return pix_lo + t * (pix_hi - pix_lo);
  }
};

Axis fit_axis(const std::vector<double>& values, bool log) {
  Axis axis;
  axis.log = log;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (log && !(v > 0.0)) continue;
    const double t = log ? std::log10(v) : v;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (!(lo <= hi)) {
    lo = log ? -1.0 : 0.0;
    hi = log ? 1.0 : 1.0;
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.04 * (hi - lo);
  axis.lo = lo - pad;
  axis.hi = hi + pad;
  return axis;
}

std::string axis_ticks(const Axis& axis, bool horizontal) {
  std::string out;
  const int ticks = 5;
  for (int i = 0; i <= ticks; ++i) {
    const double t = axis.lo + (axis.hi - axis.lo) * i / ticks;
    const double value = axis.log ? std::pow(10.0, t) : t;
    if (horizontal) {
      const double px = kMarginLeft +
                        (kWidth - kMarginLeft - kMarginRight) * static_cast<double>(i) / ticks;
      out += "<line x1='" + num(px) + "' y1='" + num(kHeight - kMarginBottom) +
             "' x2='" + num(px) + "' y2='" + num(kHeight - kMarginBottom + 5) +
             "' stroke='black'/>\n";
      out += "<text x='" + num(px) + "' y='" + num(kHeight - kMarginBottom + 20) +
             "' font-size='11' text-anchor='middle'>" + num(value) + "</text>\n";
    } else {
      const double py = kHeight - kMarginBottom -
                        (kHeight - kMarginTop - kMarginBottom) * static_cast<double>(i) / ticks;
      out += "<line x1='" + num(kMarginLeft - 5) + "' y1='" + num(py) + "' x2='" +
             num(kMarginLeft) + "' y2='" + num(py) + "' stroke='black'/>\n";
      out += "<text x='" + num(kMarginLeft - 8) + "' y='" + num(py + 4) +
             "' font-size='11' text-anchor='end'>" + num(value) + "</text>\n";
    }
  }
  return out;
}

std::string chart_frame(const std::string& title, const std::string& x_label,
                        const std::string& y_label) {
  std::string out;
  out += "<rect x='" + num(kMarginLeft) + "' y='" + num(kMarginTop) + "' width='" +
         num(kWidth - kMarginLeft - kMarginRight) + "' height='" +
         num(kHeight - kMarginTop - kMarginBottom) +
         "' fill='none' stroke='black'/>\n";
  out += "<text x='" + num(kWidth / 2.0) + "' y='24' font-size='15' text-anchor='middle'>" +
         title + "</text>\n";
  out += "<text x='" + num(kWidth / 2.0) + "' y='" + num(kHeight - 15) +
         "' font-size='12' text-anchor='middle'>" + x_label + "</text>\n";
  out += "<text x='18' y='" + num(kHeight / 2.0) +
         "' font-size='12' text-anchor='middle' transform='rotate(-90 18 " +
         num(kHeight / 2.0) + ")'>" + y_label + "</text>\n";
  return out;
}

} // namespace

std::string render_line_chart(const std::vector<SvgSeries>& series,
                              const std::string& title, const std::string& x_label,
                              const std::string& y_label, bool log_x, bool log_y) {
  std::vector<double> xs, ys;
  for (const SvgSeries& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const Axis ax = fit_axis(xs, log_x);
  const Axis ay = fit_axis(ys, log_y);

  std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(kWidth) +
                    "' height='" + num(kHeight) + "'>\n";
  out += chart_frame(title, x_label, y_label);
  out += axis_ticks(ax, true);
  out += axis_ticks(ay, false);

  for (std::size_t si = 0; si < series.size(); ++si) {
    const SvgSeries& s = series[si];
    const char* color = kPalette[si % 8];
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if ((log_x && !(s.x[i] > 0.0)) || (log_y && !(s.y[i] > 0.0))) continue;
      const double px = ax.map(s.x[i], kMarginLeft, kWidth - kMarginRight);
      const double py = ay.map(s.y[i], kHeight - kMarginBottom, kMarginTop);
      points += num(px) + "," + num(py) + " ";
    }
    out += "<polyline fill='none' stroke='" + std::string(color) +
           "' stroke-width='1.5' points='" + points + "'/>\n";
    if (!s.label.empty()) {
      const double ly = kMarginTop + 16.0 * (static_cast<double>(si) + 1.0);
      out += "<line x1='" + num(kWidth - kMarginRight - 120) + "' y1='" + num(ly) +
             "' x2='" + num(kWidth - kMarginRight - 96) + "' y2='" + num(ly) +
             "' stroke='" + color + "' stroke-width='2'/>\n";
      out += "<text x='" + num(kWidth - kMarginRight - 90) + "' y='" + num(ly + 4) +
             "' font-size='11'>" + s.label + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

std::string render_histogram(const std::vector<double>& bin_lo,
                             const std::vector<std::vector<long>>& counts,
                             const std::vector<std::string>& labels,
                             const std::string& title, bool log_x) {
  std::vector<double> xs(bin_lo.begin(), bin_lo.end());
  std::vector<double> ys = {0.0};
  for (const auto& series : counts)
    for (long c : series) ys.push_back(static_cast<double>(c));
  const Axis ax = fit_axis(xs, log_x);
  const Axis ay = fit_axis(ys, false);

  std::string out = "<svg xmlns='http://www.w3.org/2000/svg' width='" + num(kWidth) +
                    "' height='" + num(kHeight) + "'>\n";
  out += chart_frame(title, "error", "count");
  out += axis_ticks(ax, true);
  out += axis_ticks(ay, false);

  const std::size_t groups = counts.size();
  for (std::size_t g = 0; g < groups; ++g) {
    const char* color = kPalette[g % 8];
    for (std::size_t i = 0; i < counts[g].size() && i < bin_lo.size(); ++i) {
      if (counts[g][i] == 0) continue;
      const double x0 = ax.map(bin_lo[i], kMarginLeft, kWidth - kMarginRight);
      const double x1 = i + 1 < bin_lo.size()
                            ? ax.map(bin_lo[i + 1], kMarginLeft, kWidth - kMarginRight)
                            : static_cast<double>(kWidth - kMarginRight);
      const double y = ay.map(static_cast<double>(counts[g][i]),
                              kHeight - kMarginBottom, kMarginTop);
      const double w = std::max(1.0, (x1 - x0) / static_cast<double>(groups) - 1.0);
      out += "<rect x='" + num(x0 + w * static_cast<double>(g)) + "' y='" + num(y) +
             "' width='" + num(w) + "' height='" +
             num(kHeight - kMarginBottom - y) + "' fill='" + color +
             "' fill-opacity='0.65'/>\n";
    }
    if (g < labels.size() && !labels[g].empty()) {
      const double ly = kMarginTop + 16.0 * (static_cast<double>(g) + 1.0);
      out += "<rect x='" + num(kWidth - kMarginRight - 120) + "' y='" + num(ly - 8) +
             "' width='12' height='12' fill='" + color + "' fill-opacity='0.65'/>\n";
      out += "<text x='" + num(kWidth - kMarginRight - 102) + "' y='" + num(ly + 3) +
             "' font-size='11'>" + labels[g] + "</text>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

} // namespace calderon
