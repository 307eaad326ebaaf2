#pragma once

#include <string>
#include <vector>

namespace calderon {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal static line chart (fixed 720x480 canvas, optional log axes).
/// Output is a deterministic function of the inputs.
std::string render_line_chart(const std::vector<SvgSeries>& series,
                              const std::string& title, const std::string& x_label,
                              const std::string& y_label, bool log_x = false,
                              bool log_y = false);

/// Histogram over shared bin lower edges; one bar group per label.
std::string render_histogram(const std::vector<double>& bin_lo,
                             const std::vector<std::vector<long>>& counts,
                             const std::vector<std::string>& labels,
                             const std::string& title, bool log_x = true);

} // namespace calderon
