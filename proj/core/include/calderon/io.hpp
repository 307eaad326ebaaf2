#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "calderon/geometry.hpp"

namespace calderon {

/// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

/// In-memory CSV builder: header row plus value rows, '\n' line endings,
/// doubles in shortest round-trip form.
class CsvTable {
public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::span<const double> values);
  void add_text_row(const std::vector<std::string>& cells);

  int row_count() const { return rows_; }
  const std::string& content() const { return body_; }

  void write(const std::filesystem::path& path) const;

private:
  std::size_t columns_;
  int rows_ = 0;
  std::string body_;
};

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

/// JSON array-of-doubles forms for the two wire types.
std::string to_json(const Conductivity& sigma);
std::string to_json(const MeasurementVector& values);
Conductivity conductivity_from_json(std::string_view text);
MeasurementVector measurement_from_json(std::string_view text);

} // namespace calderon
