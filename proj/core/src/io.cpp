#include "calderon/io.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "calderon/errors.hpp"

namespace calderon {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) {
  if (header.empty()) throw invalid_input_error("CSV header must be non-empty");
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) body_ += ',';
    body_ += header[i];
  }
  body_ += '\n';
}

void CsvTable::add_row(std::span<const double> values) {
  if (values.size() != columns_)
    throw invalid_input_error("CSV row width does not match the header");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ',';
    body_ += format_double(values[i]);
  }
  body_ += '\n';
  ++rows_;
}

void CsvTable::add_text_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_)
    throw invalid_input_error("CSV row width does not match the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) body_ += ',';
    body_ += cells[i];
  }
  body_ += '\n';
  ++rows_;
}

void CsvTable::write(const std::filesystem::path& path) const {
  write_text_file(path, body_);
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw io_error("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (in.bad()) throw io_error("read failed: " + path.string());
  return content;
}

namespace {

std::string array_to_json(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_double(values[i]);
  }
  out += ']';
  return out;
}

std::vector<double> array_from_json(std::string_view text, const char* what) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_array())
    throw invalid_input_error(std::string(what) + ": expected a JSON array of numbers");
  std::vector<double> values;
  values.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number())
      throw invalid_input_error(std::string(what) + ": expected a JSON array of numbers");
    values.push_back(e.get<double>());
  }
  return values;
}

} // namespace

std::string to_json(const Conductivity& sigma) { return array_to_json(sigma.span()); }

std::string to_json(const MeasurementVector& values) {
  return array_to_json(values.span());
}

Conductivity conductivity_from_json(std::string_view text) {
  return Conductivity(array_from_json(text, "conductivity"));
}

MeasurementVector measurement_from_json(std::string_view text) {
  return MeasurementVector(array_from_json(text, "measurements"));
}

} // namespace calderon
