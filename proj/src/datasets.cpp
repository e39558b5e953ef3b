#include "laserpick/datasets.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "laserpick/errors.hpp"

namespace laserpick {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
    throw ParseError("invalid number '" + std::string(field) + "'", line);
  }
  return value;
}

/// Reads a 5-column numeric CSV with a fixed header into rows.
std::vector<std::array<double, 5>> parse_five_columns(std::istream& in, std::string_view header) {
  std::vector<std::array<double, 5>> rows;
  std::string raw;
  std::size_t line = 0;
  bool seen_header = false;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    if (!seen_header) {
      if (text != header) throw ParseError("expected header '" + std::string(header) + "'", line);
      seen_header = true;
      continue;
    }
    std::array<double, 5> row{};
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = text.find(',', start);
      const std::string_view field = text.substr(start, comma == std::string_view::npos ? text.npos : comma - start);
      if (col >= row.size()) throw ParseError("too many columns", line);
      row[col++] = parse_number(field, line);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (col != row.size()) throw ParseError("expected 5 columns, found " + std::to_string(col), line);
    for (double v : row) {
      if (!(v > 0.0)) throw ParseError("dataset values must be positive", line);
    }
    rows.push_back(row);
  }
  if (!seen_header) throw ParseError("missing header row", line);
  return rows;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<PierceRecord> parse_pierce_csv(std::istream& in) {
  std::vector<PierceRecord> out;
  for (const auto& r : parse_five_columns(in, kPierceCsvHeader)) out.push_back({r[0], r[1], r[2], r[3], r[4]});
  return out;
}

std::vector<LateralCutRecord> parse_lateral_csv(std::istream& in) {
  std::vector<LateralCutRecord> out;
  for (const auto& r : parse_five_columns(in, kLateralCsvHeader)) out.push_back({r[0], r[1], r[2], r[3], r[4]});
  return out;
}

std::vector<PierceRecord> read_pierce_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_pierce_csv(in);
}

std::vector<LateralCutRecord> read_lateral_csv(const std::filesystem::path& path) {
  auto in = open(path);
  return parse_lateral_csv(in);
}

const Datasets& load_datasets() {
  static const Datasets datasets = [] {
    Datasets d;
    std::istringstream lateral(detail::kLateralVelocityCsv);
    std::istringstream coarse(detail::kPierceCoarseCsv);
    std::istringstream fine(detail::kPierceFineCsv);
    d.lateral = parse_lateral_csv(lateral);
    d.coarse = parse_pierce_csv(coarse);
    d.fine = parse_pierce_csv(fine);
    return d;
  }();
  return datasets;
}

const std::vector<PierceRecord>& embedded_pierce_dataset(std::string_view name) {
  if (name == "coarse") return load_datasets().coarse;
  if (name == "fine") return load_datasets().fine;
  throw ValidationError("unknown embedded dataset '" + std::string(name) + "' (expected coarse or fine)");
}

}  // namespace laserpick
