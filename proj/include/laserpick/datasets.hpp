#pragma once

#include <filesystem>
#include <istream>
#include <string_view>
#include <vector>

#include "laserpick/laser_model.hpp"

namespace laserpick {

inline constexpr std::string_view kPierceCsvHeader =
    "spot_diameter_mm,stem_diameter_mm,pierce_time_s,pierce_velocity_mm_s,pierce_constant_mm2_s";
inline constexpr std::string_view kLateralCsvHeader =
    "spot_diameter_mm,lateral_velocity_mm_s,stem_diameter_mm,cut_time_s,cut_velocity_mm_s";

/// Parses a pierce dataset. Lines starting with '#' and blank lines are
/// skipped; the first remaining line must be exactly kPierceCsvHeader.
/// Throws ParseError naming the offending line.
std::vector<PierceRecord> parse_pierce_csv(std::istream& in);
std::vector<LateralCutRecord> parse_lateral_csv(std::istream& in);

std::vector<PierceRecord> read_pierce_csv(const std::filesystem::path& path);
std::vector<LateralCutRecord> read_lateral_csv(const std::filesystem::path& path);

/// The three datasets compiled into the library.
const Datasets& load_datasets();

/// Named embedded pierce dataset: "coarse" or "fine".
const std::vector<PierceRecord>& embedded_pierce_dataset(std::string_view name);

namespace detail {
extern const char* const kLateralVelocityCsv;
extern const char* const kPierceCoarseCsv;
extern const char* const kPierceFineCsv;
}  // namespace detail

}  // namespace laserpick
