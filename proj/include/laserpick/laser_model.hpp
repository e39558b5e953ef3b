#pragma once

#include <span>
#include <string>
#include <vector>

namespace laserpick {

/// One row of a stationary-beam piercing experiment.
struct PierceRecord {
  double spot_diameter_mm = 0.0;
  double stem_diameter_mm = 0.0;
  double pierce_time_s = 0.0;
  double pierce_velocity_mm_s = 0.0;
  double pierce_constant_mm2_s = 0.0;
};

/// One row of a lateral (oscillating-spot) cutting experiment.
struct LateralCutRecord {
  double spot_diameter_mm = 0.0;
  double lateral_velocity_mm_s = 0.0;
  double stem_diameter_mm = 0.0;
  double cut_time_s = 0.0;
  double cut_velocity_mm_s = 0.0;
};

/// C_p = v_p * spot diameter, the areal etch-rate proxy in mm^2/s.
double pierce_constant(double pierce_velocity_mm_s, double spot_diameter_mm);

/// Mean piercing velocity: stem diameter over pierce time.
double pierce_velocity(double stem_diameter_mm, double pierce_time_s);

/// Piecewise-linear C_p over spot diameter; records need not be sorted.
/// Throws DomainError outside [min, max] spot diameter of the records.
double interpolate_cp(double spot_diameter_mm, std::span<const PierceRecord> records);

/// Stem cut model. The spot etches the stem cross-section at an areal rate
/// of C_p(spot) / k, independent of lateral velocity as long as the spot moves
/// at least `min_lateral_velocity_mm_s`.
class CutModel {
 public:
  static constexpr double kDefaultMinLateralVelocity = 10.0;

  CutModel(std::vector<PierceRecord> cp_curve, double toughness = 1.0,
           double min_lateral_velocity_mm_s = kDefaultMinLateralVelocity);

  double cp(double spot_diameter_mm) const { return interpolate_cp(spot_diameter_mm, curve_); }
  double toughness() const noexcept { return toughness_; }
  double min_lateral_velocity() const noexcept { return min_lateral_velocity_; }
  std::span<const PierceRecord> curve() const noexcept { return curve_; }

  /// Copy with a different toughness multiplier.
  CutModel with_toughness(double k) const;

  /// Areal etch rate in mm^2/s; throws UnsupportedRegimeError below the
  /// minimum lateral velocity.
  double etch_rate(double spot_diameter_mm, double lateral_velocity_mm_s) const;

 private:
  std::vector<PierceRecord> curve_;
  double toughness_;
  double min_lateral_velocity_;
};

/// Closed form k * pi * (d/2)^2 / C_p(spot), seconds.
double cut_time(double stem_diameter_mm, const CutModel& model, double spot_diameter_mm,
                double lateral_velocity_mm_s);

struct EtchState {
  double cut_area_mm2 = 0.0;
  double target_area_mm2 = 0.0;
  bool severed = false;

  static EtchState for_stem(double stem_diameter_mm);
};

/// One integrator step. Area grows at the model's etch rate while the laser
/// is on and the spot moves fast enough; it saturates at the target area.
EtchState etch_step(const EtchState& state, double dt, bool laser_on, const CutModel& model,
                    double spot_diameter_mm, double lateral_velocity_mm_s);

/// Knot with the largest C_p inside [lo, hi]; ties go to the smaller spot.
/// Throws ValidationError when no knot falls inside the range.
double optimal_spot(std::span<const PierceRecord> records, double lo, double hi);

/// Exploratory variant: maximises the interpolated curve over [lo, hi] by
/// golden-section refinement around the best point of a uniform scan.
double optimal_spot_continuous(std::span<const PierceRecord> records, double lo, double hi);

struct TableDeviation {
  std::string table;
  std::size_t row = 0;  // 0-based data row
  std::string column;
  double published = 0.0;
  double recomputed = 0.0;

  double deviation() const;
};

struct TableAudit {
  double tolerance = 0.0;
  std::vector<TableDeviation> checks;

  double max_deviation() const;
  bool passed() const { return max_deviation() <= tolerance; }
  std::vector<TableDeviation> failures() const;
};

struct Datasets {
  std::vector<LateralCutRecord> lateral;
  std::vector<PierceRecord> coarse;
  std::vector<PierceRecord> fine;
};

/// Recomputes v = d / t for every row and C_p = v_published * spot for the
/// pierce tables, comparing against the published columns.
TableAudit verify_tables(const Datasets& datasets, double tolerance = 0.03);

}  // namespace laserpick
