#include "laserpick/laser_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "laserpick/errors.hpp"

namespace laserpick {

namespace {

std::vector<PierceRecord> sorted_by_spot(std::span<const PierceRecord> records) {
  std::vector<PierceRecord> sorted(records.begin(), records.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const PierceRecord& a, const PierceRecord& b) {
    return a.spot_diameter_mm < b.spot_diameter_mm;
  });
  return sorted;
}

double interpolate_sorted(double spot, std::span<const PierceRecord> sorted) {
  if (sorted.empty()) throw DomainError("no pierce records to interpolate");
  const double lo = sorted.front().spot_diameter_mm;
  const double hi = sorted.back().spot_diameter_mm;
  if (!(spot >= lo && spot <= hi)) {
    throw DomainError("spot diameter " + std::to_string(spot) + " mm outside measured range [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  auto upper = std::lower_bound(sorted.begin(), sorted.end(), spot,
                                [](const PierceRecord& r, double s) { return r.spot_diameter_mm < s; });
  if (upper->spot_diameter_mm == spot) return upper->pierce_constant_mm2_s;
  const auto lower = std::prev(upper);
  const double w = (spot - lower->spot_diameter_mm) / (upper->spot_diameter_mm - lower->spot_diameter_mm);
  return lower->pierce_constant_mm2_s + w * (upper->pierce_constant_mm2_s - lower->pierce_constant_mm2_s);
}

}  // namespace

double pierce_constant(double pierce_velocity_mm_s, double spot_diameter_mm) {
  if (!(pierce_velocity_mm_s >= 0.0) || !(spot_diameter_mm >= 0.0)) {
    throw ValidationError("pierce velocity and spot diameter must be non-negative");
  }
  return pierce_velocity_mm_s * spot_diameter_mm;
}

double pierce_velocity(double stem_diameter_mm, double pierce_time_s) {
  if (!(pierce_time_s > 0.0)) throw ValidationError("pierce time must be positive");
  if (!(stem_diameter_mm >= 0.0)) throw ValidationError("stem diameter must be non-negative");
  return stem_diameter_mm / pierce_time_s;
}

double interpolate_cp(double spot_diameter_mm, std::span<const PierceRecord> records) {
  if (std::is_sorted(records.begin(), records.end(), [](const PierceRecord& a, const PierceRecord& b) {
        return a.spot_diameter_mm < b.spot_diameter_mm;
      })) {
    return interpolate_sorted(spot_diameter_mm, records);
  }
  return interpolate_sorted(spot_diameter_mm, sorted_by_spot(records));
}

CutModel::CutModel(std::vector<PierceRecord> cp_curve, double toughness, double min_lateral_velocity_mm_s)
    : curve_(sorted_by_spot(cp_curve)), toughness_(toughness), min_lateral_velocity_(min_lateral_velocity_mm_s) {
  if (curve_.empty()) throw ValidationError("cut model needs at least one C_p knot");
  for (const auto& r : curve_) {
    if (!(r.pierce_constant_mm2_s > 0.0)) throw ValidationError("C_p curve must be positive");
  }
  if (!(toughness_ > 0.0)) throw ValidationError("toughness multiplier must be positive");
  if (!(min_lateral_velocity_ >= 0.0)) throw ValidationError("minimum lateral velocity must be non-negative");
}

CutModel CutModel::with_toughness(double k) const { return CutModel(curve_, k, min_lateral_velocity_); }

double CutModel::etch_rate(double spot_diameter_mm, double lateral_velocity_mm_s) const {
  if (lateral_velocity_mm_s < min_lateral_velocity_) {
    throw UnsupportedRegimeError("lateral velocity " + std::to_string(lateral_velocity_mm_s) +
                                 " mm/s below the lowest characterised value " +
                                 std::to_string(min_lateral_velocity_) + " mm/s");
  }
  return cp(spot_diameter_mm) / toughness_;
}

double cut_time(double stem_diameter_mm, const CutModel& model, double spot_diameter_mm,
                double lateral_velocity_mm_s) {
  if (!(stem_diameter_mm >= 0.0)) throw ValidationError("stem diameter must be non-negative");
  const double rate = model.etch_rate(spot_diameter_mm, lateral_velocity_mm_s);
  const double area = std::numbers::pi * 0.25 * stem_diameter_mm * stem_diameter_mm;
  return area / rate;
}

EtchState EtchState::for_stem(double stem_diameter_mm) {
  EtchState s;
  s.target_area_mm2 = std::numbers::pi * 0.25 * stem_diameter_mm * stem_diameter_mm;
  s.severed = s.target_area_mm2 <= 0.0;
  return s;
}

EtchState etch_step(const EtchState& state, double dt, bool laser_on, const CutModel& model,
                    double spot_diameter_mm, double lateral_velocity_mm_s) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  if (!laser_on || state.severed || lateral_velocity_mm_s < model.min_lateral_velocity()) return state;
  EtchState next = state;
  next.cut_area_mm2 =
      std::min(state.target_area_mm2, state.cut_area_mm2 + dt * model.etch_rate(spot_diameter_mm, lateral_velocity_mm_s));
  next.severed = next.cut_area_mm2 >= next.target_area_mm2;
  return next;
}

double optimal_spot(std::span<const PierceRecord> records, double lo, double hi) {
  const PierceRecord* best = nullptr;
  for (const auto& r : records) {
    if (r.spot_diameter_mm < lo || r.spot_diameter_mm > hi) continue;
    if (best == nullptr || r.pierce_constant_mm2_s > best->pierce_constant_mm2_s ||
        (r.pierce_constant_mm2_s == best->pierce_constant_mm2_s && r.spot_diameter_mm < best->spot_diameter_mm)) {
      best = &r;
    }
  }
  if (best == nullptr) {
    throw ValidationError("no measured spot diameter inside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  return best->spot_diameter_mm;
}

double optimal_spot_continuous(std::span<const PierceRecord> records, double lo, double hi) {
  const auto sorted = sorted_by_spot(records);
  if (sorted.empty()) throw ValidationError("no pierce records");
  lo = std::max(lo, sorted.front().spot_diameter_mm);
  hi = std::min(hi, sorted.back().spot_diameter_mm);
  if (!(lo <= hi)) throw ValidationError("search range does not overlap the measured spot diameters");

  const auto f = [&](double s) { return interpolate_sorted(s, sorted); };
  constexpr int kScan = 256;
  double best_x = lo;
  double best_f = f(lo);
  for (int i = 1; i <= kScan; ++i) {
    const double x = lo + (hi - lo) * i / kScan;
    const double fx = f(x);
    if (fx > best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  const double step = (hi - lo) / kScan;
  double a = std::max(lo, best_x - step);
  double b = std::min(hi, best_x + step);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
    if (f(c) >= f(d)) {
      b = d;
    } else {
      a = c;
    }
    c = b - inv_phi * (b - a);
    d = a + inv_phi * (b - a);
  }
  const double x = 0.5 * (a + b);
  return f(x) >= best_f ? x : best_x;
}

double TableDeviation::deviation() const { return std::abs(published - recomputed); }

double TableAudit::max_deviation() const {
  double m = 0.0;
  for (const auto& c : checks) m = std::max(m, c.deviation());
  return m;
}

std::vector<TableDeviation> TableAudit::failures() const {
  std::vector<TableDeviation> out;
  for (const auto& c : checks) {
    if (c.deviation() > tolerance) out.push_back(c);
  }
  return out;
}

namespace {

void audit_pierce(const std::string& name, std::span<const PierceRecord> rows, TableAudit& audit) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    audit.checks.push_back({name, i, "pierce_velocity_mm_s", r.pierce_velocity_mm_s,
                            pierce_velocity(r.stem_diameter_mm, r.pierce_time_s)});
    audit.checks.push_back({name, i, "pierce_constant_mm2_s", r.pierce_constant_mm2_s,
                            pierce_constant(r.pierce_velocity_mm_s, r.spot_diameter_mm)});
  }
}

}  // namespace

TableAudit verify_tables(const Datasets& datasets, double tolerance) {
  TableAudit audit;
  audit.tolerance = tolerance;
  for (std::size_t i = 0; i < datasets.lateral.size(); ++i) {
    const auto& r = datasets.lateral[i];
    if (!(r.cut_time_s > 0.0)) throw ValidationError("lateral dataset row " + std::to_string(i) + ": cut time <= 0");
    audit.checks.push_back({"lateral", i, "cut_velocity_mm_s", r.cut_velocity_mm_s, r.stem_diameter_mm / r.cut_time_s});
  }
  audit_pierce("coarse", datasets.coarse, audit);
  audit_pierce("fine", datasets.fine, audit);
  return audit;
}

}  // namespace laserpick
