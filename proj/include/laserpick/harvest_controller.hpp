#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "laserpick/fruit.hpp"
#include "laserpick/gantry_sim.hpp"
#include "laserpick/laser_model.hpp"
#include "laserpick/localization.hpp"

namespace laserpick {

enum class HarvestPhase {
  Idle,
  HomingLens,
  MoveBelowXY,
  RaiseZ,
  Retract,
  CloseTrapper,
  Cutting,
  AwaitFall,
  LaserOff,
  OpenTrapper,
  DescendZ,
  Done,
  Failed,
};

enum class FailureReason { None, Planning, TrapMiss, Timeout };

std::string_view to_string(HarvestPhase phase) noexcept;
std::string_view to_string(FailureReason reason) noexcept;

struct HarvestConfig {
  double approach_below = 0.030;  // m below the box bottom
  double rise_above = 0.020;  // m above the box top
  /// Groove height above the box top once retracted onto the fruit.
  double retract_clearance = 0.0;
  double cut_timeout_s = 30.0;
  double spot_diameter_mm = 0.9;
  double lateral_velocity_mm_s = 96.0;
  /// Groove must sit no lower than this below the fruit top to engage the stem.
  double stem_engage_tolerance = 0.010;
  bool record_trace = false;
};

struct ApproachPlan {
  Vec3 below;  // (cx, cy, z_min - approach_below)
  Vec3 above;  // (cx, cy, z_max + rise_above)
  Vec3 retract;  // groove onto the stem line
};

/// Throws PlanningError when a waypoint is outside gantry travel.
ApproachPlan plan_approach(const BerryBox& box, const HarvestConfig& config, const GantryConfig& gantry);

struct FruitMetrics {
  std::size_t fruit_index = 0;
  bool success = false;
  FailureReason failure = FailureReason::None;
  double motion_time_s = 0.0;
  double cut_time_s = 0.0;
  double cycle_time_s = 0.0;  // motion + cut
  std::vector<HarvestPhase> phases;
  std::int64_t start_step = 0;
  std::int64_t laser_on_step = -1;
  std::int64_t severed_step = -1;
  std::int64_t interrupt_step = -1;
  std::int64_t laser_off_step = -1;
  std::int64_t end_step = 0;
};

struct CycleMetrics {
  std::vector<FruitMetrics> fruits;
  std::size_t lens_homings = 0;

  std::size_t successes() const;
  /// Means over successful fruits; 0 when none succeeded.
  double mean_cycle_s() const;
  double mean_cut_s() const;
};

struct TraceSample {
  std::int64_t step = 0;
  HarvestPhase phase = HarvestPhase::Idle;
  bool laser_on = false;
  TrapperMode trapper = TrapperMode::Open;
  bool lens_homed = false;
};

/// Drives a GantrySim through harvest cycles against a set of physical
/// fruits. Exclusively owns neither; both must outlive the controller.
class HarvestController {
 public:
  HarvestController(GantrySim& sim, std::vector<FruitBody>& fruits, CutModel model, HarvestConfig config = {});

  /// Drives the lens onto its limit switch.
  void home_lens();

  /// One fruit. Requires a homed lens (throws ValidationError otherwise).
  /// `descend_to` is the next box to queue under; the tool parks under the
  /// current box when absent.
  FruitMetrics run_cycle(const BerryBox& box, std::size_t fruit_index = 0,
                         const BerryBox* descend_to = nullptr);

  /// Initial homing, then every box in list order. Failures are recorded and
  /// the run continues.
  CycleMetrics run_demo(const std::vector<BerryBox>& boxes);

  std::size_t lens_homings() const noexcept { return homings_; }
  const std::vector<TraceSample>& trace() const noexcept { return trace_; }
  HarvestPhase phase() const noexcept { return phase_; }

 private:
  template <typename Done>
  void run_until(HarvestPhase phase, Done&& done);
  void tick();
  void finish_metrics(FruitMetrics& m) const;
  std::optional<std::size_t> engage_stem();

  GantrySim& sim_;
  std::vector<FruitBody>& fruits_;
  CutModel model_;
  HarvestConfig config_;
  HarvestPhase phase_ = HarvestPhase::Idle;
  FruitMetrics* current_ = nullptr;
  std::size_t homings_ = 0;
  std::vector<TraceSample> trace_;
};

}  // namespace laserpick
