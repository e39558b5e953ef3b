#include "laserpick/harvest_controller.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "laserpick/errors.hpp"

namespace laserpick {

std::string_view to_string(HarvestPhase phase) noexcept {
  switch (phase) {
    case HarvestPhase::Idle: return "Idle";
    case HarvestPhase::HomingLens: return "HomingLens";
    case HarvestPhase::MoveBelowXY: return "MoveBelowXY";
    case HarvestPhase::RaiseZ: return "RaiseZ";
    case HarvestPhase::Retract: return "Retract";
    case HarvestPhase::CloseTrapper: return "CloseTrapper";
    case HarvestPhase::Cutting: return "Cutting";
    case HarvestPhase::AwaitFall: return "AwaitFall";
    case HarvestPhase::LaserOff: return "LaserOff";
    case HarvestPhase::OpenTrapper: return "OpenTrapper";
    case HarvestPhase::DescendZ: return "DescendZ";
    case HarvestPhase::Done: return "Done";
    case HarvestPhase::Failed: return "Failed";
  }
  return "Unknown";
}

std::string_view to_string(FailureReason reason) noexcept {
  switch (reason) {
    case FailureReason::None: return "";
    case FailureReason::Planning: return "planning";
    case FailureReason::TrapMiss: return "trap";
    case FailureReason::Timeout: return "timeout";
  }
  return "unknown";
}

ApproachPlan plan_approach(const BerryBox& box, const HarvestConfig& config, const GantryConfig& gantry) {
  const double cx = box.centroid.x();
  const double cy = box.centroid.y();
  ApproachPlan plan{{cx, cy, box.box.min.z() - config.approach_below},
                    {cx, cy, box.box.max.z() + config.rise_above},
                    {cx, cy, box.box.max.z() + config.retract_clearance}};
  for (const Vec3* w : {&plan.below, &plan.above, &plan.retract}) {
    if (!gantry.within_travel(*w)) {
      throw PlanningError("fruit at (" + std::to_string(cx) + ", " + std::to_string(cy) +
                          ") needs a waypoint outside gantry travel");
    }
  }
  return plan;
}

std::size_t CycleMetrics::successes() const {
  std::size_t n = 0;
  for (const auto& f : fruits) n += f.success ? 1 : 0;
  return n;
}

double CycleMetrics::mean_cycle_s() const {
  double sum = 0.0;
  for (const auto& f : fruits) sum += f.success ? f.cycle_time_s : 0.0;
  const std::size_t n = successes();
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

double CycleMetrics::mean_cut_s() const {
  double sum = 0.0;
  for (const auto& f : fruits) sum += f.success ? f.cut_time_s : 0.0;
  const std::size_t n = successes();
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

HarvestController::HarvestController(GantrySim& sim, std::vector<FruitBody>& fruits, CutModel model,
                                     HarvestConfig config)
    : sim_(sim), fruits_(fruits), model_(std::move(model)), config_(config) {
  if (!(config_.cut_timeout_s > 0.0)) throw ValidationError("cut timeout must be positive");
}

void HarvestController::tick() {
  sim_.step();
  const double t = sim_.time();
  std::vector<FallingFruit> falling;
  const double floor_z = sim_.tool_position().z() - 1.0;
  for (std::size_t i = 0; i < fruits_.size(); ++i) {
    FruitBody& f = fruits_[i];
    if (f.attached) continue;
    f.update(t);
    if (f.centroid.z() > floor_z) falling.push_back({static_cast<int>(i), f.centroid});
  }
  const auto event = sim_.check_interrupters(falling);
  if (event && current_ != nullptr && current_->interrupt_step < 0 && current_->severed_step >= 0) {
    current_->interrupt_step = event->step;
  }
  if (sim_.laser_on() && sim_.trapper().mode() != TrapperMode::Closed) {
    throw std::logic_error("laser energised with trapper not closed");
  }
  if (config_.record_trace) {
    trace_.push_back({sim_.steps(), phase_, sim_.laser_on(), sim_.trapper().mode(), sim_.lens().homed()});
  }
}

template <typename Done>
void HarvestController::run_until(HarvestPhase phase, Done&& done) {
  phase_ = phase;
  if (current_ != nullptr) current_->phases.push_back(phase);
  // generous bound: ten simulated minutes per phase
  const auto limit = static_cast<std::int64_t>(std::ceil(600.0 / sim_.dt()));
  for (std::int64_t n = 0; !done(); ++n) {
    if (n > limit) throw std::logic_error("harvest phase did not settle");
    tick();
  }
}

void HarvestController::home_lens() {
  sim_.home_lens();
  ++homings_;
  run_until(HarvestPhase::HomingLens, [&] { return sim_.lens().homed(); });
}

std::optional<std::size_t> HarvestController::engage_stem() {
  const Vec3 groove = sim_.tool_position();
  std::optional<std::size_t> best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fruits_.size(); ++i) {
    const FruitBody& f = fruits_[i];
    if (!f.attached || f.stem.severed) continue;
    const double top = f.top_z();
    if (groove.z() < top - config_.stem_engage_tolerance || groove.z() > top + f.stem_length) continue;
    const double d = std::hypot(f.centroid.x() - groove.x(), f.centroid.y() - groove.y());
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  if (!best || !sim_.trapper().captures(best_dist)) return std::nullopt;
  // the rod funnels the stem into the groove
  FruitBody& f = fruits_[*best];
  f.centroid.x() = groove.x();
  f.centroid.y() = groove.y();
  return best;
}

void HarvestController::finish_metrics(FruitMetrics& m) const {
  m.end_step = sim_.steps();
  const std::int64_t cycle_steps = m.end_step - m.start_step;
  const std::int64_t cut_steps = m.success ? m.severed_step - m.laser_on_step : 0;
  m.cut_time_s = static_cast<double>(cut_steps) * sim_.dt();
  m.motion_time_s = static_cast<double>(cycle_steps - cut_steps) * sim_.dt();
  m.cycle_time_s = m.motion_time_s + m.cut_time_s;
}

FruitMetrics HarvestController::run_cycle(const BerryBox& box, std::size_t fruit_index, const BerryBox* descend_to) {
  if (!sim_.lens().homed()) throw ValidationError("lens must be homed before a harvest cycle");
  FruitMetrics m;
  m.fruit_index = fruit_index;
  m.start_step = sim_.steps();
  current_ = &m;
  struct Reset {
    FruitMetrics*& p;
    ~Reset() { p = nullptr; }
  } reset{current_};

  ApproachPlan plan;
  try {
    plan = plan_approach(box, config_, sim_.config());
  } catch (const PlanningError&) {
    m.failure = FailureReason::Planning;
    m.phases.push_back(HarvestPhase::Failed);
    phase_ = HarvestPhase::Failed;
    finish_metrics(m);
    return m;
  }

  sim_.command_move(plan.below);
  run_until(HarvestPhase::MoveBelowXY, [&] { return sim_.axes_idle(); });
  sim_.command_move(plan.above);
  run_until(HarvestPhase::RaiseZ, [&] { return sim_.axes_idle(); });
  sim_.command_move(plan.retract);
  run_until(HarvestPhase::Retract, [&] { return sim_.axes_idle(); });
  sim_.set_trapper(TrapperMode::Closed);
  run_until(HarvestPhase::CloseTrapper, [&] { return sim_.trapper().mode() == TrapperMode::Closed; });

  const std::optional<std::size_t> target = engage_stem();
  if (!target) {
    m.failure = FailureReason::TrapMiss;
  } else {
    FruitBody& fruit = fruits_[*target];
    const CutModel model = model_.with_toughness(model_.toughness() * fruit.toughness);
    const auto timeout_steps = static_cast<std::int64_t>(std::llround(config_.cut_timeout_s / sim_.dt()));
    const auto timed_out = [&] { return sim_.steps() - m.laser_on_step >= timeout_steps; };

    if (!sim_.lens().homed()) throw std::logic_error("cutting entered with lens not homed");
    phase_ = HarvestPhase::Cutting;
    m.phases.push_back(HarvestPhase::Cutting);
    sim_.set_laser(true);
    sim_.start_lens_oscillation(config_.lateral_velocity_mm_s);
    m.laser_on_step = sim_.steps();
    while (!fruit.stem.severed && !timed_out()) {
      tick();
      fruit.stem = etch_step(fruit.stem, sim_.dt(), sim_.laser_on(), model, config_.spot_diameter_mm,
                             sim_.lens().lateral_velocity());
      if (fruit.stem.severed) {
        m.severed_step = sim_.steps();
        fruit.release(sim_.time());
        const FallingFruit released{static_cast<int>(*target), fruit.centroid};
        sim_.check_interrupters(std::span<const FallingFruit>(&released, 1));
      }
    }
    if (fruit.stem.severed) {
      run_until(HarvestPhase::AwaitFall, [&] { return m.interrupt_step >= 0 || timed_out(); });
    }
    m.failure = m.interrupt_step >= 0 ? FailureReason::None : FailureReason::Timeout;

    // laser power drops on the step after detection
    tick();
    phase_ = HarvestPhase::LaserOff;
    m.phases.push_back(HarvestPhase::LaserOff);
    sim_.set_laser(false);
    sim_.stop_lens_oscillation();
    m.laser_off_step = sim_.steps();
  }

  sim_.set_trapper(TrapperMode::Open);
  run_until(HarvestPhase::OpenTrapper, [&] { return sim_.trapper().mode() == TrapperMode::Open; });
  m.phases.push_back(HarvestPhase::HomingLens);
  current_ = nullptr;
  home_lens();
  current_ = &m;

  const Vec3 tool = sim_.tool_position();
  const double park_z = (descend_to != nullptr ? descend_to->box.min.z() : box.box.min.z()) - config_.approach_below;
  const Vec3 park{tool.x(), tool.y(), park_z};
  if (sim_.within_limits(park)) sim_.command_move(park);
  run_until(HarvestPhase::DescendZ, [&] { return sim_.axes_idle(); });

  m.success = m.failure == FailureReason::None;
  const HarvestPhase last = m.success ? HarvestPhase::Done : HarvestPhase::Failed;
  m.phases.push_back(last);
  phase_ = last;
  finish_metrics(m);
  return m;
}

CycleMetrics HarvestController::run_demo(const std::vector<BerryBox>& boxes) {
  CycleMetrics metrics;
  const std::size_t homings_before = homings_;
  if (boxes.empty()) {
    phase_ = HarvestPhase::Done;
    return metrics;
  }
  std::vector<bool> reachable(boxes.size(), false);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    try {
      plan_approach(boxes[i], config_, sim_.config());
      reachable[i] = true;
    } catch (const PlanningError&) {
    }
  }

  home_lens();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!reachable[i]) {
      FruitMetrics m;
      m.fruit_index = i;
      m.failure = FailureReason::Planning;
      m.phases.push_back(HarvestPhase::Failed);
      m.start_step = m.end_step = sim_.steps();
      metrics.fruits.push_back(std::move(m));
      continue;
    }
    const BerryBox* next = nullptr;
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      if (reachable[j]) {
        next = &boxes[j];
        break;
      }
    }
    metrics.fruits.push_back(run_cycle(boxes[i], i, next));
  }
  metrics.lens_homings = homings_ - homings_before;
  phase_ = HarvestPhase::Done;
  return metrics;
}

}  // namespace laserpick
