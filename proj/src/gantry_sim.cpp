#include "laserpick/gantry_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "laserpick/errors.hpp"

namespace laserpick {

double trapezoid_duration(double distance, double max_velocity, double max_accel) {
  distance = std::abs(distance);
  if (distance == 0.0) return 0.0;
  if (distance <= max_velocity * max_velocity / max_accel) return 2.0 * std::sqrt(distance / max_accel);
  return distance / max_velocity + max_velocity / max_accel;
}

Axis::Axis(const AxisLimits& limits, double position) : limits_(limits), position_(position), target_(position) {
  if (!(limits.min <= limits.max)) throw ValidationError("axis travel min must not exceed max");
  if (!(limits.max_velocity > 0.0) || !(limits.max_accel > 0.0)) {
    throw ValidationError("axis velocity and acceleration limits must be positive");
  }
  if (!within_travel(position)) throw MotionError("axis start position outside travel");
}

void Axis::command(double target) {
  if (!std::isfinite(target) || !within_travel(target)) {
    throw MotionError("target " + std::to_string(target) + " m outside travel [" + std::to_string(limits_.min) +
                      ", " + std::to_string(limits_.max) + "]");
  }
  if (moving_) {
    if (target == target_) return;
    throw MotionError("axis busy: new target issued before the previous move finished");
  }
  target_ = target;
  start_ = position_;
  distance_ = std::abs(target - position_);
  direction_ = target >= position_ ? 1.0 : -1.0;
  elapsed_ = 0.0;
  if (distance_ == 0.0) return;

  const double v = limits_.max_velocity;
  const double a = limits_.max_accel;
  if (distance_ <= v * v / a) {
    t_accel_ = std::sqrt(distance_ / a);
    t_cruise_ = 0.0;
    v_peak_ = a * t_accel_;
  } else {
    t_accel_ = v / a;
    t_cruise_ = (distance_ - v * v / a) / v;
    v_peak_ = v;
  }
  duration_ = 2.0 * t_accel_ + t_cruise_;
  moving_ = true;
}

void Axis::step(double dt) {
  if (!moving_) return;
  elapsed_ += dt;
  const double t = elapsed_;
  const double a = limits_.max_accel;
  if (t >= duration_) {
    position_ = target_;
    velocity_ = 0.0;
    moving_ = false;
    return;
  }
  double s = 0.0;
  double v = 0.0;
  if (t < t_accel_) {
    s = 0.5 * a * t * t;
    v = a * t;
  } else if (t < t_accel_ + t_cruise_) {
    s = 0.5 * a * t_accel_ * t_accel_ + v_peak_ * (t - t_accel_);
    v = v_peak_;
  } else {
    const double remaining = duration_ - t;
    s = distance_ - 0.5 * a * remaining * remaining;
    v = a * remaining;
  }
  position_ = start_ + direction_ * s;
  velocity_ = direction_ * v;
}

LensAxis::LensAxis(const LensConfig& config) : config_(config), position_(config.initial_position_mm) {
  if (!(config.stroke_mm > 0.0) || config.stroke_mm > config.travel_mm) {
    throw ValidationError("lens stroke must be in (0, travel]");
  }
  if (!(config.homing_speed_mm_s > 0.0)) throw ValidationError("lens homing speed must be positive");
  if (position_ < 0.0 || position_ > config.travel_mm) throw ValidationError("lens start position outside travel");
}

void LensAxis::home() {
  homed_ = false;
  mode_ = Mode::Homing;
  if (position_ <= 0.0) {
    position_ = 0.0;
    homed_ = true;
    mode_ = Mode::Idle;
  }
}

void LensAxis::start_oscillation(double lateral_velocity_mm_s) {
  if (!homed_) throw MotionError("lens oscillation requested before homing");
  if (!(lateral_velocity_mm_s > 0.0)) throw ValidationError("lateral velocity must be positive");
  velocity_ = lateral_velocity_mm_s;
  direction_ = 1.0;
  mode_ = Mode::Oscillating;
}

void LensAxis::stop() {
  if (mode_ == Mode::Oscillating) homed_ = false;
  mode_ = Mode::Idle;
}

void LensAxis::step(double dt) {
  switch (mode_) {
    case Mode::Idle:
      return;
    case Mode::Homing: {
      const double travel = config_.homing_speed_mm_s * dt;
      // snap onto the switch when within rounding of it
      position_ = position_ - travel <= 1e-9 * travel ? 0.0 : position_ - travel;
      if (position_ <= 0.0) {
        position_ = 0.0;
        homed_ = true;
        mode_ = Mode::Idle;
      }
      return;
    }
    case Mode::Oscillating: {
      const double stroke = config_.stroke_mm;
      double travel = velocity_ * dt;
      // fold the travel into the [0, stroke] triangle wave
      travel = std::fmod(travel, 2.0 * stroke);
      while (travel > 0.0) {
        const double room = direction_ > 0.0 ? stroke - position_ : position_;
        if (travel <= room) {
          position_ += direction_ * travel;
          travel = 0.0;
        } else {
          position_ = direction_ > 0.0 ? stroke : 0.0;
          travel -= room;
          direction_ = -direction_;
        }
      }
      position_ = std::clamp(position_, 0.0, stroke);
      return;
    }
  }
}

Trapper::Trapper(const TrapperConfig& config)
    : config_(config), angle_(config.open_angle_deg), target_(config.open_angle_deg) {
  if (!(config.slew_rate_deg_s > 0.0)) throw ValidationError("trapper slew rate must be positive");
  if (!(config.capture_radius >= 0.0)) throw ValidationError("trapper capture radius must be non-negative");
}

void Trapper::command(TrapperMode mode) {
  switch (mode) {
    case TrapperMode::Open:
      target_ = config_.open_angle_deg;
      return;
    case TrapperMode::Closed:
      target_ = config_.closed_angle_deg;
      return;
    case TrapperMode::Moving:
      break;
  }
  throw ValidationError("trapper can only be commanded Open or Closed");
}

void Trapper::step(double dt) {
  const double delta = target_ - angle_;
  const double max_step = config_.slew_rate_deg_s * dt;
  angle_ = std::abs(delta) <= max_step ? target_ : angle_ + std::copysign(max_step, delta);
}

TrapperMode Trapper::mode() const noexcept {
  if (angle_ == config_.open_angle_deg) return TrapperMode::Open;
  if (angle_ == config_.closed_angle_deg) return TrapperMode::Closed;
  return TrapperMode::Moving;
}

std::optional<FallEvent> InterrupterBank::check(const Vec3& groove_center, std::span<const FallingFruit> fruits,
                                                double time, std::int64_t step) {
  std::optional<FallEvent> event;
  for (const auto& fruit : fruits) {
    const double z = fruit.position.z();
    const auto [it, first_seen] = last_z_.try_emplace(fruit.id, z);
    const double prev_z = it->second;
    it->second = z;
    if (first_seen || event || reported_.contains(fruit.id)) continue;
    if (std::abs(fruit.position.x() - groove_center.x()) > config_.half_span ||
        std::abs(fruit.position.y() - groove_center.y()) > config_.half_span) {
      continue;
    }
    for (std::size_t b = 0; b < config_.beam_depths.size(); ++b) {
      const double plane = groove_center.z() - config_.beam_depths[b];
      if (prev_z > plane && z <= plane) {
        reported_.insert(fruit.id);
        event = FallEvent{fruit.id, b, time, step};
        break;
      }
    }
  }
  return event;
}

void GantryConfig::set_max_velocity(double v) {
  x.max_velocity = v;
  y.max_velocity = v;
  z.max_velocity = v;
}

GantrySim::GantrySim(const GantryConfig& config)
    : config_(config),
      axes_{Axis(config.x, config.start.x()), Axis(config.y, config.start.y()), Axis(config.z, config.start.z())},
      lens_(config.lens),
      trapper_(config.trapper),
      interrupters_(config.interrupters) {
  if (!(config.dt > 0.0)) throw ValidationError("time step must be positive");
}

void GantrySim::step(double dt) {
  if (!(dt > 0.0)) throw ValidationError("time step must be positive");
  for (auto& a : axes_) a.step(dt);
  lens_.step(dt);
  trapper_.step(dt);
  time_ += dt;
  ++steps_;
}

bool GantryConfig::within_travel(const Vec3& p) const noexcept {
  return p.x() >= x.min && p.x() <= x.max && p.y() >= y.min && p.y() <= y.max && p.z() >= z.min && p.z() <= z.max;
}

bool GantrySim::within_limits(const Vec3& p) const noexcept { return config_.within_travel(p); }

void GantrySim::command_move(const Vec3& target) {
  if (!within_limits(target)) {
    throw MotionError("move target (" + std::to_string(target.x()) + ", " + std::to_string(target.y()) + ", " +
                      std::to_string(target.z()) + ") outside gantry travel");
  }
  for (std::size_t i = 0; i < 3; ++i) axes_[i].command(target[static_cast<Eigen::Index>(i)]);
}

void GantrySim::set_laser(bool on) {
  if (on && trapper_.mode() != TrapperMode::Closed) throw MotionError("laser interlock: trapper not closed");
  laser_on_ = on;
}

std::optional<FallEvent> GantrySim::check_interrupters(std::span<const FallingFruit> fruits) {
  return interrupters_.check(tool_position(), fruits, time_, steps_);
}

Vec3 GantrySim::tool_position() const { return {axes_[0].position(), axes_[1].position(), axes_[2].position()}; }

bool GantrySim::axes_idle() const noexcept {
  return std::none_of(axes_.begin(), axes_.end(), [](const Axis& a) { return a.moving(); });
}

}  // namespace laserpick
