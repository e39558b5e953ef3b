#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "laserpick/geometry.hpp"

namespace laserpick {

struct AxisLimits {
  double min = 0.0;  // m
  double max = 0.0;  // m
  double max_velocity = 0.5;  // m/s
  double max_accel = 2.0;  // m/s^2
};

/// Duration of a rest-to-rest trapezoidal (or triangular) move.
double trapezoid_duration(double distance, double max_velocity, double max_accel);

/// One linear axis following rest-to-rest trapezoidal velocity profiles.
class Axis {
 public:
  Axis(const AxisLimits& limits, double position);

  /// Throws MotionError if the target is outside travel or the axis is busy
  /// with a different target.
  void command(double target);
  void step(double dt);

  bool moving() const noexcept { return moving_; }
  double position() const noexcept { return position_; }
  double velocity() const noexcept { return velocity_; }
  double target() const noexcept { return target_; }
  const AxisLimits& limits() const noexcept { return limits_; }
  bool within_travel(double p) const noexcept { return p >= limits_.min && p <= limits_.max; }

 private:
  AxisLimits limits_;
  double position_;
  double velocity_ = 0.0;
  double target_;
  bool moving_ = false;
  // profile of the active move
  double start_ = 0.0;
  double direction_ = 1.0;
  double distance_ = 0.0;
  double t_accel_ = 0.0;
  double t_cruise_ = 0.0;
  double v_peak_ = 0.0;
  double duration_ = 0.0;
  double elapsed_ = 0.0;
};

struct LensConfig {
  double travel_mm = 5.0;
  double stroke_mm = 4.0;
  double homing_speed_mm_s = 10.0;
  double initial_position_mm = 2.5;
};

/// Open-loop lens carriage. Its position is only trusted after driving onto
/// the limit switch at 0; finishing an oscillation invalidates the reference.
class LensAxis {
 public:
  enum class Mode { Idle, Homing, Oscillating };

  explicit LensAxis(const LensConfig& config);

  void home();
  /// Throws MotionError unless homed.
  void start_oscillation(double lateral_velocity_mm_s);
  void stop();
  void step(double dt);

  double position_mm() const noexcept { return position_; }
  bool homed() const noexcept { return homed_; }
  Mode mode() const noexcept { return mode_; }
  double lateral_velocity() const noexcept { return mode_ == Mode::Oscillating ? velocity_ : 0.0; }
  const LensConfig& config() const noexcept { return config_; }

 private:
  LensConfig config_;
  double position_;
  bool homed_ = false;
  Mode mode_ = Mode::Idle;
  double velocity_ = 0.0;
  double direction_ = 1.0;
};

enum class TrapperMode { Open, Closed, Moving };

struct TrapperConfig {
  double open_angle_deg = 90.0;
  double closed_angle_deg = 120.0;
  double slew_rate_deg_s = 150.0;
  /// Largest horizontal stem offset from the groove centre that the v-shaped
  /// rod still funnels into the groove.
  double capture_radius = 0.020;
  double groove_width = 0.004;
};

class Trapper {
 public:
  explicit Trapper(const TrapperConfig& config);

  /// Accepts Open or Closed; throws ValidationError for Moving.
  void command(TrapperMode mode);
  void step(double dt);

  double angle_deg() const noexcept { return angle_; }
  TrapperMode mode() const noexcept;
  bool captures(double horizontal_offset) const noexcept { return horizontal_offset <= config_.capture_radius; }
  const TrapperConfig& config() const noexcept { return config_; }

 private:
  TrapperConfig config_;
  double angle_;
  double target_;
};

struct InterrupterConfig {
  /// Beam planes below the groove centre, meters.
  std::vector<double> beam_depths{0.030, 0.045, 0.060};
  /// Beams cover |dx|, |dy| <= half_span around the groove centre.
  double half_span = 0.0125;
};

struct FallingFruit {
  int id = 0;
  Vec3 position = Vec3::Zero();
};

struct FallEvent {
  int fruit_id = 0;
  std::size_t beam = 0;
  double time = 0.0;
  std::int64_t step = 0;
};

/// Three horizontal beams fixed to the tool. Reports a fruit the first time
/// its centre passes downward through any beam plane inside the beam span;
/// each fruit is reported at most once.
class InterrupterBank {
 public:
  explicit InterrupterBank(const InterrupterConfig& config) : config_(config) {}

  std::optional<FallEvent> check(const Vec3& groove_center, std::span<const FallingFruit> fruits, double time,
                                 std::int64_t step);
  const InterrupterConfig& config() const noexcept { return config_; }

 private:
  InterrupterConfig config_;
  std::map<int, double> last_z_;
  std::set<int> reported_;
};

struct GantryConfig {
  AxisLimits x{-0.24, 0.24, 0.5, 2.0};  // 0.48 m working stroke
  AxisLimits y{-0.20, 0.20, 0.5, 2.0};
  AxisLimits z{0.20, 0.80, 0.5, 2.0};
  Vec3 start{0.0, 0.0, 0.45};
  LensConfig lens;
  TrapperConfig trapper;
  InterrupterConfig interrupters;
  double dt = 0.001;

  /// Sets max_velocity on all three axes.
  void set_max_velocity(double v);
  bool within_travel(const Vec3& p) const noexcept;
};

/// Stepped simulation of the Cartesian tool. Positions refer to the centre
/// of the trapping groove.
class GantrySim {
 public:
  explicit GantrySim(const GantryConfig& config = {});

  void step(double dt);
  void step() { step(config_.dt); }

  /// Concurrent move of all three axes. Throws MotionError when any target is
  /// outside travel.
  void command_move(const Vec3& target);
  bool within_limits(const Vec3& p) const noexcept;

  void home_lens() { lens_.home(); }
  void start_lens_oscillation(double lateral_velocity_mm_s) { lens_.start_oscillation(lateral_velocity_mm_s); }
  void stop_lens_oscillation() { lens_.stop(); }
  void set_trapper(TrapperMode mode) { trapper_.command(mode); }
  /// Throws MotionError when energising with the trapper not fully closed.
  void set_laser(bool on);

  std::optional<FallEvent> check_interrupters(std::span<const FallingFruit> fruits);

  Vec3 tool_position() const;
  bool axes_idle() const noexcept;
  bool laser_on() const noexcept { return laser_on_; }
  double time() const noexcept { return time_; }
  std::int64_t steps() const noexcept { return steps_; }
  double dt() const noexcept { return config_.dt; }

  const Axis& axis(std::size_t i) const { return axes_.at(i); }
  const LensAxis& lens() const noexcept { return lens_; }
  const Trapper& trapper() const noexcept { return trapper_; }
  const GantryConfig& config() const noexcept { return config_; }

 private:
  GantryConfig config_;
  std::array<Axis, 3> axes_;
  LensAxis lens_;
  Trapper trapper_;
  InterrupterBank interrupters_;
  bool laser_on_ = false;
  double time_ = 0.0;
  std::int64_t steps_ = 0;
};

}  // namespace laserpick
