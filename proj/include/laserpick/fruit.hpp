#pragma once

#include <cstdint>

#include "laserpick/geometry.hpp"
#include "laserpick/laser_model.hpp"

namespace laserpick {

inline constexpr double kGravity = 9.81;  // m/s^2

/// Physical fruit used by the harvest simulation. While attached it hangs
/// still below a vertical stem; once severed its centroid free-falls from the
/// release point (no drag, no tumbling).
struct FruitBody {
  Vec3 centroid = Vec3::Zero();
  double height = 0.030;  // m, vertical extent
  double stem_diameter_mm = 2.2;
  double stem_length = 0.05;  // m
  double toughness = 1.0;
  EtchState stem;
  bool attached = true;
  double fall_velocity = 0.0;  // m/s, downward

  Vec3 release_point = Vec3::Zero();
  double release_time = 0.0;

  double top_z() const noexcept { return centroid.z() + 0.5 * height; }

  void release(double time) {
    attached = false;
    release_point = centroid;
    release_time = time;
    fall_velocity = 0.0;
  }

  /// Ballistic update to absolute simulation time `time`.
  void update(double time) {
    if (attached) return;
    const double t = time - release_time;
    centroid = release_point - Vec3(0.0, 0.0, 0.5 * kGravity * t * t);
    fall_velocity = kGravity * t;
  }
};

}  // namespace laserpick
