#pragma once

#include <vector>

#include "laserpick/harvest_controller.hpp"
#include "laserpick/localization.hpp"
#include "laserpick/scene_io.hpp"

namespace laserpick {

/// Generates the scenario's camera clouds and runs the localization pipeline.
std::vector<BerryBox> localize_scenario(const Scenario& scenario);

/// Fresh gantry and fruits from the scenario, then run_demo over `boxes`.
CycleMetrics simulate_boxes(const Scenario& scenario, const std::vector<BerryBox>& boxes);

/// localize_scenario followed by simulate_boxes.
CycleMetrics simulate_scenario(const Scenario& scenario);

/// Bisects the common axis max_velocity so the demo's mean cycle time hits
/// `target_cycle_s`. Boxes are localized once. Returns the velocity in m/s;
/// throws ValidationError when the target lies outside what [lo, hi] reaches.
double calibrate_max_velocity(const Scenario& scenario, double target_cycle_s, double lo = 0.01, double hi = 2.0);

}  // namespace laserpick
