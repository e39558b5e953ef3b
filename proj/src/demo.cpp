#include "laserpick/demo.hpp"

#include <string>

#include "laserpick/errors.hpp"

namespace laserpick {

std::vector<BerryBox> localize_scenario(const Scenario& scenario) {
  const GeneratedScene scene = generate_scene(scenario);
  return localize(scene.camera1, scene.camera2, scenario.camera1.base_from_camera(),
                  scenario.camera2.base_from_camera(), scenario.localization);
}

CycleMetrics simulate_boxes(const Scenario& scenario, const std::vector<BerryBox>& boxes) {
  GantrySim sim(scenario.gantry);
  std::vector<FruitBody> fruits = make_fruit_bodies(scenario);
  HarvestController controller(sim, fruits, scenario.cut_model(), scenario.controller);
  return controller.run_demo(boxes);
}

CycleMetrics simulate_scenario(const Scenario& scenario) { return simulate_boxes(scenario, localize_scenario(scenario)); }

double calibrate_max_velocity(const Scenario& scenario, double target_cycle_s, double lo, double hi) {
  const auto boxes = localize_scenario(scenario);
  const auto mean_cycle = [&](double v) {
    Scenario s = scenario;
    s.gantry.set_max_velocity(v);
    const CycleMetrics m = simulate_boxes(s, boxes);
    if (m.successes() == 0) throw ValidationError("calibration run harvested no fruit");
    return m.mean_cycle_s();
  };
  // mean cycle time falls as the axes get faster
  if (mean_cycle(lo) < target_cycle_s || mean_cycle(hi) > target_cycle_s) {
    throw ValidationError("target cycle time " + std::to_string(target_cycle_s) +
                          " s not reachable with max_velocity in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "] m/s");
  }
  for (int it = 0; it < 40 && hi - lo > 1e-6; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_cycle(mid) > target_cycle_s) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace laserpick
