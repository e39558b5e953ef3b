#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "laserpick/fruit.hpp"
#include "laserpick/gantry_sim.hpp"
#include "laserpick/geometry.hpp"
#include "laserpick/harvest_controller.hpp"
#include "laserpick/localization.hpp"

namespace laserpick {

using Rgb = std::array<int, 3>;

struct BerrySpec {
  Vec3 centroid = Vec3::Zero();
  double diameter = 0.025;  // m, horizontal
  double height = 0.030;  // m, vertical
  /// Drawn from the scenario seed in [2.0, 2.4] mm when absent.
  std::optional<double> stem_diameter_mm;
  double stem_length = 0.05;  // m
  double toughness = 1.0;
};

struct PaletteSpec {
  Vec3 center{-0.08, 0.105, 0.325};
  Vec3 size{0.016, 0.008, 0.040};
  Rgb color{190, 35, 45};
  int jitter = 5;
  std::size_t points = 400;
};

struct CameraSpec {
  Vec3 position = Vec3::Zero();
  Vec3 rpy_deg = Vec3::Zero();

  RigidTransform base_from_camera() const;
};

struct ColorSpec {
  Rgb berry{190, 35, 45};
  int berry_jitter = 20;
  Rgb foliage{60, 140, 60};
  int foliage_jitter = 25;
  /// Global illumination gain applied to every generated colour.
  double gain = 1.0;
};

struct FoliageSpec {
  std::size_t points = 20000;  // per camera
  Vec3 min{-0.35, -0.25, 0.25};
  Vec3 max{0.35, 0.25, 0.75};
  std::size_t stem_points = 40;  // per stem, per camera
};

struct LaserSpec {
  double spot_diameter_mm = 0.9;
  double lateral_velocity_mm_s = 96.0;
  std::string dataset = "fine";
  double min_lateral_velocity_mm_s = CutModel::kDefaultMinLateralVelocity;
  double toughness = 1.0;
};

/// Declarative synthetic world with everything needed to generate camera
/// clouds and run a harvest.
struct Scenario {
  std::uint64_t seed = 0;
  std::size_t berry_points = 1200;  // full-surface samples per berry, per camera
  std::vector<BerrySpec> berries;
  PaletteSpec palette;
  CameraSpec camera1{{0.05, -0.45, 0.62}, {-95.0, 3.0, 2.0}};
  CameraSpec camera2{{-0.05, 0.45, 0.58}, {95.0, -2.0, 178.0}};
  ColorSpec colors;
  FoliageSpec foliage;
  GantryConfig gantry;
  LocalizationConfig localization;
  HarvestConfig controller;
  LaserSpec laser;

  /// Per-berry stem diameters, resolving seeded defaults.
  std::vector<double> stem_diameters_mm() const;
  CutModel cut_model() const;
  void validate() const;
};

enum class PointLabel : int { Foliage = -1, Palette = -2 };

/// label >= 0 is a berry index; negative values are PointLabel.
struct GroundTruth {
  std::vector<int> labels_camera1;
  std::vector<int> labels_camera2;
  std::vector<Vec3> berry_centroids;
};

struct GeneratedScene {
  PointCloud camera1{Frame::Camera1};
  PointCloud camera2{Frame::Camera2};
  GroundTruth truth;
};

/// Pure function of the scenario (seed included).
GeneratedScene generate_scene(const Scenario& scenario);

/// Physical fruits for the harvest simulation, one per berry spec.
std::vector<FruitBody> make_fruit_bodies(const Scenario& scenario);

/// Parses the sectioned key = value scenario format (see docs/scenario_format.md).
/// Throws ParseError on unknown or duplicate keys, missing required keys and
/// malformed values.
Scenario parse_scenario(std::istream& in);
Scenario load_scenario(const std::filesystem::path& path);

/// ASCII PCD, fields x y z rgb with rgb packed as (r << 16 | g << 8 | b).
void write_pcd(const PointCloud& cloud, std::ostream& out);
void write_pcd(const PointCloud& cloud, const std::filesystem::path& path);
/// The PCD format carries no frame; the caller names it.
PointCloud read_pcd(std::istream& in, Frame frame);
PointCloud read_pcd(const std::filesystem::path& path, Frame frame);

}  // namespace laserpick
