#include <algorithm>
#include <cmath>
#include <numbers>

#include "laserpick/datasets.hpp"
#include "laserpick/errors.hpp"
#include "laserpick/rng.hpp"
#include "laserpick/scene_io.hpp"

namespace laserpick {

namespace {

// RNG stream ids; documented in docs/scenario_format.md.
constexpr std::uint64_t kStemStream = 1;
constexpr std::uint64_t kCameraStreamBase = 10;

constexpr double kStemDiameterMin = 2.0;
constexpr double kStemDiameterMax = 2.4;

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

std::uint8_t shade(int base, int jitter, double gain, SplitMix64& rng) {
  const auto raw = std::clamp<std::int64_t>(base + rng.uniform_int(-jitter, jitter), 0, 255);
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(static_cast<double>(raw) * gain), 0, 255));
}

ColoredPoint colored(const Vec3& p, const Rgb& base, int jitter, double gain, SplitMix64& rng) {
  ColoredPoint c{p.x(), p.y(), p.z()};
  c.r = shade(base[0], jitter, gain, rng);
  c.g = shade(base[1], jitter, gain, rng);
  c.b = shade(base[2], jitter, gain, rng);
  return c;
}

bool inside(const Vec3& p, const Vec3& lo, const Vec3& hi) {
  return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

struct CameraCloud {
  PointCloud cloud;
  std::vector<int> labels;
};

CameraCloud sample_camera(const Scenario& s, const CameraSpec& camera, Frame frame, std::uint64_t stream) {
  SplitMix64 rng(s.seed, stream);
  std::vector<ColoredPoint> base_points;
  std::vector<int> labels;
  const double gain = s.colors.gain;
  const Vec3 eye = camera.position;

  for (std::size_t bi = 0; bi < s.berries.size(); ++bi) {
    const BerrySpec& berry = s.berries[bi];
    const double a = 0.5 * berry.diameter;
    const double c = 0.5 * berry.height;
    for (std::size_t k = 0; k < s.berry_points; ++k) {
      const double uz = rng.uniform(-1.0, 1.0);
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double ring = std::sqrt(std::max(0.0, 1.0 - uz * uz));
      const Vec3 unit(ring * std::cos(phi), ring * std::sin(phi), uz);
      const Vec3 p = berry.centroid + Vec3(a * unit.x(), a * unit.y(), c * unit.z());
      const Vec3 normal(unit.x() / a, unit.y() / a, unit.z() / c);
      // draw the colour unconditionally so visibility does not shift the stream
      const ColoredPoint pt = colored(p, s.colors.berry, s.colors.berry_jitter, gain, rng);
      if (normal.dot(eye - p) <= 0.0) continue;
      base_points.push_back(pt);
      labels.push_back(static_cast<int>(bi));
    }
  }

  for (const BerrySpec& berry : s.berries) {
    for (std::size_t k = 0; k < s.foliage.stem_points; ++k) {
      const Vec3 p = berry.centroid + Vec3(0.0, 0.0, 0.5 * berry.height + rng.uniform() * berry.stem_length);
      base_points.push_back(colored(p, s.colors.foliage, s.colors.foliage_jitter, gain, rng));
      labels.push_back(static_cast<int>(PointLabel::Foliage));
    }
  }

  const Vec3 half = 0.5 * s.palette.size;
  for (std::size_t k = 0; k < s.palette.points; ++k) {
    const Vec3 p = s.palette.center +
                   Vec3(rng.uniform(-half.x(), half.x()), rng.uniform(-half.y(), half.y()), rng.uniform(-half.z(), half.z()));
    base_points.push_back(colored(p, s.palette.color, s.palette.jitter, gain, rng));
    labels.push_back(static_cast<int>(PointLabel::Palette));
  }

  // Foliage stays out of the palette lever and the palette window.
  const Vec3 margin = Vec3::Constant(0.01);
  const Vec3 lever_lo = (s.palette.center - half).cwiseMin(s.localization.palette_window.lower()) - margin;
  const Vec3 lever_hi = (s.palette.center + half).cwiseMax(s.localization.palette_window.upper()) + margin;
  for (std::size_t k = 0; k < s.foliage.points; ++k) {
    const Vec3 p(rng.uniform(s.foliage.min.x(), s.foliage.max.x()), rng.uniform(s.foliage.min.y(), s.foliage.max.y()),
                 rng.uniform(s.foliage.min.z(), s.foliage.max.z()));
    const ColoredPoint pt = colored(p, s.colors.foliage, s.colors.foliage_jitter, gain, rng);
    if (inside(p, lever_lo, lever_hi)) continue;
    base_points.push_back(pt);
    labels.push_back(static_cast<int>(PointLabel::Foliage));
  }

  const PointCloud in_base(Frame::Base, std::move(base_points));
  return {transform_cloud(camera.base_from_camera().inverse(), in_base, frame), std::move(labels)};
}

}  // namespace

RigidTransform CameraSpec::base_from_camera() const {
  return RigidTransform::from_rpy(deg2rad(rpy_deg.x()), deg2rad(rpy_deg.y()), deg2rad(rpy_deg.z()), position);
}

std::vector<double> Scenario::stem_diameters_mm() const {
  SplitMix64 rng(seed, kStemStream);
  std::vector<double> out;
  out.reserve(berries.size());
  for (const auto& b : berries) {
    // one draw per berry even when overridden, so edits stay local
    const double drawn = rng.uniform(kStemDiameterMin, kStemDiameterMax);
    out.push_back(b.stem_diameter_mm.value_or(drawn));
  }
  return out;
}

CutModel Scenario::cut_model() const {
  return CutModel(embedded_pierce_dataset(laser.dataset), laser.toughness, laser.min_lateral_velocity_mm_s);
}

void Scenario::validate() const {
  for (std::size_t i = 0; i < berries.size(); ++i) {
    const auto& b = berries[i];
    if (!(b.diameter > 0.0) || !(b.height > 0.0)) {
      throw ValidationError("berry " + std::to_string(i) + ": diameter and height must be positive");
    }
    if (b.stem_diameter_mm && !(*b.stem_diameter_mm > 0.0)) {
      throw ValidationError("berry " + std::to_string(i) + ": stem diameter must be positive");
    }
    if (!(b.stem_length >= 0.0) || !(b.toughness > 0.0)) {
      throw ValidationError("berry " + std::to_string(i) + ": stem length >= 0 and toughness > 0 required");
    }
  }
  if (palette.points > 0) {
    const Vec3 half = 0.5 * palette.size;
    const auto& w = localization.palette_window;
    if (!((palette.center - half).array() > w.lower().array()).all() ||
        !((palette.center + half).array() < w.upper().array()).all()) {
      throw ValidationError("palette patch must lie inside the palette window");
    }
  }
  if (!(colors.gain > 0.0)) throw ValidationError("colour gain must be positive");
  if (colors.berry_jitter < 0 || colors.foliage_jitter < 0 || palette.jitter < 0) {
    throw ValidationError("colour jitter must be non-negative");
  }
  for (const Rgb* rgb : {&colors.berry, &colors.foliage, &palette.color}) {
    for (int ch : *rgb) {
      if (ch < 0 || ch > 255) throw ValidationError("colour channels must be in [0, 255]");
    }
  }
  if (!(foliage.min.array() <= foliage.max.array()).all()) throw ValidationError("foliage box min must not exceed max");
  localization.clusters.validate();
  (void)cut_model();
}

GeneratedScene generate_scene(const Scenario& scenario) {
  scenario.validate();
  GeneratedScene scene;
  auto cam1 = sample_camera(scenario, scenario.camera1, Frame::Camera1, kCameraStreamBase + 1);
  auto cam2 = sample_camera(scenario, scenario.camera2, Frame::Camera2, kCameraStreamBase + 2);
  scene.camera1 = std::move(cam1.cloud);
  scene.camera2 = std::move(cam2.cloud);
  scene.truth.labels_camera1 = std::move(cam1.labels);
  scene.truth.labels_camera2 = std::move(cam2.labels);
  for (const auto& b : scenario.berries) scene.truth.berry_centroids.push_back(b.centroid);
  return scene;
}

std::vector<FruitBody> make_fruit_bodies(const Scenario& scenario) {
  const auto stems = scenario.stem_diameters_mm();
  std::vector<FruitBody> fruits;
  fruits.reserve(scenario.berries.size());
  for (std::size_t i = 0; i < scenario.berries.size(); ++i) {
    const auto& b = scenario.berries[i];
    FruitBody f;
    f.centroid = b.centroid;
    f.height = b.height;
    f.stem_diameter_mm = stems[i];
    f.stem_length = b.stem_length;
    f.toughness = b.toughness;
    f.stem = EtchState::for_stem(stems[i]);
    fruits.push_back(f);
  }
  return fruits;
}

}  // namespace laserpick
