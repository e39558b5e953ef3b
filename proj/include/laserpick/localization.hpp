#pragma once

#include <cstddef>
#include <vector>

#include "laserpick/geometry.hpp"

namespace laserpick {

/// Open box (strict bounds). Each axis pair may be given in either order;
/// the constructor sorts it, so both (min, max) and (max, min) argument
/// conventions describe the same window.
class SpatialWindow {
 public:
  SpatialWindow(double x0, double x1, double y0, double y1, double z0, double z1);

  const Vec3& lower() const noexcept { return lower_; }
  const Vec3& upper() const noexcept { return upper_; }

  bool contains(const ColoredPoint& p) const noexcept {
    return p.x > lower_.x() && p.x < upper_.x() && p.y > lower_.y() && p.y < upper_.y() && p.z > lower_.z() &&
           p.z < upper_.z();
  }

 private:
  Vec3 lower_;
  Vec3 upper_;
};

struct ColorReference {
  double mean_r = 0.0;
  double mean_g = 0.0;
  double mean_b = 0.0;
  double r_th = 0.0;
  double g_th = 0.0;
  double b_th = 0.0;
};

struct ClusterParams {
  double tolerance = 0.010;  // meters
  std::size_t min_size = 40;
  std::size_t max_size = 50000;

  void validate() const;
};

struct BerryBox {
  Aabb box;
  Vec3 centroid = Vec3::Zero();
  std::size_t point_count = 0;
  std::size_t rank = 0;
};

struct ColorThresholds {
  double r = 45.0;
  double g = 45.0;
  double b = 45.0;
};

/// Everything localize() needs besides the clouds. Defaults reproduce the
/// harvester's working volume and the on-tool palette location.
struct LocalizationConfig {
  SpatialWindow scene_window{-0.3, 0.3, -0.2, 0.2, 0.5, 0.7};
  SpatialWindow palette_window{-0.09, -0.07, 0.1, 0.11, 0.3, 0.35};
  ColorThresholds thresholds;
  ClusterParams clusters;
};

PointCloud extract_window(const PointCloud& cloud, const SpatialWindow& window);

/// Per-channel arithmetic mean of the palette points. Throws CalibrationError
/// when the palette cloud is empty.
ColorReference calibration_reference(const PointCloud& palette, const ColorThresholds& thresholds);

PointCloud filter_red(const PointCloud& cloud, const ColorReference& ref);

/// Concatenation, `a` first. Throws ValidationError on frame mismatch.
PointCloud merge_clouds(const PointCloud& a, const PointCloud& b);

/// Connected components of the "within tolerance" graph, size-filtered to
/// [min_size, max_size] and ordered by ascending centroid y (ties: centroid x).
/// Points inside each cluster keep their input order.
std::vector<PointCloud> euclidean_clusters(const PointCloud& cloud, const ClusterParams& params);

/// Same components as euclidean_clusters, reported as input indices.
std::vector<std::vector<std::size_t>> euclidean_cluster_indices(const PointCloud& cloud,
                                                                const ClusterParams& params);

std::vector<BerryBox> bounding_boxes(const std::vector<PointCloud>& clusters);

/// Full two-camera pipeline: transform to base, crop, calibrate against the
/// palette seen by the same camera, red-filter, merge, cluster, box.
std::vector<BerryBox> localize(const PointCloud& camera1, const PointCloud& camera2,
                               const RigidTransform& base_from_camera1, const RigidTransform& base_from_camera2,
                               const LocalizationConfig& config);

}  // namespace laserpick
