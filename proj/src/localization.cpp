#include "laserpick/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "laserpick/errors.hpp"

namespace laserpick {

SpatialWindow::SpatialWindow(double x0, double x1, double y0, double y1, double z0, double z1)
    : lower_(std::min(x0, x1), std::min(y0, y1), std::min(z0, z1)),
      upper_(std::max(x0, x1), std::max(y0, y1), std::max(z0, z1)) {
  if (!lower_.allFinite() || !upper_.allFinite()) throw ValidationError("window limits must be finite");
}

void ClusterParams::validate() const {
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw ValidationError("cluster tolerance must be > 0");
  if (min_size == 0 || min_size > max_size) throw ValidationError("cluster size bounds must satisfy 0 < min <= max");
}

PointCloud extract_window(const PointCloud& cloud, const SpatialWindow& window) {
  std::vector<ColoredPoint> kept;
  for (const auto& p : cloud) {
    if (window.contains(p)) kept.push_back(p);
  }
  return PointCloud(cloud.frame(), std::move(kept));
}

ColorReference calibration_reference(const PointCloud& palette, const ColorThresholds& thresholds) {
  if (palette.empty()) {
    throw CalibrationError("calibration palette not visible (no points in palette window)");
  }
  if (thresholds.r < 0.0 || thresholds.g < 0.0 || thresholds.b < 0.0) {
    throw ValidationError("colour thresholds must be non-negative");
  }
  // Channel sums are exact in 64-bit integers.
  std::uint64_t sr = 0, sg = 0, sb = 0;
  for (const auto& p : palette) {
    sr += p.r;
    sg += p.g;
    sb += p.b;
  }
  const auto n = static_cast<double>(palette.size());
  return {static_cast<double>(sr) / n,
          static_cast<double>(sg) / n,
          static_cast<double>(sb) / n,
          thresholds.r,
          thresholds.g,
          thresholds.b};
}

PointCloud filter_red(const PointCloud& cloud, const ColorReference& ref) {
  std::vector<ColoredPoint> kept;
  for (const auto& p : cloud) {
    if (std::abs(p.r - ref.mean_r) < ref.r_th && std::abs(p.g - ref.mean_g) < ref.g_th &&
        std::abs(p.b - ref.mean_b) < ref.b_th) {
      kept.push_back(p);
    }
  }
  return PointCloud(cloud.frame(), std::move(kept));
}

PointCloud merge_clouds(const PointCloud& a, const PointCloud& b) {
  if (a.frame() != b.frame()) {
    throw ValidationError("cannot merge clouds in frames " + std::string(to_string(a.frame())) + " and " +
                          std::string(to_string(b.frame())));
  }
  std::vector<ColoredPoint> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  return PointCloud(a.frame(), std::move(all));
}

namespace {

Vec3 mean_position(const PointCloud& cloud, const std::vector<std::size_t>& indices) {
  Vec3 sum = Vec3::Zero();
  for (std::size_t i : indices) sum += cloud[i].position();
  return sum / static_cast<double>(indices.size());
}

}  // namespace

std::vector<std::vector<std::size_t>> euclidean_cluster_indices(const PointCloud& cloud,
                                                                const ClusterParams& params) {
  params.validate();
  const KdTree tree(cloud);
  std::vector<char> visited(cloud.size(), 0);
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> frontier;

  for (std::size_t seed = 0; seed < cloud.size(); ++seed) {
    if (visited[seed]) continue;
    visited[seed] = 1;
    std::vector<std::size_t> members{seed};
    frontier.assign(1, seed);
    while (!frontier.empty()) {
      const std::size_t current = frontier.back();
      frontier.pop_back();
      tree.for_each_in_radius(cloud[current].position(), params.tolerance, [&](std::size_t j) {
        if (!visited[j]) {
          visited[j] = 1;
          members.push_back(j);
          frontier.push_back(j);
        }
      });
    }
    if (members.size() < params.min_size || members.size() > params.max_size) continue;
    std::sort(members.begin(), members.end());
    clusters.push_back(std::move(members));
  }

  std::vector<Vec3> centroids;
  centroids.reserve(clusters.size());
  for (const auto& c : clusters) centroids.push_back(mean_position(cloud, c));
  std::vector<std::size_t> order(clusters.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (centroids[a].y() != centroids[b].y()) return centroids[a].y() < centroids[b].y();
    return centroids[a].x() < centroids[b].x();
  });

  std::vector<std::vector<std::size_t>> sorted;
  sorted.reserve(clusters.size());
  for (std::size_t k : order) sorted.push_back(std::move(clusters[k]));
  return sorted;
}

std::vector<PointCloud> euclidean_clusters(const PointCloud& cloud, const ClusterParams& params) {
  std::vector<PointCloud> out;
  for (const auto& indices : euclidean_cluster_indices(cloud, params)) {
    std::vector<ColoredPoint> pts;
    pts.reserve(indices.size());
    for (std::size_t i : indices) pts.push_back(cloud[i]);
    out.emplace_back(cloud.frame(), std::move(pts));
  }
  return out;
}

std::vector<BerryBox> bounding_boxes(const std::vector<PointCloud>& clusters) {
  std::vector<BerryBox> boxes;
  boxes.reserve(clusters.size());
  for (std::size_t rank = 0; rank < clusters.size(); ++rank) {
    const PointCloud& c = clusters[rank];
    if (c.empty()) throw ValidationError("cannot box an empty cluster");
    BerryBox box;
    box.box.min = c[0].position();
    box.box.max = box.box.min;
    Vec3 sum = Vec3::Zero();
    for (const auto& p : c) {
      const Vec3 q = p.position();
      box.box.min = box.box.min.cwiseMin(q);
      box.box.max = box.box.max.cwiseMax(q);
      sum += q;
    }
    // The mean can round a hair outside a degenerate box; clamp it back in.
    box.centroid = (sum / static_cast<double>(c.size())).cwiseMax(box.box.min).cwiseMin(box.box.max);
    box.point_count = c.size();
    box.rank = rank;
    boxes.push_back(box);
  }
  return boxes;
}

namespace {

PointCloud red_points_for_camera(const PointCloud& camera_cloud, const RigidTransform& base_from_camera,
                                 const LocalizationConfig& config) {
  const PointCloud in_base = transform_cloud(base_from_camera, camera_cloud, Frame::Base);
  const PointCloud reduced = extract_window(in_base, config.scene_window);
  const PointCloud palette = extract_window(in_base, config.palette_window);
  const ColorReference ref = calibration_reference(palette, config.thresholds);
  return filter_red(reduced, ref);
}

}  // namespace

std::vector<BerryBox> localize(const PointCloud& camera1, const PointCloud& camera2,
                               const RigidTransform& base_from_camera1, const RigidTransform& base_from_camera2,
                               const LocalizationConfig& config) {
  config.clusters.validate();
  const PointCloud red = merge_clouds(red_points_for_camera(camera1, base_from_camera1, config),
                                      red_points_for_camera(camera2, base_from_camera2, config));
  return bounding_boxes(euclidean_clusters(red, config.clusters));
}

}  // namespace laserpick
