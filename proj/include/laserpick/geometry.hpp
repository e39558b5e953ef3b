#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace laserpick {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class Frame { Camera1, Camera2, Base };

std::string_view to_string(Frame frame) noexcept;

/// Point in meters with 8-bit colour channels.
struct ColoredPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  Vec3 position() const noexcept { return {x, y, z}; }

  friend bool operator==(const ColoredPoint&, const ColoredPoint&) = default;
};

/// Ordered, immutable point set expressed in a single frame.
class PointCloud {
 public:
  explicit PointCloud(Frame frame = Frame::Base) : frame_(frame) {}

  /// Throws ValidationError if any coordinate is not finite.
  PointCloud(Frame frame, std::vector<ColoredPoint> points);

  Frame frame() const noexcept { return frame_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  std::span<const ColoredPoint> points() const noexcept { return points_; }
  const ColoredPoint& operator[](std::size_t i) const { return points_[i]; }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  Frame frame_;
  std::vector<ColoredPoint> points_;
};

/// Proper rigid motion p' = R p + t. The rotation is checked on construction:
/// orthonormal and det(R) = +1, both within 1e-9.
class RigidTransform {
 public:
  static constexpr double kTolerance = 1e-9;

  RigidTransform() = default;
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  /// Rotation R = Rz(yaw) * Ry(pitch) * Rx(roll), angles in radians.
  static RigidTransform from_rpy(double roll, double pitch, double yaw, const Vec3& t);

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  RigidTransform inverse() const;
  /// (*this) after `rhs`: x -> this(rhs(x)).
  RigidTransform operator*(const RigidTransform& rhs) const;

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

PointCloud transform_cloud(const RigidTransform& transform, const PointCloud& cloud, Frame target_frame);

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const noexcept {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  Vec3 center() const { return 0.5 * (min + max); }
};

/// Static 3-D index for fixed-radius queries. Nodes split at the median of
/// the widest axis, with equal coordinates ordered by point index, so the
/// layout depends only on the input order.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(const PointCloud& cloud);

  std::size_t size() const noexcept { return coords_.size(); }

  /// Indices i with |p_i - q| <= radius, ascending. Throws ValidationError on
  /// negative or non-finite radius.
  std::vector<std::size_t> radius_search(const Vec3& query, double radius) const;

  /// Visits the same indices as radius_search, unordered and without
  /// allocating. Radius must already be validated.
  template <typename Visitor>
  void for_each_in_radius(const Vec3& query, double radius, Visitor&& visit) const;

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;  // child node indices, -1 for leaves
    std::int32_t right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);

  std::vector<Vec3> coords_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

inline KdTree build_kdtree(const PointCloud& cloud) { return KdTree(cloud); }

template <typename Visitor>
void KdTree::for_each_in_radius(const Vec3& query, double radius, Visitor&& visit) const {
  if (nodes_.empty()) return;
  const double r2 = radius * radius;
  std::int32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
    if (node.left < 0) {
      for (std::uint32_t k = node.begin; k < node.end; ++k) {
        const std::uint32_t idx = order_[k];
        if ((coords_[idx] - query).squaredNorm() <= r2) visit(static_cast<std::size_t>(idx));
      }
      continue;
    }
    const double delta = query[node.axis] - node.split;
    // left holds coordinates <= split, right holds coordinates >= split
    if (delta >= -radius) stack[top++] = node.right;
    if (delta <= radius) stack[top++] = node.left;
  }
}

}  // namespace laserpick
