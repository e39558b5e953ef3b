#include "laserpick/geometry.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "laserpick/errors.hpp"

namespace laserpick {

namespace {

constexpr std::uint32_t kLeafSize = 8;

}  // namespace

std::string_view to_string(Frame frame) noexcept {
  switch (frame) {
    case Frame::Camera1:
      return "camera-1";
    case Frame::Camera2:
      return "camera-2";
    case Frame::Base:
      return "harvester-base";
  }
  return "unknown";
}

PointCloud::PointCloud(Frame frame, std::vector<ColoredPoint> points) : frame_(frame), points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& p = points_[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw ValidationError("point " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw ValidationError("rigid transform has non-finite entries");
  }
  const double ortho_err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > kTolerance) {
    throw ValidationError("rotation is not orthonormal (deviation " + std::to_string(ortho_err) + ")");
  }
  if (std::abs(rotation.determinant() - 1.0) > kTolerance) {
    throw ValidationError("rotation determinant is not +1");
  }
}

RigidTransform RigidTransform::from_rpy(double roll, double pitch, double yaw, const Vec3& t) {
  const Mat3 r = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                  Eigen::AngleAxisd(roll, Vec3::UnitX()))
                     .toRotationMatrix();
  return {r, t};
}

RigidTransform RigidTransform::inverse() const {
  const Mat3 rt = rotation_.transpose();
  return {rt, -(rt * translation_)};
}

RigidTransform RigidTransform::operator*(const RigidTransform& rhs) const {
  return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
}

PointCloud transform_cloud(const RigidTransform& transform, const PointCloud& cloud, Frame target_frame) {
  std::vector<ColoredPoint> out;
  out.reserve(cloud.size());
  const Mat3& r = transform.rotation();
  const Vec3& t = transform.translation();
  for (const auto& p : cloud) {
    const Vec3 q = r * p.position() + t;
    out.push_back({q.x(), q.y(), q.z(), p.r, p.g, p.b});
  }
  return PointCloud(target_frame, std::move(out));
}

KdTree::KdTree(const PointCloud& cloud) {
  if (cloud.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("cloud too large for kd-tree");
  }
  coords_.reserve(cloud.size());
  for (const auto& p : cloud) coords_.push_back(p.position());
  order_.resize(coords_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!coords_.empty()) {
    nodes_.reserve(2 * coords_.size() / kLeafSize + 1);
    build(0, static_cast<std::uint32_t>(coords_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (std::uint32_t k = begin; k < end; ++k) {
    lo = lo.cwiseMin(coords_[order_[k]]);
    hi = hi.cwiseMax(coords_[order_[k]]);
  }
  Eigen::Index axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::uint32_t mid = begin + (end - begin) / 2;
  const auto ax = static_cast<std::size_t>(axis);
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = coords_[a][ax];
                     const double cb = coords_[b][ax];
                     return ca < cb || (ca == cb && a < b);
                   });

  const double split = coords_[order_[mid]][ax];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.left = left;
  node.right = right;
  node.axis = static_cast<std::uint8_t>(axis);
  node.split = split;
  return id;
}

std::vector<std::size_t> KdTree::radius_search(const Vec3& query, double radius) const {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw ValidationError("radius must be finite and non-negative");
  }
  std::vector<std::size_t> out;
  for_each_in_radius(query, radius, [&](std::size_t i) { out.push_back(i); });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace laserpick
