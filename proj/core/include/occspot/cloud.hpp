#ifndef OCCSPOT_CLOUD_HPP
#define OCCSPOT_CLOUD_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace occspot {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// ============================================================================
// Points
// ============================================================================

/// One row of a point cloud: coordinates in meters plus a d-vector of
/// per-point features (intensity or normalized range when d = 1).
struct CartesianPoint {
  Vec3 xyz = Vec3::Zero();
  std::vector<double> feature;
};

/// Range / azimuth / elevation. Azimuth is measured from +y towards +x
/// (atan2(x, y)), elevation from the xy-plane towards +z.
struct SphericalPoint {
  double range = 0.0;      // meters, >= 0
  double azimuth = 0.0;    // radians, (-pi, pi]
  double elevation = 0.0;  // radians, [-pi/2, pi/2]
};

/// The origin maps to azimuth = elevation = 0.
SphericalPoint to_spherical(const Vec3& p);
inline SphericalPoint to_spherical(const CartesianPoint& p) { return to_spherical(p.xyz); }

Vec3 from_spherical(const SphericalPoint& s);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

// ============================================================================
// Rigid transforms
// ============================================================================

/// Rigid transform p' = R p + t. The constructor rejects rotations that are
/// not orthonormal with det +1 (tolerance 1e-9).
class Pose {
 public:
  Pose() = default;
  Pose(const Mat3& rotation, const Vec3& translation);

  static Pose identity() { return {}; }
  /// Rotation about +z by `yaw` radians followed by translation.
  static Pose from_yaw(double yaw, const Vec3& translation = Vec3::Zero());

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& translation() const noexcept { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 apply_direction(const Vec3& v) const { return rotation_ * v; }
  Pose inverse() const;

  /// (b * a).apply(p) == b.apply(a.apply(p)).
  friend Pose operator*(const Pose& b, const Pose& a);

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

// ============================================================================
// Point cloud
// ============================================================================

/// N points sharing one feature dimensionality d. Coordinates are stored
/// contiguously; features as a row-major N x d block.
class PointCloud {
 public:
  explicit PointCloud(std::size_t feature_dim = 1) : feature_dim_(feature_dim) {}

  std::size_t size() const noexcept { return coords_.size(); }
  bool empty() const noexcept { return coords_.empty(); }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  void reserve(std::size_t n);
  /// Throws std::invalid_argument on non-finite values or a feature length != d.
  void push_back(const Vec3& xyz, std::span<const double> feature);
  void push_back(const CartesianPoint& p) { push_back(p.xyz, p.feature); }

  const Vec3& xyz(std::size_t i) const { return coords_[i]; }
  std::span<const double> features(std::size_t i) const {
    return {features_.data() + i * feature_dim_, feature_dim_};
  }
  CartesianPoint point(std::size_t i) const;

  const std::vector<Vec3>& coords() const noexcept { return coords_; }
  const std::vector<double>& feature_block() const noexcept { return features_; }

  /// Cloud with only the points at `indices`, in the given order.
  PointCloud select(std::span<const std::size_t> indices) const;
  void append(const PointCloud& other);

  friend bool operator==(const PointCloud& a, const PointCloud& b);

 private:
  std::size_t feature_dim_;
  std::vector<Vec3> coords_;
  std::vector<double> features_;
};

/// Applies `pose` to every coordinate; features and order unchanged.
PointCloud transform(const PointCloud& cloud, const Pose& pose);

// ============================================================================
// Labels
// ============================================================================

/// Per-point semantic labels in [0, n_cls]; 0 is "empty".
struct PointLabels {
  std::vector<std::uint8_t> values;

  std::size_t size() const noexcept { return values.size(); }
  PointLabels select(std::span<const std::size_t> indices) const;
  friend bool operator==(const PointLabels&, const PointLabels&) = default;
};

/// Throws std::invalid_argument unless labels.size() == cloud.size().
void check_aligned(const PointCloud& cloud, const PointLabels& labels);

/// Oriented 3D box (yaw about +z) with xy velocity.
struct BoxLabel {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();  // length (along heading), width, height
  double yaw = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  int class_id = 1;
  bool is_dynamic = false;

  /// Throws std::invalid_argument on non-positive sizes or class outside [1, n_cls].
  void validate(int n_cls) const;

  /// Box-local coordinates: heading along +x, origin at the center.
  Vec3 to_local(const Vec3& p) const;
  Vec3 from_local(const Vec3& q) const;
  /// Inclusive containment.
  bool contains(const Vec3& p, double tolerance = 0.0) const;
  double speed() const;

  friend bool operator==(const BoxLabel&, const BoxLabel&) = default;
};

}  // namespace occspot

#endif  // OCCSPOT_CLOUD_HPP
