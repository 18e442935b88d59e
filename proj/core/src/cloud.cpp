#include "occspot/cloud.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace occspot {

SphericalPoint to_spherical(const Vec3& p) {
  SphericalPoint s;
  const double horizontal = std::hypot(p.x(), p.y());
  s.range = std::sqrt(p.x() * p.x() + p.y() * p.y() + p.z() * p.z());
  if (s.range == 0.0) return s;
  s.azimuth = horizontal == 0.0 ? 0.0 : std::atan2(p.x(), p.y());
  // atan2 returns -pi for (-0, -y); fold onto +pi.
  if (s.azimuth == -std::numbers::pi) s.azimuth = std::numbers::pi;
  s.elevation = std::atan2(p.z(), horizontal);
  return s;
}

Vec3 from_spherical(const SphericalPoint& s) {
  const double c = std::cos(s.elevation);
  return {s.range * c * std::sin(s.azimuth), s.range * c * std::cos(s.azimuth),
          s.range * std::sin(s.elevation)};
}

double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

Pose::Pose(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw std::invalid_argument("pose: non-finite rotation or translation");
  }
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-9) {
    throw std::invalid_argument("pose: rotation is not orthonormal (max |R^T R - I| = " +
                                std::to_string(ortho) + ")");
  }
  if (std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw std::invalid_argument("pose: rotation determinant is not +1");
  }
}

Pose Pose::from_yaw(double yaw, const Vec3& translation) {
  return {Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix(), translation};
}

Pose Pose::inverse() const {
  Pose inv;
  inv.rotation_ = rotation_.transpose();
  inv.translation_ = -(inv.rotation_ * translation_);
  return inv;
}

Pose operator*(const Pose& b, const Pose& a) {
  Pose out;
  out.rotation_ = b.rotation_ * a.rotation_;
  out.translation_ = b.rotation_ * a.translation_ + b.translation_;
  return out;
}

void PointCloud::reserve(std::size_t n) {
  coords_.reserve(n);
  features_.reserve(n * feature_dim_);
}

void PointCloud::push_back(const Vec3& xyz, std::span<const double> feature) {
  if (!xyz.allFinite()) throw std::invalid_argument("point cloud: non-finite coordinate");
  if (feature.size() != feature_dim_) {
    throw std::invalid_argument("point cloud: feature length " + std::to_string(feature.size()) +
                                " != feature_dim " + std::to_string(feature_dim_));
  }
  for (double f : feature) {
    if (!std::isfinite(f)) throw std::invalid_argument("point cloud: non-finite feature");
  }
  coords_.push_back(xyz);
  features_.insert(features_.end(), feature.begin(), feature.end());
}

CartesianPoint PointCloud::point(std::size_t i) const {
  const auto f = features(i);
  return {coords_[i], {f.begin(), f.end()}};
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  PointCloud out(feature_dim_);
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    out.coords_.push_back(coords_.at(i));
    const auto f = features(i);
    out.features_.insert(out.features_.end(), f.begin(), f.end());
  }
  return out;
}

void PointCloud::append(const PointCloud& other) {
  if (other.feature_dim_ != feature_dim_) {
    throw std::invalid_argument("point cloud: cannot append clouds with different feature_dim");
  }
  coords_.insert(coords_.end(), other.coords_.begin(), other.coords_.end());
  features_.insert(features_.end(), other.features_.begin(), other.features_.end());
}

bool operator==(const PointCloud& a, const PointCloud& b) {
  return a.feature_dim_ == b.feature_dim_ && a.coords_ == b.coords_ && a.features_ == b.features_;
}

PointCloud transform(const PointCloud& cloud, const Pose& pose) {
  PointCloud out(cloud.feature_dim());
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out.push_back(pose.apply(cloud.xyz(i)), cloud.features(i));
  }
  return out;
}

PointLabels PointLabels::select(std::span<const std::size_t> indices) const {
  PointLabels out;
  out.values.reserve(indices.size());
  for (std::size_t i : indices) out.values.push_back(values.at(i));
  return out;
}

void check_aligned(const PointCloud& cloud, const PointLabels& labels) {
  if (cloud.size() != labels.size()) {
    throw std::invalid_argument("labels: length " + std::to_string(labels.size()) +
                                " does not match cloud size " + std::to_string(cloud.size()));
  }
}

void BoxLabel::validate(int n_cls) const {
  if (!(size.x() > 0.0 && size.y() > 0.0 && size.z() > 0.0)) {
    throw std::invalid_argument("box: sizes must be strictly positive");
  }
  if (!center.allFinite() || !std::isfinite(yaw) || !std::isfinite(vx) || !std::isfinite(vy)) {
    throw std::invalid_argument("box: non-finite field");
  }
  if (class_id < 1 || class_id > n_cls) {
    throw std::invalid_argument("box: class_id " + std::to_string(class_id) + " outside [1, " +
                                std::to_string(n_cls) + "]");
  }
}

Vec3 BoxLabel::to_local(const Vec3& p) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  const Vec3 d = p - center;
  return {c * d.x() + s * d.y(), -s * d.x() + c * d.y(), d.z()};
}

Vec3 BoxLabel::from_local(const Vec3& q) const {
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return {center.x() + c * q.x() - s * q.y(), center.y() + s * q.x() + c * q.y(), center.z() + q.z()};
}

bool BoxLabel::contains(const Vec3& p, double tolerance) const {
  const Vec3 q = to_local(p);
  return std::abs(q.x()) <= 0.5 * size.x() + tolerance &&
         std::abs(q.y()) <= 0.5 * size.y() + tolerance &&
         std::abs(q.z()) <= 0.5 * size.z() + tolerance;
}

double BoxLabel::speed() const { return std::hypot(vx, vy); }

}  // namespace occspot
