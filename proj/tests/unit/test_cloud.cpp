#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "occspot/cloud.hpp"
#include "occspot/rng.hpp"

using namespace occspot;
using std::numbers::pi;

TEST(Spherical, AxisUp) {
  const auto s = to_spherical(Vec3(0, 0, 1));
  EXPECT_DOUBLE_EQ(s.range, 1.0);
  EXPECT_NEAR(s.elevation, pi / 2, 1e-15);
  EXPECT_EQ(s.azimuth, 0.0);
}

TEST(Spherical, Diagonal) {
  const auto s = to_spherical(Vec3(1, 1, 0));
  EXPECT_NEAR(s.range, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(s.azimuth, pi / 4, 1e-15);
  EXPECT_EQ(s.elevation, 0.0);
}

TEST(Spherical, ThreeFour) {
  const auto s = to_spherical(Vec3(3, 4, 0));
  EXPECT_NEAR(s.range, 5.0, 1e-15);
  // atan(3/4) to 20 digits
  EXPECT_NEAR(s.azimuth, 0.64350110879328438680, 1e-15);
  EXPECT_EQ(s.elevation, 0.0);
}

TEST(Spherical, OriginConvention) {
  const auto s = to_spherical(Vec3::Zero());
  EXPECT_EQ(s.range, 0.0);
  EXPECT_EQ(s.azimuth, 0.0);
  EXPECT_EQ(s.elevation, 0.0);
}

TEST(Spherical, FromUnit) {
  const Vec3 p = from_spherical({1.0, 0.0, 0.0});
  EXPECT_NEAR((p - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
  EXPECT_EQ(from_spherical({0.0, 1.3, -0.4}), Vec3::Zero());
}

TEST(Spherical, RoundTrip) {
  Rng rng(11);
  for (int i = 0; i < 100000; ++i) {
    // stay off the poles, where azimuth is not recoverable
    const SphericalPoint s{rng.uniform(0.01, 100.0), rng.uniform(-pi + 1e-6, pi),
                           rng.uniform(-pi / 2 + 1e-3, pi / 2 - 1e-3)};
    const auto back = to_spherical(from_spherical(s));
    ASSERT_NEAR(back.range, s.range, 1e-9);
    ASSERT_NEAR(back.azimuth, s.azimuth, 1e-9);
    ASSERT_NEAR(back.elevation, s.elevation, 1e-9);
  }
}

TEST(Spherical, WrapAngle) {
  EXPECT_NEAR(wrap_angle(3 * pi / 2), -pi / 2, 1e-15);
  EXPECT_NEAR(wrap_angle(-pi), pi, 1e-15);
  EXPECT_NEAR(wrap_angle(pi), pi, 1e-15);
}

TEST(Pose, Identity) {
  const Vec3 p(1.5, -2, 3);
  EXPECT_EQ(Pose::identity().apply(p), p);
}

TEST(Pose, QuarterTurn) {
  const Pose q = Pose::from_yaw(pi / 2);
  EXPECT_NEAR((q.apply(Vec3(1, 0, 0)) - Vec3(0, 1, 0)).norm(), 0.0, 1e-12);
}

TEST(Pose, RejectsNonOrthonormal) {
  Mat3 r = Mat3::Identity();
  r(0, 0) = 2.0;
  EXPECT_THROW(Pose(r, Vec3::Zero()), std::invalid_argument);
  Mat3 mirror = Mat3::Identity();
  mirror(2, 2) = -1.0;
  EXPECT_THROW(Pose(mirror, Vec3::Zero()), std::invalid_argument);
}

TEST(Pose, ComposeAndInverse) {
  const Pose a = Pose::from_yaw(0.3, Vec3(1, 2, 3));
  const Pose b = Pose::from_yaw(-1.1, Vec3(-4, 0.5, 2));
  const Vec3 p(0.7, -0.2, 5);
  EXPECT_NEAR(((b * a).apply(p) - b.apply(a.apply(p))).norm(), 0.0, 1e-12);
  EXPECT_NEAR((a.inverse().apply(a.apply(p)) - p).norm(), 0.0, 1e-12);
}

TEST(PointCloud, PushAndSelect) {
  PointCloud c(2);
  const double f0[] = {1, 2}, f1[] = {3, 4};
  c.push_back(Vec3(0, 0, 0), f0);
  c.push_back(Vec3(1, 1, 1), f1);
  const std::size_t idx[] = {1};
  const PointCloud s = c.select(idx);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.xyz(0), Vec3(1, 1, 1));
  EXPECT_EQ(s.features(0)[1], 4.0);
}

TEST(PointCloud, RejectsBadRows) {
  PointCloud c(1);
  const double two[] = {1, 2};
  EXPECT_THROW(c.push_back(Vec3(0, 0, 0), two), std::invalid_argument);
  const double one[] = {1};
  EXPECT_THROW(c.push_back(Vec3(std::nan(""), 0, 0), one), std::invalid_argument);
}

TEST(PointCloud, TransformIdentity) {
  PointCloud c(1);
  const double f[] = {0.5};
  c.push_back(Vec3(1, 2, 3), f);
  EXPECT_EQ(transform(c, Pose::identity()), c);
}

TEST(Labels, AlignmentChecked) {
  PointCloud c(1);
  const double f[] = {0.5};
  c.push_back(Vec3(1, 2, 3), f);
  PointLabels l;
  EXPECT_THROW(check_aligned(c, l), std::invalid_argument);
  l.values.push_back(3);
  EXPECT_NO_THROW(check_aligned(c, l));
}

TEST(BoxLabel, LocalFrameRoundTrip) {
  BoxLabel b;
  b.center = Vec3(2, -1, 0.5);
  b.size = Vec3(4, 2, 1);
  b.yaw = 0.7;
  const Vec3 p(3, 0, 0.2);
  EXPECT_NEAR((b.from_local(b.to_local(p)) - p).norm(), 0.0, 1e-12);
  EXPECT_TRUE(b.contains(b.center));
  EXPECT_THROW((BoxLabel{Vec3::Zero(), Vec3(0, 1, 1)}.validate(15)), std::invalid_argument);
}
