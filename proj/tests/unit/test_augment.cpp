#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "occspot/augment.hpp"
#include "occspot/synth.hpp"

using namespace occspot;
using std::numbers::pi;

namespace {

ScanResult scan64(std::uint64_t seed) {
  SceneParams p = default_scene_params();
  p.n_objects = 10;
  const BeamSpec beams{64, 2.0, -24.8, 360};
  return scan(build_scene(p, seed), beams, Pose::from_yaw(0.0, Vec3(0, 0, 1.8)));
}

double rational_density(int n, double up, double low) {
  const oracle::Rational r = oracle::Rational(n) / (oracle::Rational(up) - oracle::Rational(low));
  return static_cast<double>(r);
}

using Key = std::tuple<double, double, double>;
std::set<Key> point_set(const PointCloud& c) {
  std::set<Key> s;
  for (const auto& p : c.coords()) s.emplace(p.x(), p.y(), p.z());
  return s;
}

}  // namespace

TEST(Density, WorkedCases) {
  EXPECT_EQ(beam_density(BeamSpec{40, 20.0, 0.0, 10}), 2.0);
  EXPECT_EQ(beam_density(BeamSpec{64, 10.0, -30.0, 10}), 1.6);
  EXPECT_THROW(beam_density(BeamSpec{8, 1.0, 1.0, 10}), std::invalid_argument);
}

TEST(Density, MatchesRational) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const int n = 1 + static_cast<int>(rng.below(128));
    const double up = rng.uniform(-10, 20), low = up - rng.uniform(0.5, 40);
    EXPECT_NEAR(beam_density(BeamSpec{n, up, low, 10}), rational_density(n, up, low), 1e-12);
  }
}

TEST(Factor, Cases) {
  const BeamSpec a{40, 20.0, 0.0, 10}, b{20, 20.0, 0.0, 10};
  EXPECT_EQ(resample_factor(a, a).factor.value(), 1.0);
  EXPECT_FALSE(resample_factor(a, a).warning);
  EXPECT_EQ(resample_factor(a, b).factor.value(), 0.5);
  const auto up = resample_factor(b, a);
  EXPECT_EQ(up.factor.value(), 1.0);
  EXPECT_EQ(up.raw, 2.0);
  EXPECT_TRUE(up.warning.has_value());
  EXPECT_THROW(ResampleFactor(0.0), std::invalid_argument);
  EXPECT_THROW(ResampleFactor(1.5), std::invalid_argument);
}

TEST(EstimateBeams, SixtyFour) {
  const auto s = scan64(1);
  const auto clusters = estimate_beams(s.cloud);
  EXPECT_EQ(clusters.size(), 64u);
  std::size_t total = 0;
  for (const auto& c : clusters) total += c.indices.size();
  EXPECT_EQ(total, s.cloud.size());
}

TEST(EstimateBeams, Degenerate) {
  EXPECT_TRUE(estimate_beams(PointCloud(1)).empty());
  PointCloud c(1);
  const double f[] = {0};
  for (int i = 0; i < 20; ++i) c.push_back(Vec3(std::cos(i * 0.3), std::sin(i * 0.3), 0), f);
  EXPECT_EQ(estimate_beams(c).size(), 1u);
}

TEST(BeamResample, Identity) {
  const auto s = scan64(2);
  const auto r = beam_resample(s.cloud, s.labels, ResampleFactor(1.0), 5);
  EXPECT_EQ(r.cloud, s.cloud);
  EXPECT_EQ(r.labels, s.labels);
}

TEST(BeamResample, HalfKeepsThirtyTwoSubset) {
  const auto s = scan64(3);
  const auto r = beam_resample(s.cloud, s.labels, ResampleFactor(0.5), 9);
  EXPECT_EQ(estimate_beams(r.cloud).size(), 32u);
  const auto all = point_set(s.cloud);
  for (const auto& p : r.cloud.coords()) ASSERT_TRUE(all.count({p.x(), p.y(), p.z()}));
  const auto again = beam_resample(s.cloud, s.labels, ResampleFactor(0.5), 9);
  EXPECT_EQ(again.cloud, r.cloud);
  EXPECT_EQ(again.labels, r.labels);
}

TEST(BeamResample, Empty) {
  const auto r = beam_resample(PointCloud(1), PointLabels{}, ResampleFactor(0.5), 1);
  EXPECT_TRUE(r.cloud.empty());
}

TEST(KeptBeams, Count) {
  for (std::size_t k : {1u, 7u, 32u, 64u})
    for (double f : {0.1, 0.25, 0.5, 0.9, 1.0}) {
      const auto kept = kept_beam_indices(k, ResampleFactor(f), 4);
      const auto want = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * static_cast<double>(k))));
      EXPECT_EQ(kept.size(), want);
      EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end()));
      EXPECT_LT(kept.back(), k);
    }
}

namespace {

struct Frame {
  PointCloud cloud{1};
  PointLabels labels;
  std::vector<BoxLabel> boxes;
};

Frame boxed_frame(std::uint64_t seed) {
  Rng rng(seed);
  Frame f;
  for (int b = 0; b < 4; ++b) {
    BoxLabel box;
    box.center = Vec3(rng.uniform(-10, 10), rng.uniform(-10, 10), 1.0);
    box.size = Vec3(rng.uniform(1, 4), rng.uniform(1, 3), 2.0);
    box.yaw = rng.uniform(-pi, pi);
    box.vx = rng.uniform(-2, 2);
    box.vy = rng.uniform(-2, 2);
    f.boxes.push_back(box);
    for (int i = 0; i < 20; ++i) {
      const Vec3 local(rng.uniform(-0.5, 0.5) * box.size.x(), rng.uniform(-0.5, 0.5) * box.size.y(),
                       rng.uniform(-0.5, 0.5) * box.size.z());
      const double feat[] = {rng.uniform()};
      f.cloud.push_back(box.from_local(local), feat);
      f.labels.values.push_back(static_cast<std::uint8_t>(b + 1));
    }
  }
  return f;
}

}  // namespace

TEST(Flip, Involution) {
  const Frame f = boxed_frame(1);
  for (FlipAxis axis : {FlipAxis::kX, FlipAxis::kY}) {
    const auto once = random_flip(f.cloud, f.labels, f.boxes, axis);
    const auto twice = random_flip(once.cloud, once.labels, once.boxes, axis);
    for (std::size_t i = 0; i < f.cloud.size(); ++i)
      EXPECT_NEAR((twice.cloud.xyz(i) - f.cloud.xyz(i)).norm(), 0.0, 1e-12);
    for (std::size_t b = 0; b < f.boxes.size(); ++b) {
      EXPECT_NEAR((twice.boxes[b].center - f.boxes[b].center).norm(), 0.0, 1e-12);
      EXPECT_NEAR(wrap_angle(twice.boxes[b].yaw - f.boxes[b].yaw), 0.0, 1e-12);
      EXPECT_NEAR(twice.boxes[b].vx, f.boxes[b].vx, 1e-12);
      EXPECT_NEAR(twice.boxes[b].vy, f.boxes[b].vy, 1e-12);
    }
    EXPECT_EQ(twice.labels, f.labels);
  }
}

TEST(Flip, MembershipPreserved) {
  const Frame f = boxed_frame(2);
  for (FlipAxis axis : {FlipAxis::kX, FlipAxis::kY}) {
    const auto out = random_flip(f.cloud, f.labels, f.boxes, axis);
    for (std::size_t i = 0; i < f.cloud.size(); ++i) {
      const std::size_t b = f.labels.values[i] - 1u;
      ASSERT_TRUE(oracle::in_box(f.boxes[b], f.cloud.xyz(i)));
      ASSERT_TRUE(oracle::in_box(out.boxes[b], out.cloud.xyz(i)));
    }
  }
}

TEST(Flip, AxisSemantics) {
  BoxLabel box;
  box.center = Vec3(1, 2, 0);
  box.yaw = 0.0;
  box.vx = 3;
  box.vy = 4;
  PointCloud c(1);
  const double feat[] = {0.5};
  c.push_back(Vec3(1, 2, 3), feat);
  const PointLabels l{{7}};
  const auto x = random_flip(c, l, {box}, FlipAxis::kX);
  EXPECT_EQ(x.cloud.xyz(0), Vec3(1, -2, 3));
  EXPECT_EQ(x.boxes[0].yaw, 0.0);
  EXPECT_EQ(x.boxes[0].vy, -4.0);
  const auto y = random_flip(c, l, {box}, FlipAxis::kY);
  EXPECT_EQ(y.cloud.xyz(0), Vec3(-1, 2, 3));
  EXPECT_NEAR(y.boxes[0].yaw, pi, 1e-15);
  EXPECT_EQ(y.boxes[0].vx, -3.0);
  EXPECT_EQ(y.labels, l);
}

TEST(Flip, SeededProbabilities) {
  const Frame f = boxed_frame(3);
  AugmentConfig cfg;
  cfg.flip_prob_x = 0.0;
  cfg.flip_prob_y = 1.0;
  bool fx = true, fy = false;
  const auto out = random_flip(f.cloud, f.labels, f.boxes, cfg, 1, &fx, &fy);
  EXPECT_FALSE(fx);
  EXPECT_TRUE(fy);
  EXPECT_EQ(out.cloud.xyz(0).x(), -f.cloud.xyz(0).x());
}

TEST(Rotate, ZeroAndQuarter) {
  const Frame f = boxed_frame(4);
  const auto same = random_rotate(f.cloud, f.labels, f.boxes, 0.0);
  EXPECT_EQ(same.cloud, f.cloud);

  BoxLabel box;
  box.yaw = 0.25;
  PointCloud c(1);
  const double feat[] = {0.5};
  c.push_back(Vec3(1, 0, 0), feat);
  const auto q = random_rotate(c, PointLabels{{1}}, {box}, pi / 2);
  EXPECT_NEAR((q.cloud.xyz(0) - Vec3(0, 1, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(q.boxes[0].yaw, 0.25 + pi / 2, 1e-12);
}

TEST(Rotate, DrawInRange) {
  AugmentConfig cfg;
  cfg.rotation_range = 0.3;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const double a = draw_rotation(cfg, s);
    EXPECT_LE(std::abs(a), 0.3);
    EXPECT_EQ(a, draw_rotation(cfg, s));
  }
}
