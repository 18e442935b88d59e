#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "occspot/synth.hpp"

using namespace occspot;
using std::numbers::pi;

namespace {

BeamSpec single_ray(double elevation_deg) {
  return BeamSpec{1, elevation_deg + 5.0, elevation_deg - 5.0, 1};
}

Scene empty_scene(bool ground) {
  Scene s;
  s.has_ground = ground;
  s.ground_z = 0.0;
  return s;
}

}  // namespace

TEST(BeamSpec, Elevations) {
  const BeamSpec b{5, 2.0, -2.0, 4};
  const auto e = b.elevations();
  ASSERT_EQ(e.size(), 5u);
  EXPECT_NEAR(e.front(), -2.0 * pi / 180, 1e-15);
  EXPECT_NEAR(e[1] - e[0], 1.0 * pi / 180, 1e-15);
  EXPECT_NEAR(single_ray(-45).elevations()[0], -pi / 4, 1e-15);
  EXPECT_EQ(b.azimuth(0), 0.0);
}

TEST(BeamSpec, DegenerateVfov) {
  try {
    BeamSpec{8, 3.0, 3.0, 10}.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate VFOV"), std::string::npos);
  }
}

TEST(Scene, ZeroObjects) {
  SceneParams p = default_scene_params();
  p.n_objects = 0;
  const Scene s = build_scene(p, 3);
  EXPECT_TRUE(s.objects.empty());
  EXPECT_TRUE(s.has_ground);
}

TEST(Scene, Deterministic) {
  const SceneParams p = default_scene_params();
  EXPECT_EQ(build_scene(p, 42), build_scene(p, 42));
  EXPECT_NE(build_scene(p, 42), build_scene(p, 43));
}

TEST(Scene, FiftyObjectsInsideArena) {
  SceneParams p = default_scene_params();
  p.n_objects = 50;
  const Scene s = build_scene(p, 7);
  ASSERT_EQ(s.objects.size(), 50u);
  for (const auto& o : s.objects) {
    const auto& b = o.box;
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1}) {
          const Vec3 corner = b.from_local(Vec3(sx * 0.5 * b.size.x(), sy * 0.5 * b.size.y(), sz * 0.5 * b.size.z()));
          EXPECT_GE(corner.x(), p.arena.x_min - 1e-9);
          EXPECT_LE(corner.x(), p.arena.x_max + 1e-9);
          EXPECT_GE(corner.y(), p.arena.y_min - 1e-9);
          EXPECT_LE(corner.y(), p.arena.y_max + 1e-9);
          EXPECT_GE(corner.z(), p.ground_z - 1e-9);
        }
    EXPECT_FALSE(oracle::in_box(b, Vec3(0, 0, b.center.z())));
  }
  // footprints pairwise disjoint: no corner of one footprint inside another
  for (std::size_t i = 0; i < s.objects.size(); ++i)
    for (std::size_t j = 0; j < s.objects.size(); ++j) {
      if (i == j) continue;
      const auto& a = s.objects[i].box;
      const auto& b = s.objects[j].box;
      for (int sx : {-1, 1})
        for (int sy : {-1, 1}) {
          Vec3 c = a.from_local(Vec3(sx * 0.5 * a.size.x(), sy * 0.5 * a.size.y(), 0));
          c.z() = b.center.z();
          EXPECT_FALSE(oracle::in_box(b, c, -1e-9)) << i << " " << j;
        }
    }
}

TEST(Scene, InfeasibleNamesConstraint) {
  SceneParams p = default_scene_params();
  p.arena = {-2, 2, -2, 2};
  p.n_objects = 30;
  p.max_attempts = 20;
  try {
    build_scene(p, 1);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_FALSE(std::string(e.what()).empty());
  }
}

TEST(Scan, EmptySceneNoGround) {
  const auto r = scan(empty_scene(false), BeamSpec{}, Pose::identity());
  EXPECT_TRUE(r.cloud.empty());
}

TEST(Scan, RayPlane) {
  const Pose sensor = Pose::from_yaw(0.0, Vec3(0, 0, 2));
  const auto r = scan(empty_scene(true), single_ray(-45), sensor);
  ASSERT_EQ(r.cloud.size(), 1u);
  const Vec3 world = sensor.apply(r.cloud.xyz(0));
  EXPECT_NEAR(world.x(), 0.0, 1e-12);
  EXPECT_NEAR(world.y(), 2.0, 1e-12);
  EXPECT_NEAR(world.z(), 0.0, 1e-12);
  EXPECT_NEAR(r.cloud.xyz(0).norm(), 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(r.labels.values[0], schema::kRoad);
}

TEST(Scan, RayBoxFace) {
  Scene s = empty_scene(false);
  SceneObject o;
  o.box.center = Vec3(0, 6, 0);
  o.box.size = Vec3(2, 2, 2);
  o.box.class_id = schema::kCar;
  o.surface_class = schema::kCar;
  s.objects.push_back(o);
  const auto r = scan(s, single_ray(0), Pose::identity());
  ASSERT_EQ(r.cloud.size(), 1u);
  EXPECT_NEAR(r.cloud.xyz(0).y(), 5.0, 1e-9);
  EXPECT_EQ(r.labels.values[0], schema::kCar);
}

TEST(Scan, PointsOnSurfacesWithLabels) {
  SceneParams p = default_scene_params();
  p.n_objects = 15;
  const Scene s = build_scene(p, 9);
  const BeamSpec beams{16, 2.0, -24.8, 180};
  const Pose sensor = Pose::from_yaw(0.2, Vec3(0, 0, 1.8));
  const auto r = scan(s, beams, sensor);
  EXPECT_LE(r.cloud.size(), 16u * 180u);
  ASSERT_GT(r.cloud.size(), 0u);
  for (std::size_t i = 0; i < r.cloud.size(); ++i) {
    const auto hit = oracle::nearest_surface(s, sensor.apply(r.cloud.xyz(i)));
    ASSERT_LT(hit.distance, 1e-6);
    ASSERT_EQ(r.labels.values[i], hit.label);
    EXPECT_NEAR(r.cloud.features(i)[0] * 60.0, r.cloud.xyz(i).norm(), 1e-9);
  }
}

TEST(Sequence, SingleFrameEqualsScan) {
  const Scene s = build_scene(default_scene_params(), 5);
  const BeamSpec beams{8, 2.0, -20.0, 90};
  const auto meta = linear_sequence_meta(1, 10.0, 3.0, 1.8);
  const auto seq = generate_sequence(s, beams, meta);
  ASSERT_EQ(seq.size(), 1u);
  const auto direct = scan(s, beams, meta.ego_poses[0]);
  EXPECT_EQ(seq[0].cloud, direct.cloud);
  EXPECT_EQ(seq[0].labels, direct.labels);
}

TEST(Sequence, StaticSceneSurfaces) {
  SceneParams p = default_scene_params();
  p.dynamic_probability = 0.0;
  const Scene s = build_scene(p, 6);
  const BeamSpec beams{16, 2.0, -24.8, 180};
  const auto meta = linear_sequence_meta(2, 10.0, 5.0, 1.8);
  const auto seq = generate_sequence(s, beams, meta);
  for (std::size_t f = 0; f < 2; ++f)
    for (std::size_t i = 0; i < seq[f].cloud.size(); ++i)
      ASSERT_LT(oracle::nearest_surface(s, meta.ego_poses[f].apply(seq[f].cloud.xyz(i))).distance, 1e-6);
}

TEST(Sequence, DynamicBoxMoves) {
  Scene s = empty_scene(true);
  SceneObject o;
  o.box.center = Vec3(8, 8, 1);
  o.box.size = Vec3(4, 2, 2);
  o.box.vx = 1.0;
  o.box.is_dynamic = true;
  s.objects.push_back(o);
  const auto meta = linear_sequence_meta(11, 10.0, 0.0, 1.8);
  const auto seq = generate_sequence(s, BeamSpec{4, 2, -10, 36}, meta);
  ASSERT_EQ(seq.size(), 11u);
  EXPECT_NEAR(seq[10].boxes[0].center.x() - seq[0].boxes[0].center.x(), 1.0, 1e-12);
  EXPECT_NEAR(s.at_time(1.0).objects[0].box.center.x(), 9.0, 1e-12);
}
