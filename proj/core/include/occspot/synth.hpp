#ifndef OCCSPOT_SYNTH_HPP
#define OCCSPOT_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "occspot/cloud.hpp"
#include "occspot/schema.hpp"

namespace occspot {

/// Spinning LiDAR beam pattern. Vertical field of view limits are in degrees.
struct BeamSpec {
  int n_beams = 64;
  double alpha_up = 2.0;      // degrees
  double alpha_low = -24.8;   // degrees
  int azimuth_steps = 720;

  /// Throws std::invalid_argument; a zero-width VFOV reports "degenerate VFOV".
  void validate() const;
  /// Nominal beam elevations in radians, ascending, uniformly spaced over
  /// [alpha_low, alpha_up]. A single beam sits at the VFOV midpoint.
  std::vector<double> elevations() const;
  /// Azimuth of step k in radians, wrapped to (-pi, pi]; step 0 looks along +y.
  double azimuth(int k) const;

  friend bool operator==(const BeamSpec&, const BeamSpec&) = default;
};

struct Arena {
  double x_min = -16.0;
  double x_max = 16.0;
  double y_min = -16.0;
  double y_max = 16.0;
};

struct SceneParams {
  Arena arena;
  int n_objects = 20;
  int n_cls = schema::kNumClasses;
  /// Relative frequency per class id (index 0 and the ground class are ignored).
  std::vector<double> class_mix;
  double ground_z = 0.0;
  bool has_ground = true;
  int ground_class = schema::kRoad;
  /// Probability that a class able to move is generated as a moving object.
  double dynamic_probability = 0.5;
  /// Radius around the arena origin kept free of objects (ego vehicle path).
  double ego_clearance = 3.0;
  double size_jitter = 0.1;
  int max_attempts = 500;

  void validate() const;
};

/// Long-tailed default class mix for the 15-class schema.
std::vector<double> default_class_mix();
SceneParams default_scene_params();

struct SceneObject {
  BoxLabel box;
  int surface_class = 1;
  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Scene {
  double ground_z = 0.0;
  bool has_ground = true;
  int ground_class = schema::kRoad;
  std::vector<SceneObject> objects;
  std::uint64_t rng_seed = 0;

  /// Scene with every dynamic box displaced by velocity * seconds.
  Scene at_time(double seconds) const;
  std::vector<BoxLabel> boxes() const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Places boxes on the ground without footprint overlap, fully inside the
/// arena and outside the ego clearance. Deterministic in `seed`.
/// Throws std::runtime_error naming the violated constraint when an object
/// cannot be placed within max_attempts.
Scene build_scene(const SceneParams& params, std::uint64_t seed);

struct ScanOptions {
  double max_range = 60.0;
  double min_range = 0.5;
};

struct ScanResult {
  PointCloud cloud;   // sensor frame; feature 0 = range / max_range
  PointLabels labels;
};

/// Casts one ray per (beam elevation, azimuth step) from the sensor and keeps
/// the nearest hit with the ground plane or any box. Points are returned in
/// the sensor frame, ordered beam-major.
ScanResult scan(const Scene& scene, const BeamSpec& beams, const Pose& sensor_pose,
                const ScanOptions& options = {});

struct SequenceMeta {
  int n_frames = 1;
  double keyframe_hz = 10.0;
  std::vector<Pose> ego_poses;  // sensor-to-world, one per frame

  void validate() const;
};

/// Ego driving along +x at `speed` m/s with the sensor `sensor_height` above the ground.
SequenceMeta linear_sequence_meta(int n_frames, double keyframe_hz, double speed,
                                  double sensor_height);

struct SequenceFrame {
  PointCloud cloud;               // sensor frame
  PointLabels labels;
  std::vector<BoxLabel> boxes;    // world frame at the frame's timestamp
};

/// Frame t is scanned at time t / keyframe_hz. Frames are independent and may
/// be generated in parallel; output order is frame order.
std::vector<SequenceFrame> generate_sequence(const Scene& scene, const BeamSpec& beams,
                                             const SequenceMeta& meta,
                                             const ScanOptions& options = {});


}  // namespace occspot

#endif  // OCCSPOT_SYNTH_HPP
