#ifndef OCCSPOT_OCC_GT_HPP
#define OCCSPOT_OCC_GT_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "occspot/augment.hpp"
#include "occspot/cloud.hpp"
#include "occspot/io.hpp"
#include "occspot/schema.hpp"

namespace occspot {

// ============================================================================
// Grid
// ============================================================================

/// BEV grid geometry. Cell (row, col) covers
/// [origin_x + col * cell_size, +cell_size) x [origin_y + row * cell_size, +cell_size).
struct GridSpec {
  double origin_x = -51.2;
  double origin_y = -51.2;
  double cell_size = 0.2;
  int H = 512;  // rows, along y
  int W = 512;  // cols, along x
  double z_min = -2.0;
  double z_max = 4.0;
  int n_cls = schema::kNumClasses;

  void validate() const;
  std::size_t cells() const { return static_cast<std::size_t>(H) * static_cast<std::size_t>(W); }
  /// Row-major cell index, or -1 when (x, y) falls outside the grid.
  std::int64_t cell_of(double x, double y) const;
  Vec3 cell_center(int row, int col, double z = 0.0) const;
  /// Square grid of H x W cells centered on the origin.
  static GridSpec centered(int H, int W, double cell_size, double z_min, double z_max,
                           int n_cls = schema::kNumClasses);

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// H x W semantic labels in [0, n_cls], row-major with rows along y; 0 = empty.
struct OccupancyGrid {
  GridSpec spec;
  std::vector<std::uint8_t> labels;

  explicit OccupancyGrid(const GridSpec& s = {});
  std::uint8_t at(int row, int col) const {
    return labels[static_cast<std::size_t>(row) * static_cast<std::size_t>(spec.W) +
                  static_cast<std::size_t>(col)];
  }
  std::size_t nonzero() const;
  /// Throws std::invalid_argument when a label exceeds n_cls or sizes disagree.
  void validate() const;

  friend bool operator==(const OccupancyGrid&, const OccupancyGrid&) = default;
};

/// Per-class priority used to break plurality ties: higher weight wins, then
/// the smaller class id. An empty span means "smaller class id" only.
using TieWeights = std::span<const double>;

/// Index of the winning class among `votes` (size n_cls + 1, index 0 unused).
int plurality_vote(std::span<const std::uint32_t> votes, TieWeights tie_weights);

// ============================================================================
// Ground-truth generation
// ============================================================================

struct DynamicStaticSplit {
  std::vector<std::size_t> static_points;
  std::vector<std::size_t> dynamic_points;
  std::vector<std::size_t> dynamic_box;  // box index per dynamic point
};

/// Slack for points sampled on box faces.
inline constexpr double kBoxSurfaceTolerance = 1e-6;

/// A point is dynamic iff it lies inside a box flagged is_dynamic, faces
/// included up to kBoxSurfaceTolerance; the first such box in list order
/// claims it. Points and boxes must share a frame.
DynamicStaticSplit split_dynamic_static(const PointCloud& frame, std::span<const BoxLabel> boxes);

struct LabeledFrame {
  PointCloud cloud;             // sensor frame
  PointLabels labels;
  std::vector<BoxLabel> boxes;  // world frame; box i is the same object in every frame
};

/// Fuses a sequence into the world frame. Static points are posed directly;
/// dynamic points go to their box's canonical frame and are re-posed at the
/// box's pose in frame `keyframe`. Static points from other frames that fall
/// inside a dynamic keyframe box are dropped (that space is occupied at the
/// keyframe). Throws std::invalid_argument on length
/// mismatches or inconsistent box counts.
LabeledCloud aggregate(std::span<const LabeledFrame> frames, std::span<const Pose> poses,
                       std::size_t keyframe);

/// Exact k-nearest-neighbour index over a fixed point set. Results are ordered
/// by (squared distance, point index), so ties resolve deterministically.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);
  std::size_t size() const noexcept { return points_.size(); }
  std::vector<std::size_t> nearest(const Vec3& query, std::size_t k) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range into order_
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };
  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Majority label of the k nearest fused points for each query; ties follow
/// plurality_vote. Throws std::invalid_argument on an empty fused cloud or k == 0.
std::vector<std::uint8_t> knn_label(const PointCloud& fused, const PointLabels& fused_labels,
                                    std::span<const Vec3> queries, std::size_t k,
                                    TieWeights tie_weights = {});

/// Bins points with z in [z_min, z_max] into BEV cells and takes the
/// plurality label per cell. Cells without points stay 0.
OccupancyGrid voxelize_bev(const PointCloud& cloud, const PointLabels& labels, const GridSpec& spec,
                           TieWeights tie_weights = {});

struct OccupancyOptions {
  bool densify = true;
  double radius = 0.4;  // column-axis distance for densification, meters
  std::size_t k = 5;
  std::vector<double> tie_weights;  // empty -> smaller class id wins ties
};

/// split -> aggregate -> voxelize in the keyframe's sensor frame, then
/// optionally fills empty cells whose column axis lies within `radius` of a
/// fused point, labeled by knn over the xy-projected fused cloud.
OccupancyGrid make_occupancy(std::span<const LabeledFrame> frames, std::span<const Pose> poses,
                             const GridSpec& spec, std::size_t keyframe,
                             const OccupancyOptions& options = {});

// ============================================================================
// Grid transforms (augmentation of targets) and file format
// ============================================================================

/// Mirrors a grid centered on the origin; axis semantics match random_flip.
OccupancyGrid flip_grid(const OccupancyGrid& grid, FlipAxis axis);
/// Nearest-neighbour rotation about the origin; cells mapped from outside the grid become 0.
OccupancyGrid rotate_grid(const OccupancyGrid& grid, double angle);

//   "SPOG" u32 version=1, f32 origin_x, f32 origin_y, f32 cell_size, u32 H, u32 W,
//   u8 n_cls, H*W u8 labels (row-major, y-major)
// z bounds are not part of the file and read back as GridSpec defaults.
Bytes encode_grid(const OccupancyGrid& grid);
OccupancyGrid decode_grid(std::span<const std::uint8_t> bytes);
OccupancyGrid read_grid(const std::filesystem::path& path);
void write_grid(const std::filesystem::path& path, const OccupancyGrid& grid);

}  // namespace occspot

#endif  // OCCSPOT_OCC_GT_HPP
