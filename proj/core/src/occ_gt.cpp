#include "occspot/occ_gt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

#include "occspot/error.hpp"

namespace occspot {

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

void GridSpec::validate() const {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) throw std::invalid_argument("grid: cell_size must be > 0");
  if (H < 1 || W < 1) throw std::invalid_argument("grid: H and W must be >= 1");
  if (!(z_max > z_min)) throw std::invalid_argument("grid: z_max must exceed z_min");
  if (n_cls < 1 || n_cls > 255) throw std::invalid_argument("grid: n_cls must be in [1, 255]");
  if (!std::isfinite(origin_x) || !std::isfinite(origin_y)) throw std::invalid_argument("grid: non-finite origin");
}

std::int64_t GridSpec::cell_of(double x, double y) const {
  const double fx = std::floor((x - origin_x) / cell_size);
  const double fy = std::floor((y - origin_y) / cell_size);
  if (!(fx >= 0.0 && fx < W && fy >= 0.0 && fy < H)) return -1;
  return static_cast<std::int64_t>(fy) * W + static_cast<std::int64_t>(fx);
}

Vec3 GridSpec::cell_center(int row, int col, double z) const {
  return {origin_x + (col + 0.5) * cell_size, origin_y + (row + 0.5) * cell_size, z};
}

GridSpec GridSpec::centered(int H, int W, double cell_size, double z_min, double z_max, int n_cls) {
  GridSpec s;
  s.H = H;
  s.W = W;
  s.cell_size = cell_size;
  s.origin_x = -0.5 * W * cell_size;
  s.origin_y = -0.5 * H * cell_size;
  s.z_min = z_min;
  s.z_max = z_max;
  s.n_cls = n_cls;
  s.validate();
  return s;
}

OccupancyGrid::OccupancyGrid(const GridSpec& s) : spec(s), labels(s.cells(), 0) {}

std::size_t OccupancyGrid::nonzero() const {
  return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](auto v) { return v != 0; }));
}

void OccupancyGrid::validate() const {
  spec.validate();
  if (labels.size() != spec.cells()) throw std::invalid_argument("grid: label count != H * W");
  for (auto v : labels) {
    if (v > spec.n_cls) throw std::invalid_argument("grid: label " + std::to_string(v) + " exceeds n_cls");
  }
}

int plurality_vote(std::span<const std::uint32_t> votes, TieWeights tie_weights) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(votes.size()); ++c) {
    const auto v = votes[static_cast<std::size_t>(c)];
    if (v == 0) continue;
    if (best == 0) {
      best = c;
      continue;
    }
    const auto bv = votes[static_cast<std::size_t>(best)];
    if (v > bv) {
      best = c;
    } else if (v == bv && !tie_weights.empty() &&
               tie_weights[static_cast<std::size_t>(c)] > tie_weights[static_cast<std::size_t>(best)]) {
      best = c;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Split / aggregate
// ---------------------------------------------------------------------------

DynamicStaticSplit split_dynamic_static(const PointCloud& frame, std::span<const BoxLabel> boxes) {
  DynamicStaticSplit out;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    bool dynamic = false;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      if (boxes[b].is_dynamic && boxes[b].contains(frame.xyz(i), kBoxSurfaceTolerance)) {
        out.dynamic_points.push_back(i);
        out.dynamic_box.push_back(b);
        dynamic = true;
        break;
      }
    }
    if (!dynamic) out.static_points.push_back(i);
  }
  return out;
}

LabeledCloud aggregate(std::span<const LabeledFrame> frames, std::span<const Pose> poses,
                       std::size_t keyframe) {
  if (frames.size() != poses.size()) {
    throw std::invalid_argument("aggregate: " + std::to_string(frames.size()) + " frames but " +
                                std::to_string(poses.size()) + " poses");
  }
  if (frames.empty()) throw std::invalid_argument("aggregate: empty sequence");
  if (keyframe >= frames.size()) throw std::invalid_argument("aggregate: keyframe index out of range");
  const auto& key_boxes = frames[keyframe].boxes;
  for (const auto& f : frames) {
    check_aligned(f.cloud, f.labels);
    if (f.boxes.size() != key_boxes.size()) {
      throw std::invalid_argument("aggregate: box count differs between frames");
    }
  }

  LabeledCloud out{PointCloud(frames.front().cloud.feature_dim()), {}};
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const PointCloud world = transform(frames[t].cloud, poses[t]);
    const auto split = split_dynamic_static(world, frames[t].boxes);
    // Preserve the frame's point order: rebuild per point.
    std::vector<std::int64_t> box_of(world.size(), -1);
    for (std::size_t k = 0; k < split.dynamic_points.size(); ++k) {
      box_of[split.dynamic_points[k]] = static_cast<std::int64_t>(split.dynamic_box[k]);
    }
    for (std::size_t i = 0; i < world.size(); ++i) {
      Vec3 p = world.xyz(i);
      if (box_of[i] >= 0) {
        const auto b = static_cast<std::size_t>(box_of[i]);
        p = key_boxes[b].from_local(frames[t].boxes[b].to_local(p));
      } else if (t != keyframe && std::any_of(key_boxes.begin(), key_boxes.end(), [&](const BoxLabel& b) {
                   return b.is_dynamic && b.contains(p, kBoxSurfaceTolerance);
                 })) {
        continue;
      }
      out.cloud.push_back(p, world.features(i));
      out.labels.values.push_back(frames[t].labels.values[i]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// KNN
// ---------------------------------------------------------------------------

namespace {
constexpr std::uint32_t kLeafSize = 12;

struct Candidate {
  double d2;
  std::size_t index;
  bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
};
}  // namespace

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= kLeafSize) return id;
  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[static_cast<std::size_t>(id)].axis = axis;
  nodes_[static_cast<std::size_t>(id)].split = split;
  nodes_[static_cast<std::size_t>(id)].left = left;
  nodes_[static_cast<std::size_t>(id)].right = right;
  return id;
}

std::vector<std::size_t> KdTree::nearest(const Vec3& query, std::size_t k) const {
  k = std::min(k, points_.size());
  if (k == 0) return {};
  std::priority_queue<Candidate> heap;  // worst candidate on top

  auto visit = [&](auto&& self, std::int32_t node_id) -> void {
    const Node& node = nodes_[static_cast<std::size_t>(node_id)];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        const Candidate c{(points_[order_[i]] - query).squaredNorm(), order_[i]};
        if (heap.size() < k) {
          heap.push(c);
        } else if (c < heap.top()) {
          heap.pop();
          heap.push(c);
        }
      }
      return;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    self(self, near);
    // Points in `far` can be at distance exactly |diff|; equality may still win on index.
    if (heap.size() < k || diff * diff <= heap.top().d2) self(self, far);
  };
  visit(visit, 0);

  std::vector<std::size_t> out(heap.size());
  for (std::size_t i = out.size(); i-- > 0;) {
    out[i] = heap.top().index;
    heap.pop();
  }
  return out;
}

std::vector<std::uint8_t> knn_label(const PointCloud& fused, const PointLabels& fused_labels,
                                    std::span<const Vec3> queries, std::size_t k,
                                    TieWeights tie_weights) {
  check_aligned(fused, fused_labels);
  if (fused.empty()) throw std::invalid_argument("knn_label: empty fused cloud");
  if (k == 0) throw std::invalid_argument("knn_label: k must be >= 1");
  const int max_label = *std::max_element(fused_labels.values.begin(), fused_labels.values.end());
  const std::size_t n_votes =
      std::max<std::size_t>(static_cast<std::size_t>(max_label) + 1, tie_weights.size());
  const KdTree tree(fused.coords());
  std::vector<std::uint8_t> out;
  out.reserve(queries.size());
  std::vector<std::uint32_t> votes(n_votes);
  for (const Vec3& q : queries) {
    std::fill(votes.begin(), votes.end(), 0u);
    for (std::size_t idx : tree.nearest(q, k)) ++votes[fused_labels.values[idx]];
    out.push_back(static_cast<std::uint8_t>(plurality_vote(votes, tie_weights)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Voxelization
// ---------------------------------------------------------------------------

OccupancyGrid voxelize_bev(const PointCloud& cloud, const PointLabels& labels, const GridSpec& spec,
                           TieWeights tie_weights) {
  spec.validate();
  check_aligned(cloud, labels);
  if (!tie_weights.empty() && tie_weights.size() < static_cast<std::size_t>(spec.n_cls) + 1) {
    throw std::invalid_argument("voxelize_bev: tie weights shorter than n_cls + 1");
  }
  const std::size_t n_votes = static_cast<std::size_t>(spec.n_cls) + 1;
  std::vector<std::uint32_t> votes(spec.cells() * n_votes, 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.xyz(i);
    if (p.z() < spec.z_min || p.z() > spec.z_max) continue;
    const auto cell = spec.cell_of(p.x(), p.y());
    if (cell < 0) continue;
    const auto label = labels.values[i];
    if (label == 0) continue;
    if (label > spec.n_cls) throw std::invalid_argument("voxelize_bev: label exceeds n_cls");
    ++votes[static_cast<std::size_t>(cell) * n_votes + label];
  }
  OccupancyGrid grid(spec);
  for (std::size_t c = 0; c < spec.cells(); ++c) {
    grid.labels[c] = static_cast<std::uint8_t>(
        plurality_vote(std::span(votes).subspan(c * n_votes, n_votes), tie_weights));
  }
  return grid;
}

OccupancyGrid make_occupancy(std::span<const LabeledFrame> frames, std::span<const Pose> poses,
                             const GridSpec& spec, std::size_t keyframe,
                             const OccupancyOptions& options) {
  spec.validate();
  const TieWeights ties(options.tie_weights);
  const auto fused_world = aggregate(frames, poses, keyframe);
  const PointCloud fused = transform(fused_world.cloud, poses[keyframe].inverse());
  OccupancyGrid grid = voxelize_bev(fused, fused_world.labels, spec, ties);
  if (!options.densify || fused.empty()) return grid;

  // Project in-bounds points onto z = 0: the distance from a cell's vertical
  // axis to a point is then the 2D distance to the projected point.
  PointCloud projected(0);
  PointLabels projected_labels;
  for (std::size_t i = 0; i < fused.size(); ++i) {
    const Vec3& p = fused.xyz(i);
    if (p.z() < spec.z_min || p.z() > spec.z_max || fused_world.labels.values[i] == 0) continue;
    projected.push_back(Vec3(p.x(), p.y(), 0.0), {});
    projected_labels.values.push_back(fused_world.labels.values[i]);
  }
  if (projected.empty()) return grid;

  const KdTree tree(projected.coords());
  std::vector<Vec3> queries;
  std::vector<std::size_t> query_cells;
  const double r2 = options.radius * options.radius;
  for (int row = 0; row < spec.H; ++row) {
    for (int col = 0; col < spec.W; ++col) {
      const std::size_t c = static_cast<std::size_t>(row) * static_cast<std::size_t>(spec.W) +
                            static_cast<std::size_t>(col);
      if (grid.labels[c] != 0) continue;
      const Vec3 center = spec.cell_center(row, col);
      const auto nn = tree.nearest(center, 1);
      if ((projected.xyz(nn[0]) - center).squaredNorm() > r2) continue;
      queries.push_back(center);
      query_cells.push_back(c);
    }
  }
  if (queries.empty()) return grid;
  const auto filled = knn_label(projected, projected_labels, queries, options.k, ties);
  for (std::size_t q = 0; q < queries.size(); ++q) grid.labels[query_cells[q]] = filled[q];
  return grid;
}

// ---------------------------------------------------------------------------
// Grid transforms
// ---------------------------------------------------------------------------

namespace {

OccupancyGrid remap_grid(const OccupancyGrid& grid, const Mat3& inverse_linear) {
  OccupancyGrid out(grid.spec);
  const auto& s = grid.spec;
  for (int row = 0; row < s.H; ++row) {
    for (int col = 0; col < s.W; ++col) {
      const Vec3 src = inverse_linear * s.cell_center(row, col);
      const auto cell = s.cell_of(src.x(), src.y());
      if (cell >= 0) {
        out.labels[static_cast<std::size_t>(row) * static_cast<std::size_t>(s.W) +
                   static_cast<std::size_t>(col)] = grid.labels[static_cast<std::size_t>(cell)];
      }
    }
  }
  return out;
}

}  // namespace

OccupancyGrid flip_grid(const OccupancyGrid& grid, FlipAxis axis) {
  Mat3 m = Mat3::Identity();
  if (axis == FlipAxis::kX) {
    m(1, 1) = -1.0;
  } else {
    m(0, 0) = -1.0;
  }
  return remap_grid(grid, m);
}

OccupancyGrid rotate_grid(const OccupancyGrid& grid, double angle) {
  if (angle == 0.0) return grid;
  return remap_grid(grid, Eigen::AngleAxisd(-angle, Vec3::UnitZ()).toRotationMatrix());
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

Bytes encode_grid(const OccupancyGrid& grid) {
  grid.validate();
  Bytes out;
  out.reserve(29 + grid.labels.size());
  detail::ByteWriter w(out);
  w.magic("SPOG");
  w.u32(kFormatVersion);
  w.f32(static_cast<float>(grid.spec.origin_x));
  w.f32(static_cast<float>(grid.spec.origin_y));
  w.f32(static_cast<float>(grid.spec.cell_size));
  w.u32(static_cast<std::uint32_t>(grid.spec.H));
  w.u32(static_cast<std::uint32_t>(grid.spec.W));
  w.u8(static_cast<std::uint8_t>(grid.spec.n_cls));
  w.raw(grid.labels);
  return out;
}

OccupancyGrid decode_grid(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes, "grid");
  r.expect_magic("SPOG");
  const auto version = r.u32();
  if (version != kFormatVersion) throw DataError("grid: unsupported version " + std::to_string(version));
  GridSpec spec;
  spec.origin_x = r.f32();
  spec.origin_y = r.f32();
  spec.cell_size = r.f32();
  spec.H = static_cast<int>(r.u32());
  spec.W = static_cast<int>(r.u32());
  spec.n_cls = r.u8();
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("grid: ") + e.what());
  }
  const auto payload = r.raw(spec.cells());
  r.expect_end();
  OccupancyGrid grid(spec);
  grid.labels.assign(payload.begin(), payload.end());
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("grid: ") + e.what());
  }
  return grid;
}

OccupancyGrid read_grid(const std::filesystem::path& path) { return decode_grid(read_file(path)); }

void write_grid(const std::filesystem::path& path, const OccupancyGrid& grid) {
  write_file_atomic(path, encode_grid(grid));
}

}  // namespace occspot
