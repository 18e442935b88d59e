#ifndef OCCSPOT_TEST_ORACLES_HPP
#define OCCSPOT_TEST_ORACLES_HPP

// Reference implementations used only by tests. They are written
// independently of the library code paths they check: brute force,
// different formulations, or extended precision.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include "occspot/cloud.hpp"
#include "occspot/occ_gt.hpp"
#include "occspot/rng.hpp"
#include "occspot/synth.hpp"
#include "occspot/tensor.hpp"

namespace oracle {

using occspot::Vec3;
using Real = boost::multiprecision::cpp_bin_float_50;
using Rational = boost::multiprecision::cpp_rational;

// Point in oriented box via the four footprint edge half-planes and a z slab.
inline bool in_box(const occspot::BoxLabel& b, const Vec3& p, double tol = 1e-9) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const double hl = 0.5 * b.size.x(), hw = 0.5 * b.size.y();
  const double ux = c, uy = s, vx = -s, vy = c;
  const double dx = p.x() - b.center.x(), dy = p.y() - b.center.y();
  if (dx * ux + dy * uy > hl + tol) return false;
  if (-(dx * ux + dy * uy) > hl + tol) return false;
  if (dx * vx + dy * vy > hw + tol) return false;
  if (-(dx * vx + dy * vy) > hw + tol) return false;
  return std::abs(p.z() - b.center.z()) <= 0.5 * b.size.z() + tol;
}

// Unsigned distance from p to the boundary surface of box b.
inline double box_surface_distance(const occspot::BoxLabel& b, const Vec3& p) {
  const double c = std::cos(b.yaw), s = std::sin(b.yaw);
  const double dx = p.x() - b.center.x(), dy = p.y() - b.center.y();
  const Vec3 q(c * dx + s * dy, -s * dx + c * dy, p.z() - b.center.z());
  const Vec3 h = 0.5 * b.size;
  const Vec3 d(std::abs(q.x()) - h.x(), std::abs(q.y()) - h.y(), std::abs(q.z()) - h.z());
  const double outside = Vec3(std::max(d.x(), 0.0), std::max(d.y(), 0.0), std::max(d.z(), 0.0)).norm();
  const double inside = std::min(std::max(d.x(), std::max(d.y(), d.z())), 0.0);
  return std::abs(outside + inside);
}

struct SurfaceHit {
  double distance = std::numeric_limits<double>::infinity();
  int label = 0;
};

// Nearest scene surface to a world point: ground plane or any box face.
inline SurfaceHit nearest_surface(const occspot::Scene& scene, const Vec3& p) {
  SurfaceHit best;
  if (scene.has_ground) {
    best.distance = std::abs(p.z() - scene.ground_z);
    best.label = scene.ground_class;
  }
  for (const auto& obj : scene.objects) {
    const double d = box_surface_distance(obj.box, p);
    if (d < best.distance) {
      best.distance = d;
      best.label = obj.surface_class;
    }
  }
  return best;
}

// Plurality with ties to the larger tie weight, then the smaller class.
inline int plurality(const std::map<int, int>& counts, const std::vector<double>& ties) {
  int best = 0, best_count = 0;
  for (const auto& [cls, n] : counts) {
    if (cls == 0 || n == 0) continue;
    const double w = ties.empty() ? 0.0 : ties[static_cast<std::size_t>(cls)];
    const double bw = (ties.empty() || best == 0) ? 0.0 : ties[static_cast<std::size_t>(best)];
    if (n > best_count || (n == best_count && w > bw)) {
      best = cls;
      best_count = n;
    }
  }
  return best;
}

// Per-cell vote by scanning every point for every cell.
inline std::vector<std::uint8_t> vote_grid(const occspot::PointCloud& cloud, const occspot::PointLabels& labels,
                                           const occspot::GridSpec& g, const std::vector<double>& ties = {}) {
  std::vector<std::uint8_t> out(g.cells(), 0);
  for (int r = 0; r < g.H; ++r) {
    for (int c = 0; c < g.W; ++c) {
      std::map<int, int> counts;
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec3& p = cloud.xyz(i);
        if (p.z() < g.z_min || p.z() > g.z_max) continue;
        const double fx = (p.x() - g.origin_x) / g.cell_size;
        const double fy = (p.y() - g.origin_y) / g.cell_size;
        if (std::floor(fx) != c || std::floor(fy) != r) continue;
        ++counts[labels.values[i]];
      }
      out[static_cast<std::size_t>(r) * static_cast<std::size_t>(g.W) + static_cast<std::size_t>(c)] =
          static_cast<std::uint8_t>(plurality(counts, ties));
    }
  }
  return out;
}

// kNN by a full sort of (squared distance, index).
inline std::uint8_t knn_vote(const occspot::PointCloud& cloud, const occspot::PointLabels& labels, const Vec3& q,
                             std::size_t k, const std::vector<double>& ties = {}) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) d.emplace_back((cloud.xyz(i) - q).squaredNorm(), i);
  std::sort(d.begin(), d.end());
  std::map<int, int> counts;
  for (std::size_t i = 0; i < std::min(k, d.size()); ++i) ++counts[labels.values[d[i].second]];
  return static_cast<std::uint8_t>(plurality(counts, ties));
}

// Mean over present classes 1..n of (1 - IoU) for hard predictions.
inline double jaccard_loss(const std::vector<int>& pred, const std::vector<int>& gt, int n_cls,
                           bool all_classes = false) {
  double sum = 0.0;
  int used = 0;
  for (int c = 1; c <= n_cls; ++c) {
    int inter = 0, uni = 0, present = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const bool g = gt[i] == c, p = pred[i] == c;
      inter += g && p;
      uni += g || p;
      present += g;
    }
    if (!present && !all_classes) continue;
    ++used;
    sum += uni == 0 ? 0.0 : 1.0 - static_cast<double>(inter) / uni;
  }
  if (all_classes) return sum / n_cls;
  return used ? sum / used : 0.0;
}

inline std::vector<Real> softmax_hp(const std::vector<double>& z) {
  Real m = z[0];
  for (double v : z) m = std::max(m, Real(v));
  std::vector<Real> e;
  Real s = 0;
  for (double v : z) {
    e.push_back(exp(Real(v) - m));
    s += e.back();
  }
  for (auto& v : e) v /= s;
  return e;
}

// Balancing weights with rational frequencies; the square root in 50 digits.
inline std::vector<Real> class_weights_exact(const std::vector<std::uint64_t>& counts) {
  Rational total = 0;
  for (auto c : counts) total += Rational(c);
  const Rational m = Rational(1) / Rational(static_cast<long long>(counts.size()));
  std::vector<Real> s;
  for (auto c : counts) {
    const Rational n = Rational(c) / total;
    s.push_back(sqrt(Real(m / n)));
  }
  return s;
}

inline occspot::Tensor3 random_tensor(occspot::Rng& rng, int h, int w, int c, double scale = 1.0) {
  occspot::Tensor3 t(h, w, c);
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

}  // namespace oracle

#endif  // OCCSPOT_TEST_ORACLES_HPP
