#include <benchmark/benchmark.h>

#include "occspot/loss.hpp"
#include "occspot/model.hpp"
#include "occspot/occ_gt.hpp"
#include "occspot/rng.hpp"

using namespace occspot;

namespace {

PointCloud random_cloud(std::size_t n, double extent, std::uint64_t seed) {
  Rng rng(seed);
  PointCloud c(1);
  c.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f[] = {rng.uniform()};
    c.push_back(Vec3(rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-2.0, 3.0)), f);
  }
  return c;
}

PointLabels random_labels(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PointLabels l;
  for (std::size_t i = 0; i < n; ++i) l.values.push_back(static_cast<std::uint8_t>(rng.below(16)));
  return l;
}

void BM_VoxelizeBev(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cloud = random_cloud(n, 12.0, 1);
  const auto labels = random_labels(n, 2);
  const auto spec = GridSpec::centered(128, 128, 0.2, -2.5, 3.0);
  for (auto _ : state) benchmark::DoNotOptimize(voxelize_bev(cloud, labels, spec));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VoxelizeBev)->Arg(10'000)->Arg(100'000);

void BM_KnnLabel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto cloud = random_cloud(n, 20.0, 3);
  const auto labels = random_labels(n, 4);
  const auto q = random_cloud(1000, 20.0, 5);
  for (auto _ : state) benchmark::DoNotOptimize(knn_label(cloud, labels, q.coords(), 5));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_KnnLabel)->Arg(10'000)->Arg(100'000);

void BM_TotalLoss(benchmark::State& state) {
  const int hw = static_cast<int>(state.range(0));
  Rng rng(6);
  Tensor3 z(hw, hw, 16);
  for (double& v : z.data) v = rng.uniform(-3, 3);
  OccupancyGrid gt(GridSpec::centered(hw, hw, 0.5, -2.5, 3.0));
  for (auto& v : gt.labels) v = static_cast<std::uint8_t>(rng.below(16));
  const auto w = default_loss_weights();
  for (auto _ : state) benchmark::DoNotOptimize(total_loss(z, gt, w, 1.0));
}
BENCHMARK(BM_TotalLoss)->Arg(32)->Arg(128);

void BM_ModelForwardBackward(benchmark::State& state) {
  const int hw = static_cast<int>(state.range(0));
  const auto spec = GridSpec::centered(hw, hw, 24.0 / hw, -2.5, 3.0);
  const Tensor3 pillars = pillarize(random_cloud(20'000, 12.0, 7), spec);
  const auto params = init_params(ModelShape{}, 8);
  std::vector<double> grad(params.values.size());
  Tensor3 g(hw, hw, params.shape.n_out, 1e-3);
  for (auto _ : state) {
    ForwardCache cache;
    benchmark::DoNotOptimize(model_forward(pillars, params, cache));
    model_backward(cache, params, g, grad);
  }
}
BENCHMARK(BM_ModelForwardBackward)->Arg(32)->Arg(64);

}  // namespace
