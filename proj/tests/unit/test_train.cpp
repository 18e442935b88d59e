#include <cmath>

#include <gtest/gtest.h>

#include "occspot/error.hpp"
#include "occspot/metrics.hpp"
#include "occspot/optim.hpp"
#include "occspot/train.hpp"

using namespace occspot;

namespace {

ModelShape small_shape() { return ModelShape{1, 8, 12, 16, 16, 12, 8, 16}; }

DatasetConfig small_dataset() {
  DatasetConfig d;
  d.scene.n_objects = 8;
  d.beams = BeamSpec{32, 2.0, -24.8, 360};
  d.grid = GridSpec::centered(16, 16, 1.5, -2.5, 3.0);
  return d;
}

TrainConfig quick_config(int epochs) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 2;
  t.seed = 5;
  return t;
}

}  // namespace

TEST(Metrics, Diagonal) {
  ConfusionMatrix cm(4);
  for (int c = 0; c < 4; ++c) cm.add(c, c, 3);
  const auto r = miou(cm, false);
  EXPECT_EQ(r.miou, 1.0);
  for (const auto& v : r.per_class) EXPECT_EQ(v.value(), 1.0);
}

TEST(Metrics, TwoClassWorkedCase) {
  // TP=(8,2), FP=(1,3), FN=(2,1)
  // a third class carries the off-diagonal mass
  ConfusionMatrix c3(3);
  c3.add(0, 0, 8);
  c3.add(1, 1, 2);
  c3.add(2, 0, 1);  // FP for 0
  c3.add(0, 2, 2);  // FN for 0
  c3.add(2, 1, 3);  // FP for 1
  c3.add(1, 2, 1);  // FN for 1
  const auto r = miou(c3, false);
  EXPECT_NEAR(r.per_class[0].value(), 8.0 / 11.0, 1e-15);
  EXPECT_NEAR(r.per_class[1].value(), 2.0 / 6.0, 1e-15);
  const double two = (8.0 / 11.0 + 1.0 / 3.0) / 2.0;
  EXPECT_NEAR(two, 0.53030, 5e-6);
  EXPECT_NEAR((r.per_class[0].value() + r.per_class[1].value()) / 2.0, two, 1e-15);
}

TEST(Metrics, AbsentClassExcluded) {
  ConfusionMatrix cm(3);
  cm.add(1, 1, 5);
  cm.add(2, 1, 5);
  const auto r = miou(cm, true);
  EXPECT_FALSE(r.per_class[0].has_value());
  EXPECT_EQ(r.n_counted, 2);
  EXPECT_NEAR(r.miou, 0.25, 1e-15);
  EXPECT_EQ(miou(ConfusionMatrix(3), true).miou, 0.0);
  EXPECT_THROW(cm.add(3, 0), std::out_of_range);
}

TEST(Optim, OneCycleShape) {
  const OneCycle s;
  EXPECT_NEAR(s(0, 100), 0.003 / 25, 1e-15);
  EXPECT_NEAR(s(30, 100), 0.003, 1e-15);
  EXPECT_NEAR(s(99, 100), 0.003 / 25, 1e-4);
  for (std::size_t i = 1; i < 30; ++i) EXPECT_GT(s(i, 100), s(i - 1, 100));
  for (std::size_t i = 31; i < 100; ++i) EXPECT_LT(s(i, 100), s(i - 1, 100));
}

TEST(Optim, AdamZeroLr) {
  Adam a(3);
  std::vector<double> p{1, 2, 3};
  const std::vector<double> g{0.5, -1, 2};
  a.step(p, g, 0.0);
  EXPECT_EQ(p, (std::vector<double>{1, 2, 3}));
}

TEST(Optim, AdamFirstStepIsLr) {
  // bias correction makes the first step lr * sign(g)
  Adam a(2);
  std::vector<double> p{0, 0};
  a.step(p, std::vector<double>{3.0, -0.01}, 0.1);
  EXPECT_NEAR(p[0], -0.1, 1e-8);
  EXPECT_NEAR(p[1], 0.1, 1e-5);
}

TEST(Dataset, Deterministic) {
  const auto d = small_dataset();
  const auto a = build_dataset(d, 2, 3), b = build_dataset(d, 2, 3);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a[i].cloud, b[i].cloud);
    EXPECT_EQ(a[i].target, b[i].target);
    EXPECT_EQ(a[i].summary.instances, b[i].summary.instances);
  }
}

TEST(Train, LearningRateZeroKeepsParams) {
  const auto data = build_dataset(small_dataset(), 2, 1);
  TrainConfig t = quick_config(1);
  t.schedule.peak = 0.0;
  const auto init = init_params(small_shape(), 2);
  const auto r = train(data, init, small_dataset().grid, t);
  EXPECT_EQ(r.params.values, init.values);
}

TEST(Train, BitIdenticalTraces) {
  const auto data = build_dataset(small_dataset(), 3, 1);
  TrainConfig t = quick_config(2);
  t.augment = true;
  t.source_beams = small_dataset().beams;
  t.augment_config.target_beam_specs = {BeamSpec{16, 2.0, -24.8, 360}};
  const auto init = init_params(small_shape(), 2);
  const auto a = train(data, init, small_dataset().grid, t);
  const auto b = train(data, init, small_dataset().grid, t);
  EXPECT_EQ(a.step_loss, b.step_loss);
  EXPECT_EQ(a.epoch_loss, b.epoch_loss);
  EXPECT_EQ(a.params.values, b.params.values);
  EXPECT_EQ(a.steps, 4u);
}

TEST(Train, NumericalErrorOnNan) {
  const auto data = build_dataset(small_dataset(), 1, 1);
  auto init = init_params(small_shape(), 2);
  init.values[init.layout().offset(Block::kHeadB)] = std::nan("");
  EXPECT_THROW(train(data, init, small_dataset().grid, quick_config(1)), std::exception);
}

TEST(Finetune, EmptySet) {
  try {
    finetune_segmentation(nullptr, {}, small_shape(), small_dataset().grid, quick_config(1));
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(std::string(e.what()), "empty fine-tune set");
  }
}

TEST(Finetune, IncompatibleCheckpoint) {
  auto d = small_dataset();
  d.target = TargetKind::kSingleFrame;
  const auto data = build_dataset(d, 1, 1);
  ModelShape other = small_shape();
  other.enc1 = 10;
  const auto pre = init_params(other, 1);
  EXPECT_THROW(finetune_segmentation(&pre, data, small_shape(), d.grid, quick_config(1)), DataError);
}

TEST(Finetune, MiouInRange) {
  auto d = small_dataset();
  d.target = TargetKind::kSingleFrame;
  const auto data = build_dataset(d, 2, 1);
  const auto pre = init_params(small_shape(), 7);
  const auto a = finetune_segmentation(nullptr, data, small_shape(), d.grid, quick_config(1));
  const auto b = finetune_segmentation(&pre, data, small_shape(), d.grid, quick_config(1));
  for (const auto* p : {&a.params, &b.params}) {
    const double m = miou(evaluate(*p, data, d.grid, true), true).miou;
    EXPECT_GE(m, 0.0);
    EXPECT_LE(m, 1.0);
  }
}
