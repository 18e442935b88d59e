#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "occspot/balance.hpp"

using namespace occspot;

namespace {

FrameSummary frame(std::map<int, std::uint64_t> m) { return FrameSummary{std::move(m)}; }

std::vector<double> frequencies(const std::vector<double>& w, std::size_t draws, std::uint64_t seed) {
  const auto idx = resample_frames(w, draws, seed);
  std::vector<double> f(w.size(), 0.0);
  for (auto i : idx) f[i] += 1.0;
  for (auto& v : f) v /= static_cast<double>(draws);
  return f;
}

}  // namespace

TEST(ClassStats, SingleClass) {
  const std::vector<FrameSummary> frames{frame({{1, 2}})};
  const int fg[] = {1};
  const auto s = class_stats(frames, fg);
  EXPECT_EQ(s.class_ids, std::vector<int>{1});
  EXPECT_EQ(s.counts, std::vector<std::uint64_t>{2});
  EXPECT_EQ(s.n_fg(), 1u);
}

TEST(ClassStats, Summation) {
  const std::vector<FrameSummary> frames{frame({{1, 3}, {2, 1}}), frame({{1, 1}})};
  const int fg[] = {1, 2, 3};
  const auto s = class_stats(frames, fg);
  EXPECT_EQ(s.class_ids, (std::vector<int>{1, 2}));
  EXPECT_EQ(s.counts, (std::vector<std::uint64_t>{4, 1}));
  EXPECT_EQ(s.excluded, std::vector<int>{3});
}

TEST(ClassStats, AllZero) {
  const std::vector<FrameSummary> frames{frame({}), frame({{2, 0}})};
  const int fg[] = {1, 2};
  EXPECT_THROW(class_stats(frames, fg), std::invalid_argument);
}

TEST(SamplingWeights, Equal) {
  ClassStats s{{1, 2}, {5, 5}, {}};
  const auto w = sampling_weights(s);
  EXPECT_DOUBLE_EQ(w.s[0], 1.0);
  EXPECT_DOUBLE_EQ(w.s[1], 1.0);
}

TEST(SamplingWeights, WorkedCase) {
  ClassStats s{{1, 2, 3, 4}, {10, 10, 10, 70}, {}};
  const auto w = sampling_weights(s);
  const auto exact = oracle::class_weights_exact(s.counts);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(w.s[i], static_cast<double>(exact[i]), 1e-12);
  EXPECT_NEAR(w.s[0], 1.58114, 5e-6);
  EXPECT_NEAR(w.s[3], 0.59761, 5e-6);
  EXPECT_EQ(w.weight_of(4), w.s[3]);
  EXPECT_THROW(w.weight_of(9), std::out_of_range);
}

TEST(SamplingWeights, RandomMatchRational) {
  Rng rng(2);
  for (int t = 0; t < 500; ++t) {
    ClassStats s;
    const int n = 1 + static_cast<int>(rng.below(8));
    for (int i = 0; i < n; ++i) {
      s.class_ids.push_back(i + 1);
      s.counts.push_back(1 + rng.below(100000));
    }
    const auto w = sampling_weights(s);
    const auto exact = oracle::class_weights_exact(s.counts);
    for (int i = 0; i < n; ++i) ASSERT_NEAR(w.s[static_cast<std::size_t>(i)], static_cast<double>(exact[static_cast<std::size_t>(i)]), 1e-12);
  }
}

TEST(FrameWeights, Rules) {
  ClassStats s{{1, 2, 3}, {100, 10, 1}, {}};
  const auto w = sampling_weights(s);
  const std::vector<FrameSummary> frames{frame({{3, 1}}), frame({{1, 1}, {2, 1}, {3, 1}}), frame({}),
                                         frame({{7, 4}})};
  const auto fw = frame_weights(frames, w);
  EXPECT_EQ(fw[0], w.max());
  EXPECT_EQ(fw[1], w.max());
  EXPECT_EQ(fw[2], w.min());
  EXPECT_EQ(fw[3], w.min());
}

TEST(Sampler, Uniform) {
  const std::vector<double> w(10, 1.0);
  for (double f : frequencies(w, 1000000, 3)) EXPECT_NEAR(f, 0.1, 0.02);
}

TEST(Sampler, OneThree) {
  const auto f = frequencies({1.0, 3.0}, 1000000, 4);
  EXPECT_NEAR(f[0], 0.25, 0.01);
  EXPECT_NEAR(f[1], 0.75, 0.01);
}

TEST(Sampler, Deterministic) {
  const std::vector<double> w{0.5, 1, 2, 4};
  EXPECT_EQ(resample_frames(w, 1000, 9), resample_frames(w, 1000, 9));
  EXPECT_NE(resample_frames(w, 1000, 9), resample_frames(w, 1000, 10));
}

TEST(LossWeights, Defaults) {
  // w_empty, w_fg, w_bg
  const auto w = default_loss_weights();
  ASSERT_EQ(w.w.size(), 16u);
  EXPECT_EQ(w.w[0], 0.01);
  for (int c : {1, 2, 3, 4, 5}) EXPECT_EQ(w.w[static_cast<std::size_t>(c)], 2.0);
  for (int c = 6; c <= 15; ++c) EXPECT_EQ(w.w[static_cast<std::size_t>(c)], 1.0);
}

TEST(LossWeights, MinimalAndOverlap) {
  const int fg[] = {1};
  const auto w = class_loss_weights(1, fg, {});
  EXPECT_EQ(w.w, (std::vector<double>{0.01, 2.0}));
  const int bg[] = {1, 2};
  const int fg2[] = {1};
  EXPECT_THROW(class_loss_weights(2, fg2, bg), std::invalid_argument);
  const int gap[] = {1};
  EXPECT_THROW(class_loss_weights(3, gap, std::span<const int>(bg).subspan(1)), std::invalid_argument);
}
