#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "occspot/theory.hpp"

using namespace occspot;
using namespace occspot::theory;

namespace {

Joint2 identity_coupling(int k) {
  Joint2 j{k, k, std::vector<double>(static_cast<std::size_t>(k * k), 0.0)};
  for (int i = 0; i < k; ++i) j.p[static_cast<std::size_t>(i * k + i)] = 1.0 / k;
  return j;
}

Joint2 product(const std::vector<double>& a, const std::vector<double>& b) {
  Joint2 j{static_cast<int>(a.size()), static_cast<int>(b.size()), {}};
  for (double x : a)
    for (double y : b) j.p.push_back(x * y);
  return j;
}

oracle::Real mi_hp(const Joint2& j) {
  std::vector<oracle::Real> pz(static_cast<std::size_t>(j.nz), 0), pt(static_cast<std::size_t>(j.nt), 0);
  for (int z = 0; z < j.nz; ++z)
    for (int t = 0; t < j.nt; ++t) {
      pz[static_cast<std::size_t>(z)] += j.at(z, t);
      pt[static_cast<std::size_t>(t)] += j.at(z, t);
    }
  oracle::Real s = 0;
  for (int z = 0; z < j.nz; ++z)
    for (int t = 0; t < j.nt; ++t) {
      const oracle::Real p = j.at(z, t);
      if (p > 0) s += p * log(p / (pz[static_cast<std::size_t>(z)] * pt[static_cast<std::size_t>(t)]));
    }
  return s;
}

}  // namespace

TEST(Entropy, Cases) {
  const double u4[] = {0.25, 0.25, 0.25, 0.25};
  EXPECT_NEAR(entropy(u4), std::log(4.0), 1e-15);
  EXPECT_NEAR(entropy(u4), 1.386294, 5e-7);
  const double point[] = {0.0, 1.0, 0.0};
  EXPECT_EQ(entropy(point), 0.0);
  const double h[] = {0.5, 0.25, 0.25};
  EXPECT_NEAR(entropy(h), 1.5 * std::log(2.0), 1e-15);
  EXPECT_NEAR(entropy(h), 1.039721, 5e-7);
  const double neg[] = {1.5, -0.5};
  EXPECT_THROW(entropy(neg), std::invalid_argument);
}

TEST(MutualInformation, Cases) {
  EXPECT_NEAR(mutual_information(product({0.2, 0.8}, {0.1, 0.3, 0.6})), 0.0, 1e-12);
  for (int k : {2, 3, 7}) EXPECT_NEAR(mutual_information(identity_coupling(k)), std::log(k), 1e-12);
  Joint2 bad{2, 2, {0.5, 0.5, 0.5, -0.5}};
  EXPECT_THROW(mutual_information(bad), std::invalid_argument);
}

TEST(MutualInformation, ExtendedPrecision) {
  Rng rng(1);
  for (int t = 0; t < 50; ++t) {
    const Joint2 j = random_joint(rng, 3, 3);
    EXPECT_NEAR(mutual_information(j), static_cast<double>(mi_hp(j)), 1e-13);
  }
}

TEST(ConditionalMi, Cases) {
  // O and T independent given Z
  Joint3 ci{2, 2, 2, std::vector<double>(8)};
  const double pz[] = {0.3, 0.7}, po[2][2] = {{0.2, 0.8}, {0.6, 0.4}}, pt[2][2] = {{0.5, 0.5}, {0.9, 0.1}};
  for (int o = 0; o < 2; ++o)
    for (int t = 0; t < 2; ++t)
      for (int z = 0; z < 2; ++z) ci.p[static_cast<std::size_t>((o * 2 + t) * 2 + z)] = pz[z] * po[z][o] * pt[z][t];
  EXPECT_NEAR(conditional_mi(ci), 0.0, 1e-12);

  // constant Z
  Rng rng(2);
  const Joint2 ot = random_joint(rng, 3, 4);
  Joint3 c{3, 4, 1, ot.p};
  EXPECT_NEAR(conditional_mi(c), mutual_information(ot), 1e-12);
}

TEST(ConditionalMi, ChainRule) {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    // (Z, O, T) random 2x2x2 stored as Joint3 over (O, T, Z)
    const Joint2 flat = random_joint(rng, 4, 2);  // rows (o, z), cols t
    Joint3 j{2, 2, 2, std::vector<double>(8)};
    Joint2 zt{2, 2, std::vector<double>(4, 0.0)};
    for (int o = 0; o < 2; ++o)
      for (int z = 0; z < 2; ++z)
        for (int tt = 0; tt < 2; ++tt) {
          const double p = flat.at(o * 2 + z, tt);
          j.p[static_cast<std::size_t>((o * 2 + tt) * 2 + z)] = p;
          zt.p[static_cast<std::size_t>(z * 2 + tt)] += p;
        }
    EXPECT_NEAR(mutual_information(flat), mutual_information(zt) + conditional_mi(j), 1e-12);
  }
}

TEST(BayesError, Cases) {
  EXPECT_NEAR(bayes_error(identity_coupling(5)), 0.0, 1e-15);
  EXPECT_NEAR(bayes_error(product({0.4, 0.6}, {0.2, 0.5, 0.3})), 0.5, 1e-15);
}

TEST(BayesError, EnumerateClassifiers) {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const Joint2 j = random_joint(rng, 4, 3);
    double best = 1.0;
    for (int code = 0; code < 81; ++code) {
      int c = code;
      double correct = 0;
      for (int z = 0; z < 4; ++z) {
        correct += j.at(z, c % 3);
        c /= 3;
      }
      best = std::min(best, 1.0 - correct);
    }
    EXPECT_NEAR(bayes_error(j), best, 1e-14);
  }
}

TEST(Bound, TightCases) {
  const auto a = check_bayes_bound(identity_coupling(4));
  EXPECT_NEAR(a.bayes_error, 0.0, 1e-15);
  EXPECT_NEAR(a.bound_value, 0.0, 1e-12);
  EXPECT_NEAR(a.slack, 0.0, 1e-12);
  const auto b = check_bayes_bound(product({0.5, 0.5}, {0.5, 0.5}));
  EXPECT_NEAR(b.bayes_error, 0.5, 1e-15);
  EXPECT_NEAR(b.bound_value, 0.5, 1e-15);
  EXPECT_NEAR(b.slack, 0.0, 1e-15);
  EXPECT_TRUE(b.satisfied);
}

TEST(Decomposition, ExtremeMaps) {
  Rng rng(5);
  const Joint2 j = random_joint(rng, 5, 3);
  const int id[] = {0, 1, 2, 3, 4}, zero[] = {0, 0, 0, 0, 0};
  const auto r = lemma1_decomposition(j, id, zero);
  EXPECT_NEAR(r.lhs, mutual_information(j), 1e-12);
  EXPECT_NEAR(r.rhs, mutual_information(j), 1e-12);
  const auto same = lemma1_decomposition(j, id, id);
  EXPECT_NEAR(same.lhs, 0.0, 1e-15);
  EXPECT_NEAR(same.rhs, 0.0, 1e-15);
  EXPECT_TRUE(same.holds);
}

TEST(RiskOrdering, IdentityAndConstant) {
  Rng rng(6);
  const Joint2 j = random_joint(rng, 4, 3);
  const double tv[] = {-1.0, 0.5, 2.0};
  const int id[] = {0, 1, 2, 3}, zero[] = {0, 0, 0, 0};
  const auto r = risk_ordering(j, tv, id);
  EXPECT_NEAR(r.risk, r.risk_garbled, 1e-15);
  EXPECT_NEAR(r.bayes, r.bayes_garbled, 1e-15);
  const auto c = risk_ordering(j, tv, zero);
  const auto pt = j.marginal_t();
  double mean = 0, sq = 0;
  for (int t = 0; t < 3; ++t) {
    mean += pt[static_cast<std::size_t>(t)] * tv[t];
    sq += pt[static_cast<std::size_t>(t)] * tv[t] * tv[t];
  }
  EXPECT_NEAR(c.risk_garbled, sq - mean * mean, 1e-12);
  EXPECT_TRUE(c.holds);
  const double short_tv[] = {1.0};
  EXPECT_THROW(risk_ordering(j, short_tv, id), std::invalid_argument);
}

TEST(Sweeps, Small) {
  const auto s = run_sweeps(2000, 500, 500, 7);
  EXPECT_EQ(s.bound_violations, 0u);
  EXPECT_GE(s.min_slack, -1e-12);
  EXPECT_EQ(s.lemma_violations, 0u);
  EXPECT_LE(s.lemma_max_difference, 1e-12);
  EXPECT_EQ(s.risk_violations, 0u);
}
