// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "oracles.hpp"
#include "spark/metrics.hpp"

using namespace spark;
using namespace spark::metrics;

TEST(Metrics, HandCase) {
  const std::vector<int> pred{3, 1, 2};
  const std::set<int> truth{1};
  EXPECT_DOUBLE_EQ(precision_at_k(pred, truth, 3), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(recall_at_k(pred, truth, 3), 1.0);
  EXPECT_DOUBLE_EQ(hit_at_k(pred, truth, 3), 1.0);
  EXPECT_DOUBLE_EQ(ap_at_k(pred, truth, 3), 0.5);
  EXPECT_DOUBLE_EQ(rr_at_k(pred, truth, 3), 0.5);
}

TEST(Metrics, DegenerateCases) {
  EXPECT_DOUBLE_EQ(precision_at_k({1}, {1}, 1), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k({1}, {1}, 1), 1.0);
  EXPECT_DOUBLE_EQ(ap_at_k({4, 5}, {1}, 2), 0.0);
  EXPECT_DOUBLE_EQ(rr_at_k({4, 5}, {1}, 2), 0.0);
  EXPECT_DOUBLE_EQ(ap_at_k({1, 2}, {1, 2, 3}, 2), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k({1}, {}, 1), 0.0);
  // Short prediction still divides by the requested k.
  EXPECT_DOUBLE_EQ(precision_at_k({1}, {1}, 4), 0.25);
  EXPECT_DOUBLE_EQ(rr_at_k({9, 1}, {1}, 1), 0.0);
}

TEST(Metrics, MatchOracleOnRandomInstances) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 1);
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::vector<int> pred(ids.begin(), ids.begin() + static_cast<long>(rng() % (n + 1)));
    std::set<int> truth;
    for (int i = 1; i <= n; ++i) {
      if (rng() % 3 == 0) truth.insert(i);
    }
    const std::size_t k = 1 + rng() % n;
    const auto want = oracles::rank_metrics(pred, truth, k);
    const auto got = score_at_k(pred, truth, k);
    ASSERT_NEAR(got.precision, want.precision, 1e-12);
    ASSERT_NEAR(got.recall, want.recall, 1e-12);
    ASSERT_NEAR(got.hit, want.hit, 1e-12);
    ASSERT_NEAR(got.ap, want.ap, 1e-12);
    ASSERT_NEAR(got.rr, want.rr, 1e-12);
    if (k == 1) {
      EXPECT_DOUBLE_EQ(got.precision, got.hit);
      EXPECT_DOUBLE_EQ(got.ap, got.hit);
      EXPECT_DOUBLE_EQ(got.rr, got.hit);
    }
  }
}
