// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <set>
#include <vector>

namespace spark::metrics {

/// Only the first min(k, |pred|) predictions count. Precision divides by the
/// requested k, recall by |truth| (0 when truth is empty).
double precision_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k);
double recall_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k);
double hit_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k);

/// AP@k = (1/m) * sum_{j<=k} P(j) * rel(j), m = relevant items in the top k;
/// 0 when m = 0.
double ap_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k);

/// 1 / rank of the first relevant item within the top k, else 0.
double rr_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k);

struct Scores {
  double precision = 0.0;
  double recall = 0.0;
  double hit = 0.0;
  double ap = 0.0;
  double rr = 0.0;
};

Scores score_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k);

}  // namespace spark::metrics
