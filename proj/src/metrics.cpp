// SPDX-License-Identifier: Apache-2.0
#include "spark/metrics.hpp"

#include <algorithm>

namespace spark::metrics {

namespace {

std::size_t hits_in_top(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k) {
  const std::size_t n = std::min(k, pred.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += truth.count(pred[i]);
  return hits;
}

}  // namespace

double precision_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k) {
  if (k == 0) return 0.0;
  return static_cast<double>(hits_in_top(pred, truth, k)) / static_cast<double>(k);
}

double recall_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k) {
  if (truth.empty()) return 0.0;
  return static_cast<double>(hits_in_top(pred, truth, k)) / static_cast<double>(truth.size());
}

double hit_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k) {
  return hits_in_top(pred, truth, k) > 0 ? 1.0 : 0.0;
}

double ap_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k) {
  const std::size_t n = std::min(k, pred.size());
  std::size_t relevant = 0;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (truth.count(pred[j])) {
      ++relevant;
      sum += static_cast<double>(relevant) / static_cast<double>(j + 1);
    }
  }
  return relevant == 0 ? 0.0 : sum / static_cast<double>(relevant);
}

double rr_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k) {
  const std::size_t n = std::min(k, pred.size());
  for (std::size_t j = 0; j < n; ++j) {
    if (truth.count(pred[j])) return 1.0 / static_cast<double>(j + 1);
  }
  return 0.0;
}

Scores score_at_k(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k) {
  return {precision_at_k(pred, truth, k), recall_at_k(pred, truth, k), hit_at_k(pred, truth, k),
          ap_at_k(pred, truth, k), rr_at_k(pred, truth, k)};
}

}  // namespace spark::metrics
