// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

// Slow reference implementations used to cross-check the library.
namespace spark::oracles {

/// Plain recursion with a memo table keyed by suffix positions.
inline std::size_t edit_distance(const std::u32string& a, const std::u32string& b) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> d = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size()) return b.size() - j;
    if (j == b.size()) return a.size() - i;
    const auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t v = std::min({d(i + 1, j) + 1, d(i, j + 1) + 1, d(i + 1, j + 1) + (a[i] == b[j] ? 0u : 1u)});
    memo.emplace(key, v);
    return v;
  };
  return d(0, 0);
}

struct RankScores {
  double precision = 0, recall = 0, hit = 0, ap = 0, rr = 0;
};

/// Enumerates every rank position 1..k and re-derives each metric from the
/// relevance vector.
inline RankScores rank_metrics(const std::vector<int>& pred, const std::set<int>& truth, std::size_t k) {
  std::vector<int> rel(k, 0);
  for (std::size_t j = 0; j < k && j < pred.size(); ++j) rel[j] = truth.count(pred[j]) ? 1 : 0;
  RankScores s;
  int hits = 0;
  double ap_sum = 0;
  for (std::size_t j = 1; j <= k; ++j) {
    int prefix = 0;
    for (std::size_t t = 0; t < j; ++t) prefix += rel[t];
    if (rel[j - 1]) {
      ap_sum += static_cast<double>(prefix) / static_cast<double>(j);
      if (s.rr == 0) s.rr = 1.0 / static_cast<double>(j);
    }
    hits = prefix;
  }
  s.precision = static_cast<double>(hits) / static_cast<double>(k);
  s.recall = truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  s.hit = hits > 0 ? 1.0 : 0.0;
  s.ap = hits > 0 ? ap_sum / hits : 0.0;
  return s;
}

}  // namespace spark::oracles
