// SPDX-License-Identifier: Apache-2.0
#include "spark/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "spark/error.hpp"

namespace spark {

FilterPolicy FilterPolicy::parse(std::string_view name, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "fraction must be in (0, 1], got " + std::to_string(fraction));
  }
  if (name == "all") return {Kind::All, fraction};
  if (name == "all-preceding") return {Kind::AllPreceding, fraction};
  if (name == "closest" || name == "closest-by-time") return {Kind::ClosestByTime, fraction};
  if (name == "closest-preceding" || name == "closest-time-preceding") {
    return {Kind::ClosestTimePreceding, fraction};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown policy '" + std::string(name) + "'");
}

std::string FilterPolicy::name() const {
  switch (kind) {
    case Kind::All: return "all";
    case Kind::AllPreceding: return "all-preceding";
    case Kind::ClosestByTime: return "closest";
    case Kind::ClosestTimePreceding: return "closest-preceding";
  }
  return "all";
}

std::size_t retention_count(double fraction, std::size_t n) {
  // std::round rounds halves away from zero.
  const double raw = std::round(fraction * static_cast<double>(n));
  if (raw <= 0.0) return 0;
  return std::min(n, static_cast<std::size_t>(raw));
}

KnowledgeBase filter(const TestCase& query, const Corpus& corpus, const FilterPolicy& policy) {
  if (!(policy.fraction > 0.0 && policy.fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "fraction must be in (0, 1]");
  }
  const std::int64_t t0 = query.failure_ts.epoch_ms;
  const bool preceding_only =
      policy.kind == FilterPolicy::Kind::AllPreceding || policy.kind == FilterPolicy::Kind::ClosestTimePreceding;

  std::size_t all_count = 0;
  std::vector<const TestCase*> candidates;
  for (const auto& tc : corpus) {
    if (tc.id == query.id) continue;
    ++all_count;
    if (preceding_only && tc.failure_ts.epoch_ms >= t0) continue;
    candidates.push_back(&tc);
  }

  std::sort(candidates.begin(), candidates.end(), [t0](const TestCase* a, const TestCase* b) {
    const auto da = std::llabs(a->failure_ts.epoch_ms - t0);
    const auto db = std::llabs(b->failure_ts.epoch_ms - t0);
    if (da != db) return da < db;
    if (a->failure_ts.epoch_ms != b->failure_ts.epoch_ms) return a->failure_ts.epoch_ms < b->failure_ts.epoch_ms;
    return a->id < b->id;
  });

  if (policy.kind == FilterPolicy::Kind::ClosestByTime || policy.kind == FilterPolicy::Kind::ClosestTimePreceding) {
    const std::size_t keep = std::min(retention_count(policy.fraction, all_count), candidates.size());
    candidates.resize(keep);
  }

  KnowledgeBase kb;
  kb.query_id = query.id;
  kb.members.reserve(candidates.size());
  for (const auto* tc : candidates) kb.members.push_back(tc->id);
  return kb;
}

}  // namespace spark
