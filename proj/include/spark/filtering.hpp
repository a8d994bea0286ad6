// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "spark/corpus.hpp"

namespace spark {

/// Temporal data-availability policy used to build a knowledge base.
struct FilterPolicy {
  enum class Kind { All, AllPreceding, ClosestByTime, ClosestTimePreceding };

  Kind kind = Kind::All;
  double fraction = 0.10;  // only used by the Closest* kinds; 0 < fraction <= 1

  static FilterPolicy all() { return {Kind::All, 0.10}; }
  static FilterPolicy all_preceding() { return {Kind::AllPreceding, 0.10}; }
  static FilterPolicy closest_by_time(double f = 0.10) { return {Kind::ClosestByTime, f}; }
  static FilterPolicy closest_time_preceding(double f = 0.10) { return {Kind::ClosestTimePreceding, f}; }

  /// Accepts the CLI names all|all-preceding|closest|closest-preceding.
  /// Throws Error{InvalidArgument}.
  static FilterPolicy parse(std::string_view name, double fraction = 0.10);

  std::string name() const;
};

struct KnowledgeBase {
  std::string query_id;
  std::vector<std::string> members;  // ascending |dt|, then earlier ts, then id
};

/// round(fraction * n) with halves rounded away from zero.
std::size_t retention_count(double fraction, std::size_t n);

/// Builds the knowledge base for `query`. The query itself is always
/// excluded when it is a corpus member.
///
/// The Closest* policies keep a fixed number of cases,
/// retention_count(fraction, |all non-query cases|). ClosestTimePreceding
/// takes that many from the preceding set, or the whole preceding set when it
/// is smaller.
KnowledgeBase filter(const TestCase& query, const Corpus& corpus, const FilterPolicy& policy);

}  // namespace spark
