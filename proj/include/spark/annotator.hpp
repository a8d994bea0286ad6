// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spark/corpus.hpp"
#include "spark/simsearch.hpp"

namespace spark {

inline constexpr std::string_view kAnnotationMessage = "# !!! high likelihood of being faulty !!!";

/// Faulty-line contents gathered from retrieved cases, in first-seen order.
struct FaultPatternSet {
  std::vector<std::string> patterns;
  std::map<std::string, std::vector<std::string>> provenance;  // pattern -> contributing test ids
  std::vector<std::string> unlabeled;                          // hits skipped for having no labels

  bool empty() const { return patterns.empty(); }
};

/// Called with the id of every case whose fault labels are read.
using LabelAccessHook = std::function<void(const std::string& test_id)>;

/// Union of the faulty-line contents of `hits`. Hits without labels are
/// listed in `unlabeled` and skipped; unknown ids throw
/// Error{InvalidArgument}.
FaultPatternSet retrieve_context(std::span<const SimilarityHit> hits, const Corpus& corpus,
                                 const LabelAccessHook& on_label_access = {});

/// Unit-cost edit distance over Unicode scalar values.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

enum class Normalizer {
  Max,        // d / max(|a|, |b|)
  Sum,        // d / (|a| + |b|)
  Alignment,  // 2d / (|a| + |b| + d)
};

Normalizer parse_normalizer(std::string_view name);  // max|sum|align
std::string_view to_string(Normalizer n);

/// Normalized edit distance in [0, 1]; 0 for two empty strings.
double normalized_levenshtein(std::string_view a, std::string_view b, Normalizer normalizer = Normalizer::Max);

struct AnnotationOptions {
  double epsilon = 0.05;
  Normalizer normalizer = Normalizer::Max;
  bool trim_leading = false;  // trailing whitespace is always stripped
  std::string message = std::string(kAnnotationMessage);
};

/// Line text as compared by the annotator.
std::string normalize_line(std::string_view line, bool trim_leading);

/// Minimum normalized distance from `line` to any pattern. Throws
/// Error{EmptyPatternSet}.
double line_score(std::string_view line, const FaultPatternSet& patterns, const AnnotationOptions& options = {});

struct AnnotatedTest {
  TestCase base;
  std::vector<double> scores;   // scores[i-1] for line i; empty when there are no patterns
  std::vector<int> annotated;   // sorted 1-based line ids with score <= epsilon
  double epsilon = 0.05;
  std::string message = std::string(kAnnotationMessage);

  bool is_annotated(int line) const;
};

/// Marks lines whose score is within epsilon. The base lines are not
/// modified; the message is only attached when a prompt is rendered.
AnnotatedTest annotate(const TestCase& query, const FaultPatternSet& patterns, const AnnotationOptions& options = {});

}  // namespace spark
