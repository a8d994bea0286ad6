// SPDX-License-Identifier: Apache-2.0
#include "spark/annotator.hpp"

#include <algorithm>
#include <limits>
#include <unordered_set>

#include "spark/error.hpp"
#include "spark/text.hpp"

namespace spark {

FaultPatternSet retrieve_context(std::span<const SimilarityHit> hits, const Corpus& corpus,
                                 const LabelAccessHook& on_label_access) {
  FaultPatternSet out;
  for (const auto& hit : hits) {
    const TestCase& tc = corpus.at(hit.test_id);
    if (on_label_access) on_label_access(tc.id);
    if (!tc.labeled()) {
      out.unlabeled.push_back(tc.id);
      continue;
    }
    for (int line : tc.faulty_lines) {
      const std::string& content = tc.lines.at(static_cast<std::size_t>(line - 1));
      auto [it, inserted] = out.provenance.try_emplace(content);
      if (inserted) out.patterns.push_back(content);
      if (std::find(it->second.begin(), it->second.end(), tc.id) == it->second.end()) it->second.push_back(tc.id);
    }
  }
  return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[b.size()];
}

Normalizer parse_normalizer(std::string_view name) {
  if (name == "max") return Normalizer::Max;
  if (name == "sum") return Normalizer::Sum;
  if (name == "align" || name == "alignment") return Normalizer::Alignment;
  throw Error(ErrorCode::InvalidArgument, "unknown normalizer '" + std::string(name) + "'");
}

std::string_view to_string(Normalizer n) {
  switch (n) {
    case Normalizer::Max: return "max";
    case Normalizer::Sum: return "sum";
    case Normalizer::Alignment: return "align";
  }
  return "max";
}

double normalized_levenshtein(std::string_view a, std::string_view b, Normalizer normalizer) {
  const std::u32string ua = text::decode_utf8(a);
  const std::u32string ub = text::decode_utf8(b);
  if (ua.empty() && ub.empty()) return 0.0;
  const auto d = static_cast<double>(levenshtein(ua, ub));
  const auto la = static_cast<double>(ua.size());
  const auto lb = static_cast<double>(ub.size());
  switch (normalizer) {
    case Normalizer::Max: return d / std::max(la, lb);
    case Normalizer::Sum: return d / (la + lb);
    case Normalizer::Alignment: return 2.0 * d / (la + lb + d);
  }
  return d / std::max(la, lb);
}

std::string normalize_line(std::string_view line, bool trim_leading) {
  auto s = text::trim_right(line);
  if (trim_leading) s = text::trim_left(s);
  return std::string(s);
}

double line_score(std::string_view line, const FaultPatternSet& patterns, const AnnotationOptions& options) {
  if (patterns.empty()) throw Error(ErrorCode::EmptyPatternSet, "no fault patterns to score against");
  const std::string norm = normalize_line(line, options.trim_leading);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : patterns.patterns) {
    best = std::min(best, normalized_levenshtein(norm, normalize_line(p, options.trim_leading), options.normalizer));
    if (best == 0.0) break;
  }
  return best;
}

bool AnnotatedTest::is_annotated(int line) const {
  return std::binary_search(annotated.begin(), annotated.end(), line);
}

AnnotatedTest annotate(const TestCase& query, const FaultPatternSet& patterns, const AnnotationOptions& options) {
  if (!(options.epsilon >= 0.0 && options.epsilon <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "epsilon must be in [0, 1]");
  }
  AnnotatedTest at;
  at.base = query;
  at.epsilon = options.epsilon;
  at.message = options.message;
  if (patterns.empty()) return at;

  std::vector<std::string> normalized;
  normalized.reserve(patterns.patterns.size());
  for (const auto& p : patterns.patterns) normalized.push_back(normalize_line(p, options.trim_leading));

  at.scores.reserve(query.lines.size());
  for (std::size_t i = 0; i < query.lines.size(); ++i) {
    const std::string line = normalize_line(query.lines[i], options.trim_leading);
    double best = 1.0;
    for (const auto& p : normalized) {
      best = std::min(best, normalized_levenshtein(line, p, options.normalizer));
      if (best == 0.0) break;
    }
    at.scores.push_back(best);
    if (best <= options.epsilon) at.annotated.push_back(static_cast<int>(i + 1));
  }
  return at;
}

}  // namespace spark
