// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "spark/annotator.hpp"
#include "spark/error.hpp"
#include "spark/text.hpp"
#include "synthetic.hpp"

using namespace spark;
using fixtures::iso_ts;
using fixtures::make_case;

namespace {

FaultPatternSet patterns(std::vector<std::string> p) {
  FaultPatternSet x;
  x.patterns = std::move(p);
  return x;
}

}  // namespace

TEST(Levenshtein, KnownValues) {
  EXPECT_EQ(levenshtein(U"kitten", U"sitting"), 3u);
  EXPECT_DOUBLE_EQ(normalized_levenshtein("kitten", "sitting"), 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(normalized_levenshtein("abc", "abc"), 0.0);
  EXPECT_DOUBLE_EQ(normalized_levenshtein("", "xyz"), 1.0);
  EXPECT_DOUBLE_EQ(normalized_levenshtein("", ""), 0.0);
  EXPECT_DOUBLE_EQ(normalized_levenshtein("\xC3\xA9t\xC3\xA9", "ete"), 2.0 / 3.0);
}

TEST(Levenshtein, NormalizerVariants) {
  const std::string a = "assert result == 5", b = "assert result == 8";
  EXPECT_NEAR(normalized_levenshtein(a, b, Normalizer::Max), 1.0 / 18.0, 1e-12);
  EXPECT_NEAR(normalized_levenshtein(a, b, Normalizer::Sum), 1.0 / 36.0, 1e-12);
  EXPECT_NEAR(normalized_levenshtein(a, b, Normalizer::Alignment), 2.0 / 37.0, 1e-12);
  EXPECT_EQ(parse_normalizer("align"), Normalizer::Alignment);
  EXPECT_EQ(parse_normalizer("sum"), Normalizer::Sum);
  EXPECT_THROW(parse_normalizer("min"), Error);
}

TEST(Levenshtein, MatchesOracleAndMetricLaws) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    std::u32string a, b;
    for (std::size_t i = 0, n = rng() % 13; i < n; ++i) a.push_back(U'a' + static_cast<char32_t>(rng() % 3));
    for (std::size_t i = 0, n = rng() % 13; i < n; ++i) b.push_back(U'a' + static_cast<char32_t>(rng() % 3));
    ASSERT_EQ(levenshtein(a, b), oracles::edit_distance(a, b));
    EXPECT_EQ(levenshtein(a, b), levenshtein(b, a));
    const std::string sa = text::encode_utf8(a), sb = text::encode_utf8(b);
    for (auto n : {Normalizer::Max, Normalizer::Sum, Normalizer::Alignment}) {
      const double d = normalized_levenshtein(sa, sb, n);
      EXPECT_GE(d, 0.0);
      EXPECT_LE(d, 1.0);
      EXPECT_EQ(d == 0.0, sa == sb);
      EXPECT_DOUBLE_EQ(d, normalized_levenshtein(sb, sa, n));
    }
  }
}

TEST(RetrieveContext, UnionWithProvenanceAndAccessHook) {
  Corpus c;
  c.add(make_case("tc3", {"result = a * b", "assert result == 8"}, "", iso_ts(0), {2}));
  c.add(make_case("tc4", {"assert result == 8", "x()"}, "", iso_ts(1), {1, 2}));
  c.add(make_case("bare", {"y()"}, "", iso_ts(2)));
  std::vector<std::string> accessed;
  const std::vector<SimilarityHit> hits{{"tc3", 0.9}, {"tc4", 0.8}, {"bare", 0.7}};
  const auto x = retrieve_context(hits, c, [&](const std::string& id) { accessed.push_back(id); });
  EXPECT_EQ(x.patterns, (std::vector<std::string>{"assert result == 8", "x()"}));
  EXPECT_EQ(x.provenance.at("assert result == 8"), (std::vector<std::string>{"tc3", "tc4"}));
  EXPECT_EQ(x.unlabeled, std::vector<std::string>{"bare"});
  EXPECT_EQ(accessed, (std::vector<std::string>{"tc3", "tc4", "bare"}));

  const std::vector<SimilarityHit> one{{"tc3", 1.0}};
  EXPECT_EQ(retrieve_context(one, c).patterns, std::vector<std::string>{"assert result == 8"});
  EXPECT_TRUE(retrieve_context({}, c).empty());
  const std::vector<SimilarityHit> unknown{{"nope", 1.0}};
  EXPECT_THROW(retrieve_context(unknown, c), Error);
}

TEST(LineScore, MinimumOverPatterns) {
  EXPECT_DOUBLE_EQ(line_score("abc", patterns({"abc"})), 0.0);
  // "abcdefghij" vs p1 at 3/10 and p2 at 1/10.
  EXPECT_DOUBLE_EQ(line_score("abcdefghij", patterns({"abcdefgXYZ", "abcdefghiX"})), 0.1);
  EXPECT_NEAR(line_score("assert result == 5", patterns({"assert result == 8"})), 1.0 / 18.0, 1e-12);
  EXPECT_THROW(line_score("x", patterns({})), Error);
}

TEST(LineScore, UnionIsMinOfParts) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    auto word = [&] { return fixtures::random_word(rng, 1, 8); };
    const std::string line = word();
    const auto x = patterns({word(), word()});
    const auto y = patterns({word()});
    auto both = x;
    both.patterns.insert(both.patterns.end(), y.patterns.begin(), y.patterns.end());
    EXPECT_DOUBLE_EQ(line_score(line, both), std::min(line_score(line, x), line_score(line, y)));
  }
}

TEST(LineScore, WhitespaceNormalization) {
  AnnotationOptions opts;
  EXPECT_DOUBLE_EQ(line_score("    x = 1   ", patterns({"    x = 1"}), opts), 0.0);
  EXPECT_GT(line_score("x = 1", patterns({"    x = 1"}), opts), 0.0);
  opts.trim_leading = true;
  EXPECT_DOUBLE_EQ(line_score("x = 1", patterns({"    x = 1"}), opts), 0.0);
}

TEST(Annotate, ThresholdRules) {
  const TestCase q = make_case("q", {"a = 2", "result = a + a", "assert result == 5"}, "", iso_ts(0));
  const auto x = patterns({"assert result == 8"});
  AnnotationOptions opts;
  EXPECT_TRUE(annotate(q, x, opts).annotated.empty());  // 1/18 > 0.05 under max
  opts.normalizer = Normalizer::Sum;
  EXPECT_EQ(annotate(q, x, opts).annotated, std::vector<int>{3});
  opts.epsilon = 1.0;
  EXPECT_EQ(annotate(q, x, opts).annotated, (std::vector<int>{1, 2, 3}));
  const auto none = annotate(q, FaultPatternSet{}, opts);
  EXPECT_TRUE(none.annotated.empty());
  EXPECT_TRUE(none.scores.empty());
  opts.epsilon = 1.5;
  EXPECT_THROW(annotate(q, x, opts), Error);
}

TEST(Annotate, DoesNotTouchBaseLines) {
  const TestCase q = make_case("q", {"x = 1", "assert x == 2"}, "e", iso_ts(0));
  const auto at = annotate(q, patterns({"assert x == 2"}));
  EXPECT_EQ(at.base, q);
  EXPECT_EQ(at.annotated, std::vector<int>{2});
  EXPECT_TRUE(at.is_annotated(2));
  EXPECT_FALSE(at.is_annotated(1));
  ASSERT_EQ(at.scores.size(), 2u);
  EXPECT_EQ(at.message, std::string(kAnnotationMessage));
}
