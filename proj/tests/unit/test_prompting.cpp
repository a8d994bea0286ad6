// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>
#include <set>

#include "spark/error.hpp"
#include "spark/prompting.hpp"
#include "synthetic.hpp"

using namespace spark;
using fixtures::iso_ts;
using fixtures::make_case;

namespace {

const TestCase kQuery = make_case(
    "q", {"def test_add():", "    a = 2", "    result = a + a", "    assert result == 5"},
    "AssertionError: assert 4 == 5", iso_ts(0));

FaultPatternSet patterns(std::vector<std::string> p) {
  FaultPatternSet x;
  x.patterns = std::move(p);
  return x;
}

AnnotatedTest annotated(std::vector<int> lines) {
  AnnotatedTest at;
  at.base = kQuery;
  at.annotated = std::move(lines);
  return at;
}

PromptOptions opts(TemplateKind kind, std::size_t k) {
  PromptOptions o;
  o.kind = kind;
  o.k = k;
  return o;
}

}  // namespace

TEST(Tokens, HeuristicCounts) {
  EXPECT_EQ(count_tokens(""), 0u);
  EXPECT_EQ(count_tokens("x = 1"), 3u);
  EXPECT_EQ(count_tokens("assert result == 5"), 5u);
  EXPECT_EQ(count_tokens("foo_bar(1,2)"), 6u);
  EXPECT_EQ(char_count("h\xC3\xA9"), 2u);
}

TEST(Render, NumberedLinesAndInlineMessage) {
  const auto at = annotated({4});
  const std::string code = render_test_code(at, true);
  EXPECT_EQ(code,
            "1: def test_add():\n2:     a = 2\n3:     result = a + a\n4:     assert result == 5 "
            "# !!! high likelihood of being faulty !!!");
  EXPECT_EQ(render_test_code(at, false).find("!!!"), std::string::npos);
  EXPECT_EQ(output_template(3), "[ID_1, ID_2, ID_3]");
}

TEST(Render, BaselineStructure) {
  const auto b = render_prompt(annotated({}), opts(TemplateKind::Baseline, 2));
  EXPECT_EQ(b.k, 2u);
  EXPECT_EQ(b.max_element_id, 4u);
  EXPECT_EQ(b.query_id, "q");
  EXPECT_EQ(b.char_count, b.text.size());
  EXPECT_EQ(b.token_count, count_tokens(b.text));
  const auto desc = b.text.find("## Task Description");
  const auto inputs = b.text.find("## Inputs");
  const auto instr = b.text.find("## Task Instructions");
  EXPECT_LT(desc, inputs);
  EXPECT_LT(inputs, instr);
  EXPECT_NE(b.text.find("Python test scripts"), std::string::npos);
  EXPECT_NE(b.text.find("within the range 1 to 4"), std::string::npos);
  EXPECT_NE(b.text.find("must be exactly 2"), std::string::npos);
  EXPECT_NE(b.text.find("[ID_1, ID_2]"), std::string::npos);
  EXPECT_NE(b.text.find(kQuery.error_message), std::string::npos);
  EXPECT_EQ(b.text.find("Additional Context"), std::string::npos);
}

TEST(Render, DegradesToBaselineWithoutContext) {
  const auto base = render_prompt(annotate(kQuery, FaultPatternSet{}), opts(TemplateKind::Baseline, 1));
  EXPECT_EQ(render_prompt(annotated({}), opts(TemplateKind::Baseline, 1)).text, base.text);
  EXPECT_EQ(render_prompt(annotated({}), opts(TemplateKind::AnnotationFree, 1)).text, base.text);
  EXPECT_EQ(render_prompt(annotated({}), opts(TemplateKind::NaiveRag, 1)).text, base.text);
}

TEST(Render, AnnotationOverheadIsExact) {
  const auto plain = render_prompt(annotated({}), opts(TemplateKind::Baseline, 1));
  const auto marked = render_prompt(annotated({2, 4}), opts(TemplateKind::Baseline, 1));
  EXPECT_EQ(marked.char_count - plain.char_count, 2 * (1 + char_count(kAnnotationMessage)));
  EXPECT_NE(marked.text.find("4:     assert result == 5 # !!! high likelihood of being faulty !!!"), std::string::npos);
}

TEST(Render, AnnotationFreeListsPatternsWithoutInlineMarks) {
  PromptContext ctx;
  ctx.patterns = patterns({"    assert result == 8"});
  const auto p = render_prompt(annotated({4}), opts(TemplateKind::AnnotationFree, 1), ctx);
  EXPECT_NE(p.text.find("## Additional Context"), std::string::npos);
  EXPECT_NE(p.text.find("    assert result == 8\n"), std::string::npos);
  EXPECT_EQ(p.text.find(std::string(kAnnotationMessage)), std::string::npos);
  EXPECT_LT(p.text.find("## Inputs"), p.text.find("## Additional Context"));
}

TEST(Render, DirectivePutsInstructionsFirst) {
  const auto p = render_prompt(annotated({4}), opts(TemplateKind::Directive, 1));
  EXPECT_LT(p.text.find("## Task Instructions"), p.text.find("## Inputs"));
  EXPECT_NE(p.text.find("start with investigating them first"), std::string::npos);
  EXPECT_NE(p.text.find("4:     assert result == 5 " + std::string(kAnnotationMessage)), std::string::npos);
}

TEST(Render, NaiveRagAppendsWholeCase) {
  PromptContext ctx;
  ctx.retrieved.push_back(make_case("tc3", {"def test_mul():", "    result = 2 * 3", "    assert result == 8"},
                                    "AssertionError: assert 6 == 8", iso_ts(0), {3}));
  const auto rag = render_prompt(annotated({}), opts(TemplateKind::NaiveRag, 1), ctx);
  const auto base = render_prompt(annotated({}), opts(TemplateKind::Baseline, 1));
  EXPECT_GT(rag.char_count, base.char_count);
  EXPECT_NE(rag.text.find("AssertionError: assert 6 == 8"), std::string::npos);
  EXPECT_NE(rag.text.find("3:     assert result == 8"), std::string::npos);
  EXPECT_NE(rag.text.find("### Faulty Lines\n[3]"), std::string::npos);
}

TEST(Render, KTooLarge) {
  EXPECT_THROW(render_prompt(annotated({}), opts(TemplateKind::Baseline, 5)), Error);
  EXPECT_THROW(render_prompt(annotated({}), opts(TemplateKind::Baseline, 0)), Error);
  EXPECT_NO_THROW(render_prompt(annotated({}), opts(TemplateKind::Baseline, 4)));
}

TEST(Render, LanguageSlot) {
  auto o = opts(TemplateKind::Baseline, 1);
  o.programming_language = "Java";
  EXPECT_NE(render_prompt(annotated({}), o).text.find("Java test scripts"), std::string::npos);
}

TEST(ParseRanking, Examples) {
  const auto a = parse_ranking("[3, 1, 7]", 3, 10);
  EXPECT_EQ(a.element_ids, (std::vector<int>{3, 1, 7}));
  EXPECT_TRUE(a.warnings.empty());

  const auto b = parse_ranking("[3, 3, 1]", 3, 10);
  EXPECT_EQ(b.element_ids, (std::vector<int>{3, 1}));
  EXPECT_TRUE(b.has(RankedPrediction::Warning::DuplicatesRemoved));
  EXPECT_TRUE(b.has(RankedPrediction::Warning::Short));

  const auto c = parse_ranking("lines 99 and 2", 3, 10);
  EXPECT_EQ(c.element_ids, std::vector<int>{2});
  EXPECT_TRUE(c.has(RankedPrediction::Warning::OutOfRangeDropped));

  const auto d = parse_ranking("Answer: [5, 4, 3, 2]", 2, 10);
  EXPECT_EQ(d.element_ids, (std::vector<int>{5, 4}));
  EXPECT_TRUE(d.has(RankedPrediction::Warning::Truncated));

  EXPECT_EQ(parse_ranking("see line 1 [] then [4, 2]", 2, 10).element_ids, (std::vector<int>{4, 2}));
  EXPECT_EQ(parse_ranking("[-2, 3]", 2, 10).element_ids, std::vector<int>{3});
  EXPECT_EQ(parse_ranking("[99999999999999999999999, 1]", 2, 10).element_ids, std::vector<int>{1});
  EXPECT_THROW(parse_ranking("no numbers", 1, 10), Error);
  EXPECT_THROW(parse_ranking("[0, 11]", 1, 10), Error);
}

TEST(ParseRanking, RandomTextKeepsInvariants) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    for (std::size_t i = 0, n = rng() % 40; i < n; ++i) {
      const char alphabet[] = "0123456789[], -x\n";
      s.push_back(alphabet[rng() % (sizeof alphabet - 1)]);
    }
    const std::size_t k = 1 + rng() % 5, max_id = 1 + rng() % 12;
    try {
      const auto p = parse_ranking(s, k, max_id);
      EXPECT_FALSE(p.element_ids.empty());
      EXPECT_LE(p.element_ids.size(), k);
      std::set<int> seen;
      for (int id : p.element_ids) {
        EXPECT_GE(id, 1);
        EXPECT_LE(id, static_cast<int>(max_id));
        EXPECT_TRUE(seen.insert(id).second);
      }
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Unparseable);
    }
  }
}

TEST(TemplateKind, ParseNames) {
  for (auto k : {TemplateKind::Baseline, TemplateKind::AnnotationFree, TemplateKind::Directive, TemplateKind::NaiveRag}) {
    EXPECT_EQ(parse_template_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_template_kind("fancy"), Error);
}
