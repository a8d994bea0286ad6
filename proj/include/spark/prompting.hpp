// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "spark/annotator.hpp"
#include "spark/corpus.hpp"

namespace spark {

enum class TemplateKind {
  Baseline,        // inline annotations, if any
  AnnotationFree,  // no inline annotations; patterns listed as additional context
  Directive,       // instructions first, with an explicit pointer to annotated lines
  NaiveRag,        // whole retrieved test cases appended, no annotations
};

TemplateKind parse_template_kind(std::string_view name);
std::string_view to_string(TemplateKind kind);

/// Counts prompt tokens. Implementations must be deterministic.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::string name() const = 0;
  virtual std::size_t count(std::string_view text) const = 0;
};

/// One token per maximal run of letters/digits/underscore/non-ASCII, plus one
/// per other non-whitespace character.
class HeuristicTokenizer final : public Tokenizer {
 public:
  std::string name() const override { return "heuristic-v1"; }
  std::size_t count(std::string_view text) const override;
};

std::size_t count_tokens(std::string_view text);

/// Unicode scalar count.
std::size_t char_count(std::string_view text);

struct PromptOptions {
  TemplateKind kind = TemplateKind::Baseline;
  std::size_t k = 1;
  std::string granularity = "line";
  std::string programming_language = "Python";
};

/// Retrieval output a template may need besides the annotated query.
struct PromptContext {
  FaultPatternSet patterns;          // AnnotationFree
  std::vector<TestCase> retrieved;   // NaiveRag; faulty_lines are rendered
};

struct PromptBundle {
  std::string query_id;
  std::string text;
  std::size_t k = 0;
  std::size_t max_element_id = 0;
  std::string granularity;
  std::size_t char_count = 0;
  std::size_t token_count = 0;
};

/// `[ID_1, ID_2, ..., ID_k]`
std::string output_template(std::size_t k);

/// `<i>: <line>` per line, with " " + message appended to annotated lines
/// when `inline_annotations` is set.
std::string render_test_code(const AnnotatedTest& at, bool inline_annotations);

/// Throws Error{KTooLarge} when k is 0 or exceeds the number of lines.
/// AnnotationFree with no patterns and NaiveRag with no retrieved cases
/// render exactly the Baseline prompt.
PromptBundle render_prompt(const AnnotatedTest& at, const PromptOptions& options, const PromptContext& context = {},
                           const Tokenizer& tokenizer = HeuristicTokenizer());

struct RankedPrediction {
  enum class Warning { Truncated, DuplicatesRemoved, OutOfRangeDropped, Short };

  std::vector<int> element_ids;
  std::vector<Warning> warnings;

  bool has(Warning w) const;
};

std::string_view to_string(RankedPrediction::Warning w);

/// Takes the integers of the first bracketed list that contains any, else
/// every integer in reading order. Drops out-of-range ids, then repeated ids,
/// then truncates to k, recording a warning for each repair. A result shorter
/// than k is kept and flagged. Throws Error{Unparseable} when no valid id
/// remains.
RankedPrediction parse_ranking(std::string_view text, std::size_t k, std::size_t max_element_id);

}  // namespace spark
