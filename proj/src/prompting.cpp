// SPDX-License-Identifier: Apache-2.0
#include "spark/prompting.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "spark/error.hpp"
#include "spark/text.hpp"

namespace spark {

TemplateKind parse_template_kind(std::string_view name) {
  if (name == "baseline") return TemplateKind::Baseline;
  if (name == "annotation-free") return TemplateKind::AnnotationFree;
  if (name == "directive") return TemplateKind::Directive;
  if (name == "naive-rag") return TemplateKind::NaiveRag;
  throw Error(ErrorCode::InvalidArgument, "unknown template '" + std::string(name) + "'");
}

std::string_view to_string(TemplateKind kind) {
  switch (kind) {
    case TemplateKind::Baseline: return "baseline";
    case TemplateKind::AnnotationFree: return "annotation-free";
    case TemplateKind::Directive: return "directive";
    case TemplateKind::NaiveRag: return "naive-rag";
  }
  return "baseline";
}

namespace {

bool is_word_byte(unsigned char c) { return c >= 0x80 || std::isalnum(c) || c == '_'; }

bool is_space_byte(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

}  // namespace

std::size_t HeuristicTokenizer::count(std::string_view text) const {
  std::size_t tokens = 0;
  bool in_word = false;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      if (!in_word) ++tokens;
      in_word = true;
    } else {
      in_word = false;
      if (!is_space_byte(c)) ++tokens;
    }
  }
  return tokens;
}

std::size_t count_tokens(std::string_view text) { return HeuristicTokenizer().count(text); }

std::size_t char_count(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string output_template(std::size_t k) {
  std::string out = "[";
  for (std::size_t i = 1; i <= k; ++i) {
    if (i > 1) out += ", ";
    out += "ID_" + std::to_string(i);
  }
  return out + "]";
}

std::string render_test_code(const AnnotatedTest& at, bool inline_annotations) {
  std::string out;
  for (std::size_t i = 0; i < at.base.lines.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (i) out.push_back('\n');
    out += std::to_string(id) + ": " + at.base.lines[i];
    if (inline_annotations && at.is_annotated(id)) out += " " + at.message;
  }
  return out;
}

namespace {

std::string numbered(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += std::to_string(i + 1) + ": " + lines[i];
  }
  return out;
}

std::string id_list(const std::vector<int>& ids) {
  std::string out = "[";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(ids[i]);
  }
  return out + "]";
}

struct Slots {
  std::string lang;
  std::string element;
  std::string id_name;
  std::size_t k;
  std::size_t max_id;
};

std::string task_description(const Slots& s, std::string_view extra) {
  std::ostringstream o;
  o << "## Task Description\n"
    << "As an expert software engineer and tester, your mission is to localize faults in " << s.lang
    << " test scripts at the " << s.element << " level. You will be provided with the test scripts and the error "
    << "message caused by the test failure. Your goal is to identify " << s.k << " " << s.element
    << "s that are most likely responsible for the failure and require modification." << extra << "\n";
  return o.str();
}

std::string inputs(const Slots& s, const std::string& err_msg, const std::string& code) {
  std::ostringstream o;
  o << "## Inputs\n"
    << "### Error Message\n"
    << "Here is the error message caused by the test failure:\n"
    << err_msg << "\n"
    << "### Code\n"
    << "Below are the " << s.lang << " test scripts:\n"
    << code << "\n";
  return o.str();
}

std::string return_instruction(const Slots& s) {
  std::ostringstream o;
  o << "Return a list of faulty " << s.element << "s and their " << s.id_name
    << "s, without any additional explanation. Note that the list of " << s.element << "s and their " << s.id_name
    << "s should be within the range 1 to " << s.max_id << " and the size of the list must be exactly " << s.k
    << ". The list should be also in descending order of likelihood of containing the fault, with the most "
    << "suspicious " << s.element << " first and the least suspicious " << s.element
    << " last. Ensure that your response is strictly in the specified format. The output should follow this "
    << "format: " << output_template(s.k);
  return o.str();
}

std::string standard_instructions(const Slots& s, std::string_view examine_extra) {
  std::ostringstream o;
  o << "## Task Instructions\n"
    << "1. Carefully examine the provided test scripts and the associated error message" << examine_extra << ".\n"
    << "2. Identify the " << s.k << " " << s.element << "s that are most likely to contain the faults.\n"
    << "3. " << return_instruction(s) << "\n";
  return o.str();
}

}  // namespace

PromptBundle render_prompt(const AnnotatedTest& at, const PromptOptions& options, const PromptContext& context,
                           const Tokenizer& tokenizer) {
  const std::size_t n = at.base.lines.size();
  if (options.k == 0 || options.k > n) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(options.k) + " for a test with " + std::to_string(n) +
                                          " lines ('" + at.base.id + "')");
  }
  const Slots s{options.programming_language, "line", "line number", options.k, n};

  TemplateKind kind = options.kind;
  if (kind == TemplateKind::AnnotationFree && context.patterns.empty()) kind = TemplateKind::Baseline;
  if (kind == TemplateKind::NaiveRag && context.retrieved.empty()) kind = TemplateKind::Baseline;

  std::string text;
  switch (kind) {
    case TemplateKind::Baseline: {
      text = task_description(s, "") + inputs(s, at.base.error_message, render_test_code(at, true)) +
             standard_instructions(s, "");
      break;
    }
    case TemplateKind::AnnotationFree: {
      std::string extra_ctx = "## Additional Context\nBelow is a set of faulty lines that caused a similar error "
                              "message in a similar faulty " + s.lang + " test case:\n";
      for (const auto& p : context.patterns.patterns) extra_ctx += p + "\n";
      text = task_description(s, " To reason about this faulty test case, you will also be provided with a set of "
                                 "faulty lines retrieved from similar test scripts.") +
             inputs(s, at.base.error_message, render_test_code(at, false)) + extra_ctx +
             standard_instructions(s, " and the similar faulty lines provided as additional context");
      break;
    }
    case TemplateKind::Directive: {
      std::ostringstream o;
      o << "## Task Instructions\n"
        << "1. Identify " << s.k << " " << s.element
        << "s in the following test script that are likely to contain the fault.\n"
        << "2. You must pay attention to the lines marked with '" << at.message
        << "' and start with investigating them first.\n"
        << "3. " << return_instruction(s) << "\n";
      text = task_description(s, "") + o.str() + inputs(s, at.base.error_message, render_test_code(at, true));
      break;
    }
    case TemplateKind::NaiveRag: {
      std::string extra_ctx;
      for (std::size_t i = 0; i < context.retrieved.size(); ++i) {
        const TestCase& rc = context.retrieved[i];
        extra_ctx += "## Similar Faulty Test Case " + std::to_string(i + 1) + "\n";
        extra_ctx += "Below is a similar faulty " + s.lang +
                     " test case retrieved from previously diagnosed failures, with its error message and the "
                     "line numbers of its faulty lines.\n";
        extra_ctx += "### Error Message\n" + rc.error_message + "\n";
        extra_ctx += "### Code\n" + numbered(rc.lines) + "\n";
        extra_ctx += "### Faulty Lines\n" + id_list(rc.faulty_lines) + "\n";
      }
      text = task_description(s, " To reason about this faulty test case, you will also be provided with similar "
                                 "faulty test cases retrieved from previously diagnosed failures.") +
             inputs(s, at.base.error_message, render_test_code(at, false)) + extra_ctx +
             standard_instructions(s, " and the similar faulty test cases provided as additional context");
      break;
    }
  }

  PromptBundle bundle;
  bundle.query_id = at.base.id;
  bundle.k = options.k;
  bundle.max_element_id = n;
  bundle.granularity = options.granularity;
  bundle.char_count = char_count(text);
  bundle.token_count = tokenizer.count(text);
  bundle.text = std::move(text);
  return bundle;
}

bool RankedPrediction::has(Warning w) const {
  return std::find(warnings.begin(), warnings.end(), w) != warnings.end();
}

std::string_view to_string(RankedPrediction::Warning w) {
  switch (w) {
    case RankedPrediction::Warning::Truncated: return "truncated";
    case RankedPrediction::Warning::DuplicatesRemoved: return "duplicates-removed";
    case RankedPrediction::Warning::OutOfRangeDropped: return "out-of-range-dropped";
    case RankedPrediction::Warning::Short: return "short";
  }
  return "unknown";
}

namespace {

/// Integers in [begin, end) in reading order. A '-' directly before the
/// digits makes the value negative; values saturate at INT64 bounds.
std::vector<long long> scan_integers(std::string_view text) {
  std::vector<long long> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] >= '0' && text[i] <= '9') {
      const bool negative = i > 0 && text[i - 1] == '-';
      long long v = 0;
      bool saturated = false;
      while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
        if (!saturated) {
          if (v > (std::numeric_limits<long long>::max() - (text[i] - '0')) / 10) {
            saturated = true;
            v = std::numeric_limits<long long>::max();
          } else {
            v = v * 10 + (text[i] - '0');
          }
        }
        ++i;
      }
      out.push_back(negative ? -v : v);
    } else {
      ++i;
    }
  }
  return out;
}

}  // namespace

RankedPrediction parse_ranking(std::string_view text, std::size_t k, std::size_t max_element_id) {
  std::vector<long long> raw;
  for (std::size_t open = text.find('['); open != std::string_view::npos; open = text.find('[', open + 1)) {
    const std::size_t close = text.find(']', open + 1);
    if (close == std::string_view::npos) break;
    raw = scan_integers(text.substr(open + 1, close - open - 1));
    if (!raw.empty()) break;
  }
  if (raw.empty()) raw = scan_integers(text);

  RankedPrediction pred;
  std::unordered_set<long long> seen;
  bool out_of_range = false, duplicates = false;
  for (long long v : raw) {
    if (v < 1 || static_cast<unsigned long long>(v) > max_element_id) {
      out_of_range = true;
      continue;
    }
    if (!seen.insert(v).second) {
      duplicates = true;
      continue;
    }
    pred.element_ids.push_back(static_cast<int>(v));
  }
  if (out_of_range) pred.warnings.push_back(RankedPrediction::Warning::OutOfRangeDropped);
  if (duplicates) pred.warnings.push_back(RankedPrediction::Warning::DuplicatesRemoved);
  if (pred.element_ids.size() > k) {
    pred.element_ids.resize(k);
    pred.warnings.push_back(RankedPrediction::Warning::Truncated);
  }
  if (pred.element_ids.empty()) {
    throw Error(ErrorCode::Unparseable, "no valid element id in response");
  }
  if (pred.element_ids.size() < k) pred.warnings.push_back(RankedPrediction::Warning::Short);
  return pred;
}

}  // namespace spark
