// SPDX-License-Identifier: Apache-2.0
#include "spark/unitmap.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "spark/error.hpp"
#include "spark/text.hpp"

namespace spark {

Granularity parse_granularity(std::string_view name) {
  if (name == "line") return Granularity::Line;
  if (name == "statement") return Granularity::Statement;
  if (name == "block") return Granularity::Block;
  throw Error(ErrorCode::InvalidArgument, "unknown granularity '" + std::string(name) + "'");
}

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::Line: return "line";
    case Granularity::Statement: return "statement";
    case Granularity::Block: return "block";
  }
  return "line";
}

namespace {

/// Net bracket depth change of one physical line, ignoring quoted text and
/// trailing comments.
int bracket_delta(std::string_view line) {
  int delta = 0;
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quote) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    switch (c) {
      case '\'':
      case '"': quote = c; break;
      case '#': return delta;
      case '(':
      case '[':
      case '{': ++delta; break;
      case ')':
      case ']':
      case '}': --delta; break;
      default: break;
    }
  }
  return delta;
}

UnitMap from_groups(std::string mapper, const std::vector<std::pair<int, int>>& spans, std::size_t n) {
  UnitMap um;
  um.mapper = std::move(mapper);
  um.unit_spans = spans;
  um.line_to_unit.assign(n, 0);
  for (std::size_t u = 0; u < spans.size(); ++u) {
    for (int l = spans[u].first; l <= spans[u].second; ++l) um.line_to_unit[static_cast<std::size_t>(l - 1)] = static_cast<int>(u + 1);
  }
  return um;
}

std::size_t indent_of(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return i;
}

std::string first_token(std::string_view line) {
  auto s = text::trim_left(line);
  std::size_t i = 0;
  while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
  std::string tok(s.substr(0, i));
  if (tok == "async") return first_token(s.substr(i));
  return tok;
}

bool is_header(std::string_view line) {
  static constexpr std::array<std::string_view, 11> kHeaders = {
      "if", "elif", "else", "for", "while", "try", "except", "finally", "with", "def", "class"};
  const std::string tok = first_token(line);
  return std::find(kHeaders.begin(), kHeaders.end(), tok) != kHeaders.end();
}

}  // namespace

UnitMap map_statements(const TestCase& tc) {
  const std::size_t n = tc.lines.size();
  std::vector<std::pair<int, int>> spans;
  int depth = 0;
  int start = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string_view line = tc.lines[i];
    depth = std::max(0, depth + bracket_delta(line));
    const bool continued = !text::trim_right(line).empty() && text::trim_right(line).back() == '\\';
    if (depth == 0 && !continued) {
      spans.emplace_back(start, static_cast<int>(i + 1));
      start = static_cast<int>(i + 2);
    }
  }
  UnitMap um;
  bool unterminated = false;
  if (static_cast<std::size_t>(start) <= n) {
    spans.emplace_back(start, static_cast<int>(n));
    unterminated = true;
  }
  um = from_groups("statement", spans, n);
  if (unterminated) um.warnings.push_back("unbalanced brackets or continuation at end of file");
  return um;
}

UnitMap map_blocks(const TestCase& tc) {
  const UnitMap statements = map_statements(tc);
  std::vector<std::pair<int, int>> spans;
  std::size_t prev_indent = 0;
  for (std::size_t s = 0; s < statements.unit_spans.size(); ++s) {
    const auto [first, last] = statements.unit_spans[s];
    const std::string_view head = tc.lines[static_cast<std::size_t>(first - 1)];
    const std::size_t indent = indent_of(head);
    if (s == 0 || is_header(head) || indent != prev_indent) {
      spans.emplace_back(first, last);
    } else {
      spans.back().second = last;
    }
    prev_indent = indent;
  }
  UnitMap um = from_groups("approx-block", spans, tc.lines.size());
  um.warnings = statements.warnings;
  return um;
}

UnitMap map_lines(const TestCase& tc) {
  std::vector<std::pair<int, int>> spans;
  for (std::size_t i = 1; i <= tc.lines.size(); ++i) spans.emplace_back(static_cast<int>(i), static_cast<int>(i));
  return from_groups("line", spans, tc.lines.size());
}

UnitMap map_units(const TestCase& tc, Granularity g) {
  switch (g) {
    case Granularity::Line: return map_lines(tc);
    case Granularity::Statement: return map_statements(tc);
    case Granularity::Block: return map_blocks(tc);
  }
  return map_lines(tc);
}

std::vector<int> lift_ranking(const std::vector<int>& line_ids, const UnitMap& um) {
  std::vector<int> units;
  for (int line : line_ids) {
    const int u = um.unit_of(line);
    if (std::find(units.begin(), units.end(), u) == units.end()) units.push_back(u);
  }
  return units;
}

std::set<int> lift_ground_truth(const std::vector<int>& faulty_lines, const UnitMap& um) {
  std::set<int> units;
  for (int line : faulty_lines) units.insert(um.unit_of(line));
  return units;
}

nlohmann::json unit_map_to_json(const UnitMap& um) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t u = 0; u < um.unit_spans.size(); ++u) {
    j[std::to_string(u + 1)] = {um.unit_spans[u].first, um.unit_spans[u].second};
  }
  return j;
}

}  // namespace spark
