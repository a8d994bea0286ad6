// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "spark/corpus.hpp"
#include "spark/prompting.hpp"

namespace spark {

enum class Granularity { Line, Statement, Block };

Granularity parse_granularity(std::string_view name);  // line|statement|block
std::string_view to_string(Granularity g);

/// Partition of a test's lines into contiguous logical units, numbered from 1
/// in order of their first line.
struct UnitMap {
  std::string mapper;                          // "statement" or "approx-block"
  std::vector<int> line_to_unit;               // [i-1] = unit of line i
  std::vector<std::pair<int, int>> unit_spans; // [u-1] = {first, last} line of unit u
  std::vector<std::string> warnings;

  std::size_t unit_count() const { return unit_spans.size(); }
  int unit_of(int line) const { return line_to_unit.at(static_cast<std::size_t>(line - 1)); }
};

/// Joins physical lines into logical statements while brackets are open or
/// a line ends with a backslash. Quotes are tracked per line so brackets in
/// string literals and after '#' comments are ignored; quote state does not
/// carry across lines.
UnitMap map_statements(const TestCase& tc);

/// Groups statements into blocks. A block starts at every control-flow
/// header (if, elif, else, for, while, try, except, finally, with, def,
/// class) and wherever the indentation differs from the previous statement.
UnitMap map_blocks(const TestCase& tc);

/// Line-identity map, used for line granularity.
UnitMap map_lines(const TestCase& tc);

UnitMap map_units(const TestCase& tc, Granularity g);

/// Units of the predicted lines, first occurrence kept.
std::vector<int> lift_ranking(const std::vector<int>& line_ids, const UnitMap& um);

std::set<int> lift_ground_truth(const std::vector<int>& faulty_lines, const UnitMap& um);

/// `{"1": [first, last], ...}`
nlohmann::json unit_map_to_json(const UnitMap& um);

}  // namespace spark
