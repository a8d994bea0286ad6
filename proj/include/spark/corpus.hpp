// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace spark {

/// A failure instant. `epoch_ms` is UTC and gives the total order used by the
/// temporal filtering policies; `text` is the string as ingested.
struct Timestamp {
  std::int64_t epoch_ms = 0;
  std::string text;

  bool operator==(const Timestamp&) const = default;
};

/// Parses `YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM|+HHMM)`. A space is
/// accepted in place of `T`. Throws Error{BadTimestamp}.
Timestamp parse_timestamp(std::string_view s);

struct RawTestCase {
  std::string id;
  std::vector<std::string> raw_lines;
  std::string error_message;
  std::string failure_ts;
  std::optional<std::vector<std::string>> repaired_lines;
  nlohmann::json meta = nlohmann::json::object();
};

struct TestCase {
  std::string id;
  std::vector<std::string> lines;               // non-blank, 1-based in all APIs
  std::vector<std::size_t> original_line_map;   // [i-1] = raw 1-based index of line i
  std::string error_message;
  Timestamp failure_ts;
  std::vector<int> faulty_lines;                // sorted, unique, 1-based
  nlohmann::json meta = nlohmann::json::object();

  bool labeled() const { return !faulty_lines.empty(); }
  bool operator==(const TestCase&) const = default;
};

struct FaultLabel {
  std::string test_id;
  std::vector<int> faulty_lines;
  std::size_t modified_count = 0;
};

/// Ordered collection of test cases with unique ids.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<TestCase> cases);

  /// Throws Error{DuplicateId}.
  void add(TestCase tc);

  const TestCase* find(std::string_view id) const;
  TestCase* find_mutable(std::string_view id);
  /// Throws Error{InvalidArgument} for unknown ids.
  const TestCase& at(std::string_view id) const;

  std::size_t size() const { return cases_.size(); }
  bool empty() const { return cases_.empty(); }
  const std::vector<TestCase>& cases() const { return cases_; }
  auto begin() const { return cases_.begin(); }
  auto end() const { return cases_.end(); }

  bool operator==(const Corpus& other) const { return cases_ == other.cases_; }

 private:
  std::vector<TestCase> cases_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Drops whitespace-only lines, keeps everything else (comments included)
/// verbatim. Throws Error{AllLinesBlank} or Error{BadTimestamp}.
TestCase preprocess(const RawTestCase& raw);

/// Lines of `faulty` that an LCS line diff deletes or replaces. Lines that
/// only exist in `repaired` are ignored.
FaultLabel label_from_diff(const TestCase& faulty, const TestCase& repaired);

/// Ids whose modified_count exceeds mean + 3 sigma (population sigma).
std::vector<std::string> flag_outliers(std::span<const FaultLabel> labels);

using ContentKey = std::function<std::string(const TestCase&)>;

/// SHA-256 over the lines and the error message.
std::string default_content_key(const TestCase& tc);

/// Keeps the first case for each key, preserving input order.
Corpus dedup(const Corpus& corpus, const ContentKey& key = default_content_key);

nlohmann::json to_json(const TestCase& tc);
/// Throws Error{MalformedRecord}.
TestCase test_case_from_json(const nlohmann::json& j);

/// JSON Lines, one record per case, sorted by id.
void write_corpus(std::ostream& out, const Corpus& corpus);
/// Throws Error{MalformedRecord} (with the 1-based line number) or
/// Error{DuplicateId}.
Corpus read_corpus(std::istream& in);

void save_corpus(const std::filesystem::path& path, const Corpus& corpus);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace spark
