// SPDX-License-Identifier: Apache-2.0
#include "spark/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "spark/error.hpp"
#include "spark/file_io.hpp"
#include "spark/hashing.hpp"
#include "spark/text.hpp"

namespace spark {

namespace {

bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > s.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  std::from_chars(s.data() + pos, s.data() + pos + len, out);
  return true;
}

}  // namespace

Timestamp parse_timestamp(std::string_view s) {
  auto fail = [&]() -> Timestamp {
    throw Error(ErrorCode::BadTimestamp, "cannot parse '" + std::string(s) + "'");
  };
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!read_int(s, 0, 4, year) || s.size() < 19 || s[4] != '-' || !read_int(s, 5, 2, month) ||
      s[7] != '-' || !read_int(s, 8, 2, day) || (s[10] != 'T' && s[10] != ' ' && s[10] != 't') ||
      !read_int(s, 11, 2, hour) || s[13] != ':' || !read_int(s, 14, 2, minute) || s[16] != ':' ||
      !read_int(s, 17, 2, second)) {
    return fail();
  }
  std::size_t pos = 19;
  std::int64_t millis = 0;
  if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
    ++pos;
    std::size_t digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits < 3) millis = millis * 10 + (s[pos] - '0');
      ++digits;
      ++pos;
    }
    if (digits == 0) return fail();
    for (std::size_t d = digits; d < 3; ++d) millis *= 10;
  }
  int offset_minutes = 0;
  if (pos < s.size() && (s[pos] == 'Z' || s[pos] == 'z')) {
    ++pos;
  } else if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
    const int sign = s[pos] == '-' ? -1 : 1;
    ++pos;
    int oh = 0, om = 0;
    if (!read_int(s, pos, 2, oh)) return fail();
    pos += 2;
    if (pos < s.size() && s[pos] == ':') ++pos;
    if (!read_int(s, pos, 2, om)) return fail();
    pos += 2;
    if (oh > 23 || om > 59) return fail();
    offset_minutes = sign * (oh * 60 + om);
  } else {
    return fail();
  }
  if (pos != s.size()) return fail();

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) return fail();
  const auto days = sys_days{ymd}.time_since_epoch();
  std::int64_t ms = duration_cast<milliseconds>(days).count();
  ms += ((static_cast<std::int64_t>(hour) * 60 + minute) * 60 + second) * 1000 + millis;
  ms -= static_cast<std::int64_t>(offset_minutes) * 60 * 1000;
  return Timestamp{ms, std::string(s)};
}

Corpus::Corpus(std::vector<TestCase> cases) {
  cases_.reserve(cases.size());
  for (auto& tc : cases) add(std::move(tc));
}

void Corpus::add(TestCase tc) {
  if (index_.count(tc.id)) throw Error(ErrorCode::DuplicateId, tc.id);
  index_.emplace(tc.id, cases_.size());
  cases_.push_back(std::move(tc));
}

const TestCase* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &cases_[it->second];
}

TestCase* Corpus::find_mutable(std::string_view id) {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &cases_[it->second];
}

const TestCase& Corpus::at(std::string_view id) const {
  const TestCase* tc = find(id);
  if (!tc) throw Error(ErrorCode::InvalidArgument, "unknown test id '" + std::string(id) + "'");
  return *tc;
}

TestCase preprocess(const RawTestCase& raw) {
  TestCase tc;
  tc.id = raw.id;
  tc.error_message = raw.error_message;
  tc.meta = raw.meta.is_null() ? nlohmann::json::object() : raw.meta;
  tc.failure_ts = parse_timestamp(raw.failure_ts);
  for (std::size_t i = 0; i < raw.raw_lines.size(); ++i) {
    if (text::is_blank(raw.raw_lines[i])) continue;
    tc.lines.push_back(raw.raw_lines[i]);
    tc.original_line_map.push_back(i + 1);
  }
  if (tc.lines.empty()) throw Error(ErrorCode::AllLinesBlank, raw.id);
  return tc;
}

FaultLabel label_from_diff(const TestCase& faulty, const TestCase& repaired) {
  const auto& a = faulty.lines;
  const auto& b = repaired.lines;

  // Common prefix and suffix are always matched; the LCS table only covers
  // the differing middle.
  std::size_t lo = 0;
  while (lo < a.size() && lo < b.size() && a[lo] == b[lo]) ++lo;
  std::size_t hi_a = a.size(), hi_b = b.size();
  while (hi_a > lo && hi_b > lo && a[hi_a - 1] == b[hi_b - 1]) {
    --hi_a;
    --hi_b;
  }
  const std::size_t n = hi_a - lo, m = hi_b - lo;

  FaultLabel label;
  label.test_id = faulty.id;
  if (n > 0) {
    // suffix[i][j] = LCS length of a[lo+i..hi_a) and b[lo+j..hi_b)
    std::vector<std::uint32_t> suffix((n + 1) * (m + 1), 0);
    auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return suffix[i * (m + 1) + j]; };
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = m; j-- > 0;) {
        at(i, j) = a[lo + i] == b[lo + j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
      }
    }
    std::size_t i = 0, j = 0;
    while (i < n) {
      if (j < m && a[lo + i] == b[lo + j] && at(i, j) == at(i + 1, j + 1) + 1) {
        ++i;
        ++j;
      } else if (j >= m || at(i + 1, j) >= at(i, j + 1)) {
        label.faulty_lines.push_back(static_cast<int>(lo + i + 1));
        ++i;
      } else {
        ++j;
      }
    }
  }
  label.modified_count = label.faulty_lines.size();
  return label;
}

std::vector<std::string> flag_outliers(std::span<const FaultLabel> labels) {
  std::vector<std::string> flagged;
  if (labels.size() < 2) return flagged;
  double mean = 0.0;
  for (const auto& l : labels) mean += static_cast<double>(l.modified_count);
  mean /= static_cast<double>(labels.size());
  double var = 0.0;
  for (const auto& l : labels) {
    const double d = static_cast<double>(l.modified_count) - mean;
    var += d * d;
  }
  var /= static_cast<double>(labels.size());
  const double threshold = mean + 3.0 * std::sqrt(var);
  for (const auto& l : labels) {
    if (static_cast<double>(l.modified_count) > threshold) flagged.push_back(l.test_id);
  }
  return flagged;
}

std::string default_content_key(const TestCase& tc) {
  std::string buf = text::join(tc.lines, "\n");
  buf.push_back('\0');
  buf.append(tc.error_message);
  return hashing::sha256_hex(buf);
}

Corpus dedup(const Corpus& corpus, const ContentKey& key) {
  Corpus out;
  std::unordered_set<std::string> seen;
  for (const auto& tc : corpus) {
    if (seen.insert(key(tc)).second) out.add(tc);
  }
  return out;
}

nlohmann::json to_json(const TestCase& tc) {
  return nlohmann::json{{"id", tc.id},
                        {"lines", tc.lines},
                        {"error_message", tc.error_message},
                        {"failure_ts", tc.failure_ts.text},
                        {"faulty_lines", tc.faulty_lines},
                        {"original_line_map", tc.original_line_map},
                        {"meta", tc.meta}};
}

TestCase test_case_from_json(const nlohmann::json& j) {
  auto fail = [](const std::string& why) -> TestCase { throw Error(ErrorCode::MalformedRecord, why); };
  if (!j.is_object()) return fail("record is not an object");
  for (const char* field : {"id", "lines", "error_message", "failure_ts"}) {
    if (!j.contains(field)) return fail(std::string("missing field '") + field + "'");
  }
  TestCase tc;
  try {
    tc.id = j.at("id").get<std::string>();
    tc.lines = j.at("lines").get<std::vector<std::string>>();
    tc.error_message = j.at("error_message").get<std::string>();
    tc.failure_ts = parse_timestamp(j.at("failure_ts").get<std::string>());
    if (j.contains("faulty_lines")) tc.faulty_lines = j.at("faulty_lines").get<std::vector<int>>();
    if (j.contains("original_line_map")) {
      tc.original_line_map = j.at("original_line_map").get<std::vector<std::size_t>>();
    } else {
      for (std::size_t i = 1; i <= tc.lines.size(); ++i) tc.original_line_map.push_back(i);
    }
    if (j.contains("meta")) tc.meta = j.at("meta");
  } catch (const nlohmann::json::exception& e) {
    return fail(e.what());
  } catch (const Error& e) {
    return fail(e.what());
  }
  if (tc.id.empty()) return fail("empty id");
  if (tc.lines.empty()) return fail("no lines");
  for (const auto& l : tc.lines) {
    if (text::is_blank(l)) return fail("blank line in preprocessed record '" + tc.id + "'");
  }
  if (tc.original_line_map.size() != tc.lines.size()) return fail("original_line_map size mismatch");
  for (std::size_t i = 0; i < tc.original_line_map.size(); ++i) {
    if (tc.original_line_map[i] == 0 || (i > 0 && tc.original_line_map[i] <= tc.original_line_map[i - 1])) {
      return fail("original_line_map is not strictly increasing");
    }
  }
  std::sort(tc.faulty_lines.begin(), tc.faulty_lines.end());
  tc.faulty_lines.erase(std::unique(tc.faulty_lines.begin(), tc.faulty_lines.end()), tc.faulty_lines.end());
  for (int f : tc.faulty_lines) {
    if (f < 1 || static_cast<std::size_t>(f) > tc.lines.size()) {
      return fail("faulty line " + std::to_string(f) + " out of range in '" + tc.id + "'");
    }
  }
  return tc;
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  std::vector<const TestCase*> sorted;
  for (const auto& tc : corpus) sorted.push_back(&tc);
  std::sort(sorted.begin(), sorted.end(), [](const TestCase* a, const TestCase* b) { return a->id < b->id; });
  for (const auto* tc : sorted) out << to_json(*tc).dump() << '\n';
}

Corpus read_corpus(std::istream& in) {
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::is_blank(line)) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(lineno) + ": " + e.what());
    }
    TestCase tc;
    try {
      tc = test_case_from_json(j);
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(lineno) + ": " + e.what());
    }
    if (corpus.find(tc.id)) {
      throw Error(ErrorCode::DuplicateId, "'" + tc.id + "' at line " + std::to_string(lineno));
    }
    corpus.add(std::move(tc));
  }
  return corpus;
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ostringstream ss;
  write_corpus(ss, corpus);
  io::write_file_atomic(path, ss.str());
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::istringstream ss(io::read_file(path));
  return read_corpus(ss);
}

}  // namespace spark
