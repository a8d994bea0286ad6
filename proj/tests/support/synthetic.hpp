// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "spark/corpus.hpp"

namespace spark::fixtures {

/// "2024-01-01T00:00:00Z" shifted by `seconds`.
std::string iso_ts(std::int64_t seconds);

TestCase make_case(const std::string& id, std::vector<std::string> lines, const std::string& error_message,
                   const std::string& ts, std::vector<int> faulty = {});

/// Corpus of `pairs` twin pairs. Twins share one identical faulty line and
/// differ from each other in a single non-faulty line; distinct pairs use
/// disjoint vocabularies and error messages. Line 1 is never faulty.
struct TwinCorpus {
  Corpus corpus;
  std::map<std::string, std::string> twin_of;
};

TwinCorpus make_twin_corpus(std::size_t pairs = 15, std::uint64_t seed = 7);

/// Random identifier-ish word over a-z.
std::string random_word(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len);

/// Unlabeled random test case with `n` lines.
TestCase random_case(std::mt19937_64& rng, const std::string& id, std::size_t n, std::int64_t ts_seconds);

}  // namespace spark::fixtures
