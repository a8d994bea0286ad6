// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spark {

enum class ErrorCode {
  AllLinesBlank,
  BadTimestamp,
  MalformedRecord,
  DuplicateId,
  InvalidWindow,
  DimensionMismatch,
  MissingEmbedding,
  EmbedderFailure,
  UnlabeledCase,
  EmptyPatternSet,
  KTooLarge,
  TransportError,
  RateLimited,
  EmptyResponse,
  FixtureMissing,
  Unparseable,
  EmptyRun,
  EmptyAxis,
  MissingRepairedVersion,
  Leakage,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. `code()` identifies the failure class, `what()`
/// carries the human readable detail (ids, line numbers, stage names).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace spark
