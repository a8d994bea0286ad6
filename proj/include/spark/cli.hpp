// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "spark/corpus.hpp"

namespace spark::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailures = 1;
inline constexpr int kExitUsage = 2;

/// Pipeline, embedder and tokenizer identities.
std::string version_string();

/// Raw record as accepted by `ingest` and `localize --query`: `code` (string)
/// or `lines` (array), `error_message`, `failure_ts`, optional `id` and
/// `meta`. Throws Error{MalformedRecord}.
RawTestCase raw_from_json(const nlohmann::json& j, const std::string& fallback_id);

/// Entry point of the `spark` binary. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spark::cli
