// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace spark::http {

struct Endpoint {
  std::string scheme_host_port;  // e.g. "http://localhost:8080"
  std::string path;              // e.g. "/v1/chat/completions"
};

/// Splits an absolute http(s) URL. Throws Error{InvalidArgument}.
Endpoint parse_url(std::string_view url);

struct RetryPolicy {
  int max_retries = 3;
  int initial_backoff_ms = 250;
  double backoff_multiplier = 2.0;
  int timeout_ms = 120000;
};

/// POSTs a JSON body and returns the parsed JSON reply.
///
/// Connection failures and 5xx replies are retried; once retries run out they
/// raise Error{TransportError}. HTTP 429 is retried the same way and raises
/// Error{RateLimited}. Other non-2xx statuses fail immediately.
nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body, const std::string& bearer_token,
                         const RetryPolicy& retry);

/// Value of an environment variable, or empty.
std::string getenv_or_empty(const std::string& name);

}  // namespace spark::http
