// SPDX-License-Identifier: Apache-2.0
#include "spark/http_transport.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "spark/error.hpp"

namespace spark::http {

Endpoint parse_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, "endpoint '" + std::string(url) + "' is not an absolute URL");
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::InvalidArgument, "unsupported scheme in '" + std::string(url) + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  if (path_start == std::string_view::npos) {
    ep.scheme_host_port = std::string(url);
    ep.path = "/";
  } else {
    ep.scheme_host_port = std::string(url.substr(0, path_start));
    ep.path = std::string(url.substr(path_start));
  }
  if (ep.scheme_host_port.size() <= scheme_end + 3) {
    throw Error(ErrorCode::InvalidArgument, "missing host in '" + std::string(url) + "'");
  }
  return ep;
}

nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body, const std::string& bearer_token,
                         const RetryPolicy& retry) {
  httplib::Client client(endpoint.scheme_host_port);
  const auto timeout = std::chrono::milliseconds(retry.timeout_ms);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                static_cast<time_t>((timeout.count() % 1000) * 1000));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                          static_cast<time_t>((timeout.count() % 1000) * 1000));
  httplib::Headers headers;
  if (!bearer_token.empty()) headers.emplace("Authorization", "Bearer " + bearer_token);
  const std::string payload = body.dump();

  double backoff = retry.initial_backoff_ms;
  std::string last_error;
  bool rate_limited = false;
  for (int attempt = 0; attempt <= retry.max_retries; ++attempt) {
    if (attempt > 0 && backoff > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(backoff)));
      backoff *= retry.backoff_multiplier;
    }
    auto res = client.Post(endpoint.path, headers, payload, "application/json");
    if (!res) {
      last_error = "request to " + endpoint.scheme_host_port + endpoint.path + " failed: " +
                   httplib::to_string(res.error());
      rate_limited = false;
      continue;
    }
    if (res->status == 429) {
      last_error = "HTTP 429 from " + endpoint.scheme_host_port;
      rate_limited = true;
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + " from " + endpoint.scheme_host_port;
      rate_limited = false;
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorCode::TransportError,
                  "HTTP " + std::to_string(res->status) + " from " + endpoint.scheme_host_port + ": " + res->body);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::TransportError, std::string("invalid JSON reply: ") + e.what());
    }
  }
  const std::string detail = last_error + " (after " + std::to_string(retry.max_retries) + " retries)";
  throw Error(rate_limited ? ErrorCode::RateLimited : ErrorCode::TransportError, detail);
}

std::string getenv_or_empty(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  return v ? std::string(v) : std::string();
}

}  // namespace spark::http
