// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "spark/http_transport.hpp"
#include "spark/prompting.hpp"

namespace spark {

struct LlmResponse {
  std::string text;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
  double latency_ms = 0.0;  // as reported by the client; 0 for offline clients
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual LlmResponse complete(const PromptBundle& prompt) = 0;
  virtual std::string identity() const = 0;
  /// Maximum number of concurrent complete() calls.
  virtual unsigned parallelism() const { return 1; }
};

/// Calls the client, rejects empty replies with Error{EmptyResponse} and
/// fills missing token counts from the local tokenizer.
LlmResponse invoke(LlmClient& client, const PromptBundle& prompt);

/// OpenAI-compatible chat completions client.
class HttpChatClient final : public LlmClient {
 public:
  struct Options {
    std::string endpoint;  // absolute URL of the chat completions route
    std::string api_key;
    std::string model;
    double temperature = 0.0;
    unsigned parallelism = 1;
    http::RetryPolicy retry;
  };

  explicit HttpChatClient(Options options);

  /// Endpoint from SPARK_LLM_ENDPOINT and key from SPARK_LLM_API_KEY.
  static HttpChatClient from_env(std::string model, double temperature, int retries, unsigned parallelism);

  LlmResponse complete(const PromptBundle& prompt) override;
  std::string identity() const override { return "http:" + options_.model; }
  unsigned parallelism() const override { return options_.parallelism; }

 private:
  Options options_;
  http::Endpoint endpoint_;
};

/// Key under which replay fixtures store the response to a prompt.
std::string fixture_key(const PromptBundle& prompt);

/// Answers from a fixture map `sha256(prompt text) -> response text`.
/// Unknown prompts raise Error{FixtureMissing}.
class ReplayClient final : public LlmClient {
 public:
  explicit ReplayClient(std::map<std::string, std::string> fixtures) : fixtures_(std::move(fixtures)) {}
  static ReplayClient from_file(const std::filesystem::path& path);

  LlmResponse complete(const PromptBundle& prompt) override;
  std::string identity() const override { return "replay"; }

 private:
  std::map<std::string, std::string> fixtures_;
};

/// Wraps another client and remembers every exchange in fixture form.
class RecordingClient final : public LlmClient {
 public:
  explicit RecordingClient(LlmClient& inner) : inner_(inner) {}

  LlmResponse complete(const PromptBundle& prompt) override;
  std::string identity() const override { return inner_.identity(); }
  unsigned parallelism() const override { return inner_.parallelism(); }

  std::map<std::string, std::string> fixtures() const;
  void save(const std::filesystem::path& path) const;

 private:
  LlmClient& inner_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> fixtures_;
};

/// Test double that knows the ground truth: replies with the true faulty
/// line ids of the query, ascending.
class OracleClient final : public LlmClient {
 public:
  explicit OracleClient(std::map<std::string, std::vector<int>> truth) : truth_(std::move(truth)) {}
  static OracleClient from_corpus(const Corpus& corpus);

  LlmResponse complete(const PromptBundle& prompt) override;
  std::string identity() const override { return "oracle"; }

 private:
  std::map<std::string, std::vector<int>> truth_;
};

/// Offline stand-in that trusts the annotations: returns the annotated line
/// ids of the query code first, then fills with the remaining ids ascending
/// until k ids are listed.
class EchoAnnotatedClient final : public LlmClient {
 public:
  explicit EchoAnnotatedClient(std::string message = std::string(kAnnotationMessage))
      : message_(std::move(message)) {}

  LlmResponse complete(const PromptBundle& prompt) override;
  std::string identity() const override { return "echo-annotated"; }

 private:
  std::string message_;
};

/// Line ids of `<i>: ...<message>` lines in a rendered prompt.
std::vector<int> annotated_ids_in_prompt(std::string_view prompt_text, std::string_view message);

}  // namespace spark
