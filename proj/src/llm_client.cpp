// SPDX-License-Identifier: Apache-2.0
#include "spark/llm_client.hpp"

#include <algorithm>
#include <chrono>
#include <set>

#include "spark/error.hpp"
#include "spark/file_io.hpp"
#include "spark/hashing.hpp"
#include "spark/text.hpp"

namespace spark {

namespace {

std::string format_ids(const std::vector<int>& ids) {
  std::string out = "[";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(ids[i]);
  }
  return out + "]";
}

LlmResponse offline_response(const PromptBundle& prompt, std::string text) {
  LlmResponse r;
  r.prompt_tokens = prompt.token_count;
  r.completion_tokens = count_tokens(text);
  r.text = std::move(text);
  return r;
}

}  // namespace

LlmResponse invoke(LlmClient& client, const PromptBundle& prompt) {
  LlmResponse r = client.complete(prompt);
  if (text::is_blank(r.text)) {
    throw Error(ErrorCode::EmptyResponse, client.identity() + " returned no content for '" + prompt.query_id + "'");
  }
  if (r.prompt_tokens == 0) r.prompt_tokens = prompt.token_count;
  if (r.completion_tokens == 0) r.completion_tokens = count_tokens(r.text);
  return r;
}

HttpChatClient::HttpChatClient(Options options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw Error(ErrorCode::InvalidArgument, "LLM endpoint is not configured");
  if (options_.parallelism == 0) options_.parallelism = 1;
  endpoint_ = http::parse_url(options_.endpoint);
}

HttpChatClient HttpChatClient::from_env(std::string model, double temperature, int retries, unsigned parallelism) {
  Options o;
  o.endpoint = http::getenv_or_empty("SPARK_LLM_ENDPOINT");
  o.api_key = http::getenv_or_empty("SPARK_LLM_API_KEY");
  o.model = std::move(model);
  o.temperature = temperature;
  o.parallelism = parallelism;
  o.retry.max_retries = retries;
  return HttpChatClient(std::move(o));
}

LlmResponse HttpChatClient::complete(const PromptBundle& prompt) {
  const nlohmann::json body{{"model", options_.model},
                            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt.text}}})},
                            {"temperature", options_.temperature}};
  const auto start = std::chrono::steady_clock::now();
  const nlohmann::json reply = http::post_json(endpoint_, body, options_.api_key, options_.retry);
  const auto elapsed = std::chrono::steady_clock::now() - start;

  LlmResponse r;
  r.latency_ms = std::chrono::duration<double, std::milli>(elapsed).count();
  try {
    const auto& choices = reply.at("choices");
    if (!choices.is_array() || choices.empty()) {
      throw Error(ErrorCode::EmptyResponse, "no choices in reply");
    }
    const auto& content = choices.at(0).at("message").at("content");
    if (content.is_string()) r.text = content.get<std::string>();
    if (reply.contains("usage") && reply["usage"].is_object()) {
      r.prompt_tokens = reply["usage"].value("prompt_tokens", std::size_t{0});
      r.completion_tokens = reply["usage"].value("completion_tokens", std::size_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::TransportError, std::string("malformed chat completion reply: ") + e.what());
  }
  if (r.text.empty()) throw Error(ErrorCode::EmptyResponse, "empty completion for '" + prompt.query_id + "'");
  return r;
}

std::string fixture_key(const PromptBundle& prompt) { return hashing::sha256_hex(prompt.text); }

ReplayClient ReplayClient::from_file(const std::filesystem::path& path) {
  std::map<std::string, std::string> fixtures;
  try {
    fixtures = nlohmann::json::parse(io::read_file(path)).get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, path.string() + ": " + e.what());
  }
  return ReplayClient(std::move(fixtures));
}

LlmResponse ReplayClient::complete(const PromptBundle& prompt) {
  const auto key = fixture_key(prompt);
  auto it = fixtures_.find(key);
  if (it == fixtures_.end()) {
    throw Error(ErrorCode::FixtureMissing, "no fixture for prompt " + key + " (query '" + prompt.query_id + "')");
  }
  return offline_response(prompt, it->second);
}

LlmResponse RecordingClient::complete(const PromptBundle& prompt) {
  LlmResponse r = inner_.complete(prompt);
  std::lock_guard lock(mu_);
  fixtures_[fixture_key(prompt)] = r.text;
  return r;
}

std::map<std::string, std::string> RecordingClient::fixtures() const {
  std::lock_guard lock(mu_);
  return fixtures_;
}

void RecordingClient::save(const std::filesystem::path& path) const {
  io::write_file_atomic(path, nlohmann::json(fixtures()).dump(2) + "\n");
}

OracleClient OracleClient::from_corpus(const Corpus& corpus) {
  std::map<std::string, std::vector<int>> truth;
  for (const auto& tc : corpus) truth[tc.id] = tc.faulty_lines;
  return OracleClient(std::move(truth));
}

LlmResponse OracleClient::complete(const PromptBundle& prompt) {
  auto it = truth_.find(prompt.query_id);
  std::vector<int> ids = it == truth_.end() ? std::vector<int>{} : it->second;
  if (ids.size() > prompt.k) ids.resize(prompt.k);
  return offline_response(prompt, format_ids(ids));
}

std::vector<int> annotated_ids_in_prompt(std::string_view prompt_text, std::string_view message) {
  std::vector<int> ids;
  for (const auto& line : text::split_lines(prompt_text)) {
    std::size_t digits = 0;
    while (digits < line.size() && line[digits] >= '0' && line[digits] <= '9') ++digits;
    if (digits == 0 || digits > 9 || line.compare(digits, 2, ": ") != 0) continue;
    const std::string_view body(line);
    if (body.size() < message.size() || body.substr(body.size() - message.size()) != message) continue;
    const int id = std::stoi(line.substr(0, digits));
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  return ids;
}

LlmResponse EchoAnnotatedClient::complete(const PromptBundle& prompt) {
  std::vector<int> ids;
  for (int id : annotated_ids_in_prompt(prompt.text, message_)) {
    if (id >= 1 && static_cast<std::size_t>(id) <= prompt.max_element_id) ids.push_back(id);
  }
  std::set<int> used(ids.begin(), ids.end());
  for (int id = 1; ids.size() < prompt.k && static_cast<std::size_t>(id) <= prompt.max_element_id; ++id) {
    if (!used.count(id)) ids.push_back(id);
  }
  if (ids.size() > prompt.k) ids.resize(prompt.k);
  return offline_response(prompt, format_ids(ids));
}

}  // namespace spark
