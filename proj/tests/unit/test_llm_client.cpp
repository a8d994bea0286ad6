// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>

#include "local_server.hpp"
#include "spark/error.hpp"
#include "spark/llm_client.hpp"
#include "synthetic.hpp"

using namespace spark;
using fixtures::iso_ts;
using fixtures::make_case;

namespace {

PromptBundle bundle_for(const AnnotatedTest& at, std::size_t k) {
  PromptOptions o;
  o.k = k;
  return render_prompt(at, o);
}

AnnotatedTest sample(std::vector<int> annotated = {}) {
  AnnotatedTest at;
  at.base = make_case("q", {"a()", "b()", "c()", "d()"}, "err", iso_ts(0), {3});
  at.annotated = std::move(annotated);
  return at;
}

class FixedClient final : public LlmClient {
 public:
  explicit FixedClient(std::string text) : text_(std::move(text)) {}
  LlmResponse complete(const PromptBundle&) override { return {text_, 0, 0, 0.0}; }
  std::string identity() const override { return "fixed"; }

 private:
  std::string text_;
};

http::RetryPolicy fast_retry(int retries) {
  http::RetryPolicy r;
  r.max_retries = retries;
  r.initial_backoff_ms = 0;
  r.timeout_ms = 2000;
  return r;
}

}  // namespace

TEST(Invoke, FillsTokenCountsAndRejectsBlank) {
  const auto p = bundle_for(sample(), 1);
  FixedClient ok("[2]");
  const auto r = invoke(ok, p);
  EXPECT_EQ(r.prompt_tokens, p.token_count);
  EXPECT_EQ(r.completion_tokens, 3u);
  FixedClient blank("  \n");
  try {
    invoke(blank, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyResponse);
  }
}

TEST(ReplayClient, ReturnsFixtureVerbatim) {
  const auto p = bundle_for(sample(), 1);
  ReplayClient replay({{fixture_key(p), "[4]  trailing"}});
  EXPECT_EQ(replay.complete(p).text, "[4]  trailing");
  try {
    replay.complete(bundle_for(sample(), 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FixtureMissing);
  }
}

TEST(RecordingClient, SavedFixturesReplayIdentically) {
  EchoAnnotatedClient echo;
  RecordingClient rec(echo);
  const auto p1 = bundle_for(sample({2}), 1);
  const auto p2 = bundle_for(sample({2}), 3);
  const auto r1 = rec.complete(p1).text;
  const auto r2 = rec.complete(p2).text;
  const auto path = std::filesystem::temp_directory_path() / "spark_fixtures_test.json";
  rec.save(path);
  auto replay = ReplayClient::from_file(path);
  EXPECT_EQ(replay.complete(p1).text, r1);
  EXPECT_EQ(replay.complete(p2).text, r2);
  std::filesystem::remove(path);
}

TEST(OracleClient, ReturnsTruth) {
  Corpus c;
  c.add(make_case("q", {"a()", "b()", "c()", "d()"}, "err", iso_ts(0), {2, 4}));
  auto oracle = OracleClient::from_corpus(c);
  EXPECT_EQ(oracle.complete(bundle_for(sample(), 3)).text, "[2, 4]");
  EXPECT_EQ(oracle.complete(bundle_for(sample(), 1)).text, "[2]");
}

TEST(EchoAnnotatedClient, AnnotatedFirstThenAscendingFill) {
  EchoAnnotatedClient echo;
  EXPECT_EQ(echo.complete(bundle_for(sample({3}), 1)).text, "[3]");
  EXPECT_EQ(echo.complete(bundle_for(sample({3}), 3)).text, "[3, 1, 2]");
  EXPECT_EQ(echo.complete(bundle_for(sample({}), 2)).text, "[1, 2]");
  EXPECT_EQ(annotated_ids_in_prompt("1: x\n12: y # m\nz # m\n", "# m"), std::vector<int>{12});
}

TEST(HttpChatClient, SendsOpenAiShapedRequests) {
  fixtures::LocalServer server;
  nlohmann::json seen;
  std::string auth;
  server.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    const nlohmann::json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "[3, 1]"}}}}}},
                               {"usage", {{"prompt_tokens", 120}, {"completion_tokens", 6}}}};
    res.set_content(reply.dump(), "application/json");
  });
  server.start();

  HttpChatClient::Options o;
  o.endpoint = server.url("/v1/chat/completions");
  o.api_key = "k";
  o.model = "test-model";
  o.retry = fast_retry(0);
  HttpChatClient client(o);
  const auto p = bundle_for(sample(), 2);
  const auto r = invoke(client, p);
  EXPECT_EQ(r.text, "[3, 1]");
  EXPECT_EQ(r.prompt_tokens, 120u);
  EXPECT_EQ(r.completion_tokens, 6u);
  EXPECT_EQ(seen["model"], "test-model");
  EXPECT_EQ(seen["temperature"], 0.0);
  EXPECT_EQ(seen["messages"][0]["role"], "user");
  EXPECT_EQ(seen["messages"][0]["content"], p.text);
  EXPECT_EQ(auth, "Bearer k");
  EXPECT_EQ(client.identity(), "http:test-model");
}

TEST(HttpChatClient, RetriesServerErrorsThenSucceeds) {
  fixtures::LocalServer server;
  std::atomic<int> calls{0};
  server.server().Post("/chat", [&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    res.set_content(R"({"choices":[{"message":{"content":"[1]"}}]})", "application/json");
  });
  server.server().Post("/limited", [&](const httplib::Request&, httplib::Response& res) { res.status = 429; });
  server.server().Post("/bad", [&](const httplib::Request&, httplib::Response& res) { res.status = 400; });
  server.server().Post("/empty", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[{"message":{"content":""}}]})", "application/json");
  });
  server.start();

  HttpChatClient::Options o;
  o.endpoint = server.url("/chat");
  o.model = "m";
  o.retry = fast_retry(3);
  HttpChatClient client(o);
  EXPECT_EQ(client.complete(bundle_for(sample(), 1)).text, "[1]");
  EXPECT_EQ(calls.load(), 3);

  auto expect_code = [&](const std::string& path, ErrorCode code) {
    auto opt = o;
    opt.endpoint = server.url(path);
    HttpChatClient c(opt);
    try {
      c.complete(bundle_for(sample(), 1));
      FAIL() << path;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), code) << e.what();
    }
  };
  expect_code("/limited", ErrorCode::RateLimited);
  expect_code("/bad", ErrorCode::TransportError);
  expect_code("/empty", ErrorCode::EmptyResponse);
}

TEST(HttpChatClient, UnreachableEndpointIsTransportError) {
  std::string url;
  {
    fixtures::LocalServer server;  // grab a free port, then close it
    server.start();
    url = server.url("/v1/chat/completions");
  }
  HttpChatClient::Options o;
  o.endpoint = url;
  o.model = "m";
  o.retry = fast_retry(2);
  HttpChatClient client(o);
  try {
    client.complete(bundle_for(sample(), 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TransportError);
    EXPECT_NE(std::string(e.what()).find("after 2 retries"), std::string::npos);
  }
  o.endpoint = "localhost:80";
  EXPECT_THROW(HttpChatClient{o}, Error);
}
