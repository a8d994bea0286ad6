// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "spark/http_transport.hpp"
#include "spark/simsearch.hpp"

namespace spark {

/// Embedder backed by an embeddings endpoint speaking
/// `{"input":[str],"model":str}` -> `{"data":[{"embedding":[float]}]}`.
class HttpEmbedder final : public Embedder {
 public:
  struct Options {
    std::string endpoint;  // absolute URL
    std::string api_key;
    std::string model;
    std::size_t dimension = 1024;
    std::size_t max_chunk_len = 8192;
    http::RetryPolicy retry;
  };

  explicit HttpEmbedder(Options options);

  /// Endpoint from SPARK_EMBED_ENDPOINT, key from SPARK_EMBED_API_KEY and
  /// model from SPARK_EMBED_MODEL (default "bge-m3").
  static HttpEmbedder from_env(std::size_t dimension, std::size_t max_chunk_len);

  std::string name() const override { return "http:" + options_.model; }
  std::size_t dimension() const override { return options_.dimension; }
  std::size_t max_chunk_len() const override { return options_.max_chunk_len; }
  std::vector<float> encode_chunk(std::string_view text) const override;
  std::vector<std::vector<float>> encode_batch(const std::vector<std::string>& chunks) const override;

 private:
  Options options_;
  http::Endpoint endpoint_;
};

}  // namespace spark
