// SPDX-License-Identifier: Apache-2.0
#include "spark/http_embedder.hpp"

#include "spark/error.hpp"

namespace spark {

HttpEmbedder::HttpEmbedder(Options options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw Error(ErrorCode::InvalidArgument, "embedding endpoint is not configured");
  endpoint_ = http::parse_url(options_.endpoint);
}

HttpEmbedder HttpEmbedder::from_env(std::size_t dimension, std::size_t max_chunk_len) {
  Options o;
  o.endpoint = http::getenv_or_empty("SPARK_EMBED_ENDPOINT");
  o.api_key = http::getenv_or_empty("SPARK_EMBED_API_KEY");
  o.model = http::getenv_or_empty("SPARK_EMBED_MODEL");
  if (o.model.empty()) o.model = "bge-m3";
  o.dimension = dimension;
  o.max_chunk_len = max_chunk_len;
  return HttpEmbedder(std::move(o));
}

std::vector<float> HttpEmbedder::encode_chunk(std::string_view text) const {
  return encode_batch({std::string(text)}).at(0);
}

std::vector<std::vector<float>> HttpEmbedder::encode_batch(const std::vector<std::string>& chunks) const {
  const nlohmann::json body{{"input", chunks}, {"model", options_.model}};
  const nlohmann::json reply = http::post_json(endpoint_, body, options_.api_key, options_.retry);
  std::vector<std::vector<float>> out;
  try {
    const auto& data = reply.at("data");
    if (!data.is_array() || data.size() != chunks.size()) {
      throw Error(ErrorCode::EmbedderFailure, "expected " + std::to_string(chunks.size()) + " embeddings");
    }
    for (const auto& item : data) {
      auto v = item.at("embedding").get<std::vector<float>>();
      if (v.size() != options_.dimension) {
        throw Error(ErrorCode::DimensionMismatch, "embedding has dimension " + std::to_string(v.size()) +
                                                      ", configured " + std::to_string(options_.dimension));
      }
      out.push_back(std::move(v));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::EmbedderFailure, std::string("malformed embeddings reply: ") + e.what());
  }
  return out;
}

}  // namespace spark
