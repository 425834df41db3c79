// Copyright 2026 The COLE Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// HTTP client for a remote embedding service.
//
//   POST <base>/v1/embed  {"inputs": [...], "pooling": "mean"}
//   200                   {"dim": D, "embeddings": [[...], ...]}

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cole/embedding.hpp"
#include "cole/error.hpp"

namespace cole::embedding {

struct RemoteEndpoint {
  std::string url;    // scheme://host[:port][/prefix]
  std::string token;  // sent as "Authorization: Bearer <token>" when set
  std::chrono::seconds timeout{60};

  /// COLE_EMBED_URL / COLE_EMBED_TOKEN, with explicit values taking priority.
  static RemoteEndpoint from_env(std::string url = {}, std::string token = {}) {
    RemoteEndpoint ep;
    if (url.empty()) {
      if (const char* v = std::getenv("COLE_EMBED_URL")) url = v;
    }
    if (token.empty()) {
      if (const char* v = std::getenv("COLE_EMBED_TOKEN")) token = v;
    }
    if (url.empty()) throw InputError("remote provider: no endpoint URL (set COLE_EMBED_URL)");
    ep.url = std::move(url);
    ep.token = std::move(token);
    return ep;
  }
};

class RemoteProvider final : public EmbeddingProvider {
 public:
  RemoteProvider(RemoteEndpoint endpoint, std::size_t dim, std::string provider_id = {})
      : endpoint_(std::move(endpoint)), dim_(dim), id_(std::move(provider_id)) {
    if (dim_ == 0) throw InputError("remote provider: dim must be >= 1");
    const auto scheme_end = endpoint_.url.find("://");
    if (scheme_end == std::string::npos) {
      throw InputError("remote provider: URL needs a scheme: '" + endpoint_.url + "'");
    }
    const auto path_start = endpoint_.url.find('/', scheme_end + 3);
    origin_ = endpoint_.url.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? "" : endpoint_.url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    if (id_.empty()) id_ = "remote:" + endpoint_.url;
  }

  std::string id() const override { return id_; }
  std::size_t dim() const override { return dim_; }

  std::vector<ProviderOutput> embed(std::span<const std::string> texts) const override {
    httplib::Client client(origin_);
    client.set_connection_timeout(endpoint_.timeout);
    client.set_read_timeout(endpoint_.timeout);
    httplib::Headers headers;
    if (!endpoint_.token.empty()) headers.emplace("Authorization", "Bearer " + endpoint_.token);

    nlohmann::json body;
    body["inputs"] = std::vector<std::string>(texts.begin(), texts.end());
    body["pooling"] = "mean";
    const auto res = client.Post(prefix_ + "/v1/embed", headers, body.dump(), "application/json");
    std::vector<std::size_t> all(texts.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    if (!res) {
      throw TransportError("remote provider: request failed: " + httplib::to_string(res.error()), all);
    }
    if (res->status != 200) {
      throw TransportError("remote provider: HTTP " + std::to_string(res->status), all);
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("remote provider: malformed response: ") + e.what(), all);
    }
    const auto dim = reply.value("dim", std::size_t{0});
    if (dim != dim_) {
      throw Error("remote provider: endpoint reports dim " + std::to_string(dim) + ", expected " +
                  std::to_string(dim_));
    }
    if (!reply.contains("embeddings") || !reply["embeddings"].is_array() ||
        reply["embeddings"].size() != texts.size()) {
      throw TransportError("remote provider: response lacks one embedding per input", all);
    }
    std::vector<ProviderOutput> out;
    out.reserve(texts.size());
    for (const auto& row : reply["embeddings"]) out.emplace_back(row.get<std::vector<float>>());
    return out;
  }

 private:
  RemoteEndpoint endpoint_;
  std::size_t dim_;
  std::string id_;
  std::string origin_;
  std::string prefix_;
};

}  // namespace cole::embedding
