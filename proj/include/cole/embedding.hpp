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

// Text -> fixed-length vectors. Providers either return per-token hidden
// states (which are mean-pooled here) or already pooled vectors. A
// content-addressed cache keyed by the SHA-256 of the exact text makes
// re-embedding free.

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cole/codegen.hpp"
#include "cole/error.hpp"
#include "cole/nb201.hpp"
#include "cole/rng.hpp"

namespace cole::embedding {

/// T x D last-layer hidden states, one row per token.
using TokenHiddenStates = Eigen::MatrixXd;

struct EmbeddingVector {
  std::vector<float> values;
  std::string provider_id;

  std::size_t dim() const { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

using ProviderOutput = std::variant<TokenHiddenStates, std::vector<float>>;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  /// One output per input text, in order. Implementations must be safe to
  /// call concurrently and deterministic for a fixed configuration. Transport
  /// problems are reported as TransportError.
  virtual std::vector<ProviderOutput> embed(std::span<const std::string> texts) const = 0;
};

inline std::string sha256_hex(std::string_view text) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

/// First 64 bits of the SHA-256 digest, big-endian.
inline std::uint64_t content_digest64(std::string_view text) {
  const std::string hex = sha256_hex(text);
  return std::stoull(hex.substr(0, 16), nullptr, 16);
}

/// Token-wise mean: out[d] = (1/T) sum_t h[t][d].
inline std::vector<double> mean_pool(const TokenHiddenStates& h) {
  if (h.rows() == 0 || h.cols() == 0) throw InputError("mean_pool: empty hidden-state matrix");
  std::vector<double> out(static_cast<std::size_t>(h.cols()), 0.0);
  for (Eigen::Index d = 0; d < h.cols(); ++d) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < h.rows(); ++t) s += h(t, d);
    out[static_cast<std::size_t>(d)] = s / static_cast<double>(h.rows());
  }
  return out;
}

// --------------------------------------------------------------------------
// Cache

/// In-memory view of the JSON-lines cache file. Concurrent readers, one
/// writer at a time.
class EmbeddingCache {
 public:
  EmbeddingCache() = default;
  EmbeddingCache(const EmbeddingCache& other) : records_(other.snapshot()) {}
  EmbeddingCache& operator=(const EmbeddingCache& other) {
    if (this != &other) {
      auto copy = other.snapshot();
      std::unique_lock lock(mu_);
      records_ = std::move(copy);
    }
    return *this;
  }

  std::optional<EmbeddingVector> find(const std::string& key) const {
    std::shared_lock lock(mu_);
    auto it = records_.find(key);
    if (it == records_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& key, EmbeddingVector v) {
    std::unique_lock lock(mu_);
    records_[key] = std::move(v);
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return records_.size();
  }

  std::map<std::string, EmbeddingVector> snapshot() const {
    std::shared_lock lock(mu_);
    return records_;
  }

  /// Reads a cache file; a missing file yields an empty cache. Later records
  /// for the same key replace earlier ones.
  static EmbeddingCache load(const std::string& path) {
    EmbeddingCache cache;
    std::ifstream in(path);
    if (!in) return cache;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        EmbeddingVector v;
        v.provider_id = j.at("provider").get<std::string>();
        v.values = j.at("vec").get<std::vector<float>>();
        const auto dim = j.at("dim").get<std::size_t>();
        if (dim != v.values.size()) {
          throw InputError("dim " + std::to_string(dim) + " but vector has " +
                           std::to_string(v.values.size()) + " entries");
        }
        cache.records_[j.at("key").get<std::string>()] = std::move(v);
      } catch (const nlohmann::json::exception& e) {
        throw InputError(path + ":" + std::to_string(lineno) + ": bad cache record: " + e.what());
      } catch (const InputError& e) {
        throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
      }
    }
    return cache;
  }

  /// Writes every record sorted by key, so equal caches give equal files.
  void save(const std::string& path) const {
    const auto records = snapshot();
    const std::filesystem::path parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write cache file '" + path + "'");
    for (const auto& [key, v] : records) {
      nlohmann::ordered_json j;
      j["key"] = key;
      j["provider"] = v.provider_id;
      j["dim"] = v.values.size();
      j["vec"] = v.values;
      out << j.dump() << '\n';
    }
  }

 private:
  mutable std::shared_mutex mu_;
  std::map<std::string, EmbeddingVector> records_;
};

// --------------------------------------------------------------------------
// embed_batch

struct EmbedOptions {
  std::size_t batch_size = 16;
  std::size_t max_in_flight = 4;
  int retries = 3;
  std::chrono::milliseconds backoff{100};
};

struct EmbedStats {
  std::size_t provider_calls = 0;  // batches sent to the provider
  std::size_t texts_embedded = 0;  // texts served by the provider
  std::size_t cache_hits = 0;
};

namespace detail {

inline EmbeddingVector to_vector(const ProviderOutput& out, const EmbeddingProvider& provider) {
  EmbeddingVector v;
  v.provider_id = provider.id();
  if (const auto* states = std::get_if<TokenHiddenStates>(&out)) {
    if (static_cast<std::size_t>(states->cols()) != provider.dim()) {
      throw Error("provider '" + provider.id() + "' returned hidden size " +
                  std::to_string(states->cols()) + ", declared " + std::to_string(provider.dim()));
    }
    if (!states->allFinite()) throw NumericError("provider returned non-finite hidden states");
    const auto pooled = mean_pool(*states);
    v.values.assign(pooled.begin(), pooled.end());
  } else {
    v.values = std::get<std::vector<float>>(out);
    if (v.values.size() != provider.dim()) {
      throw Error("provider '" + provider.id() + "' returned dim " + std::to_string(v.values.size()) +
                  ", declared " + std::to_string(provider.dim()));
    }
    for (float x : v.values) {
      if (!std::isfinite(x)) throw NumericError("provider returned a non-finite embedding");
    }
  }
  return v;
}

}  // namespace detail

/// Embeds texts in order. Cached entries are reused; misses are sent to the
/// provider in batches with a bounded number of concurrent requests, each
/// retried with exponential backoff. Successful results are written to the
/// cache even when some batches fail; the failure is then reported as a
/// TransportError listing the input indices that could not be embedded.
inline std::vector<EmbeddingVector> embed_batch(const EmbeddingProvider& provider,
                                                std::span<const std::string> texts,
                                                EmbeddingCache* cache = nullptr,
                                                const EmbedOptions& opts = {},
                                                EmbedStats* stats = nullptr) {
  if (texts.empty()) throw InputError("embed_batch: no inputs");
  const std::size_t n = texts.size();
  std::vector<std::optional<EmbeddingVector>> result(n);
  std::vector<std::string> keys(n);

  // Unique uncached texts, each with the input positions it serves.
  std::vector<std::string> miss_keys;
  std::unordered_map<std::string, std::vector<std::size_t>> positions;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    keys[i] = sha256_hex(texts[i]);
    if (cache) {
      if (auto found = cache->find(keys[i])) {
        if (found->provider_id != provider.id()) {
          throw InputError("cache entry " + keys[i] + " was produced by provider '" +
                           found->provider_id + "', not '" + provider.id() + "'");
        }
        if (found->dim() != provider.dim()) {
          throw InputError("cache entry " + keys[i] + " has dim " + std::to_string(found->dim()) +
                           " but provider '" + provider.id() + "' declares " +
                           std::to_string(provider.dim()));
        }
        result[i] = std::move(*found);
        ++hits;
        continue;
      }
    }
    auto [it, inserted] = positions.try_emplace(keys[i]);
    if (inserted) miss_keys.push_back(keys[i]);
    it->second.push_back(i);
  }

  const std::size_t batch = std::max<std::size_t>(1, opts.batch_size);
  const std::size_t in_flight = std::max<std::size_t>(1, opts.max_in_flight);
  std::vector<std::pair<std::size_t, std::size_t>> batches;
  for (std::size_t b = 0; b < miss_keys.size(); b += batch) {
    batches.emplace_back(b, std::min(miss_keys.size(), b + batch));
  }

  const auto run_batch = [&](std::size_t lo, std::size_t hi) -> std::vector<ProviderOutput> {
    std::vector<std::string> inputs;
    inputs.reserve(hi - lo);
    for (std::size_t k = lo; k < hi; ++k) inputs.push_back(std::string(texts[positions.at(miss_keys[k]).front()]));
    for (int attempt = 0;; ++attempt) {
      try {
        auto out = provider.embed(inputs);
        if (out.size() != inputs.size()) {
          throw Error("provider '" + provider.id() + "' returned " + std::to_string(out.size()) +
                      " outputs for " + std::to_string(inputs.size()) + " inputs");
        }
        return out;
      } catch (const TransportError&) {
        if (attempt >= opts.retries) throw;
        std::this_thread::sleep_for(opts.backoff * (1 << attempt));
      }
    }
  };

  std::vector<std::size_t> failed;
  std::string first_failure;
  std::size_t calls = 0;
  for (std::size_t wave = 0; wave < batches.size(); wave += in_flight) {
    const std::size_t wave_end = std::min(batches.size(), wave + in_flight);
    std::vector<std::future<std::vector<ProviderOutput>>> futures;
    for (std::size_t b = wave; b < wave_end; ++b) {
      const auto [lo, hi] = batches[b];
      futures.push_back(std::async(wave_end - wave > 1 ? std::launch::async : std::launch::deferred,
                                   run_batch, lo, hi));
    }
    for (std::size_t b = wave; b < wave_end; ++b) {
      const auto [lo, hi] = batches[b];
      ++calls;
      try {
        auto outs = futures[b - wave].get();
        for (std::size_t k = lo; k < hi; ++k) {
          EmbeddingVector v = detail::to_vector(outs[k - lo], provider);
          if (cache) cache->put(miss_keys[k], v);
          for (std::size_t pos : positions[miss_keys[k]]) result[pos] = v;
        }
      } catch (const TransportError& e) {
        if (first_failure.empty()) first_failure = e.what();
        for (std::size_t k = lo; k < hi; ++k) {
          for (std::size_t pos : positions[miss_keys[k]]) failed.push_back(pos);
        }
      }
    }
  }
  if (stats) {
    stats->provider_calls += calls;
    stats->texts_embedded += miss_keys.size();
    stats->cache_hits += hits;
  }
  if (!failed.empty()) {
    std::sort(failed.begin(), failed.end());
    throw TransportError("embedding failed for " + std::to_string(failed.size()) +
                             " input(s) after retries: " + first_failure,
                         std::move(failed));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(n);
  for (auto& r : result) out.push_back(std::move(*r));
  return out;
}

inline std::vector<EmbeddingVector> embed_batch(const EmbeddingProvider& provider,
                                                std::span<const codegen::CodeText> codes,
                                                EmbeddingCache* cache = nullptr,
                                                const EmbedOptions& opts = {},
                                                EmbedStats* stats = nullptr) {
  std::vector<std::string> texts;
  texts.reserve(codes.size());
  for (const auto& c : codes) texts.push_back(c.text);
  return embed_batch(provider, std::span<const std::string>(texts), cache, opts, stats);
}

// --------------------------------------------------------------------------
// Providers

/// Uninformative control: each coordinate is a hash of (seed, text digest,
/// coordinate) mapped to [-1, 1).
class HashProvider final : public EmbeddingProvider {
 public:
  HashProvider(std::uint64_t seed, std::size_t dim) : seed_(seed), dim_(dim) {
    if (dim == 0) throw InputError("hash provider: dim must be >= 1");
  }

  std::string id() const override {
    return "hash:seed=" + std::to_string(seed_) + ":dim=" + std::to_string(dim_);
  }
  std::size_t dim() const override { return dim_; }

  std::vector<ProviderOutput> embed(std::span<const std::string> texts) const override {
    std::vector<ProviderOutput> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      const std::uint64_t digest = content_digest64(t);
      std::vector<float> v(dim_);
      for (std::size_t d = 0; d < dim_; ++d) {
        v[d] = static_cast<float>(2.0 * unit_double(derive_seed({seed_, digest, d})) - 1.0);
      }
      out.emplace_back(std::move(v));
    }
    return out;
  }

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

namespace detail {

inline std::optional<nb201::OpKind> field_op(std::string_view expr) {
  if (expr.find("AvgPool2d") != std::string_view::npos) return nb201::OpKind::AvgPool3x3;
  if (expr.find("kernel_size=1") != std::string_view::npos) return nb201::OpKind::NorConv1x1;
  if (expr.find("kernel_size=3") != std::string_view::npos) return nb201::OpKind::NorConv3x3;
  return std::nullopt;
}

inline std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Reads the genotype back out of an emitted `Cell` class (any verbosity
/// mode, with or without add-ons). Returns nullopt if the text is not a cell
/// emission.
inline std::optional<nb201::CellGenotype> recover_genotype(std::string_view code) {
  const std::size_t cls = code.find("class Cell(nn.Module):");
  if (cls == std::string_view::npos) return std::nullopt;
  code.remove_prefix(cls);
  std::array<std::optional<nb201::OpKind>, nb201::kNumEdges> fields{};
  std::array<std::optional<std::string_view>, nb201::kNumNodes> node_expr{};
  std::size_t pos = 0;
  while (pos < code.size()) {
    std::size_t nl = code.find('\n', pos);
    if (nl == std::string_view::npos) nl = code.size();
    const std::string_view line = detail::strip(code.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.size() > 12 && line.substr(0, 8) == "self.op_" && line[9] == '_' &&
        line.substr(11, 3) == " = ") {
      const int src = line[8] - '0', dst = line[10] - '0';
      if (src < 0 || dst > 3 || src >= dst) return std::nullopt;
      const auto op = detail::field_op(line.substr(14));
      if (!op) return std::nullopt;
      fields[nb201::edge_index(src, dst)] = op;
    } else if (line.size() > 9 && line.substr(0, 5) == "node_" && line.substr(6, 3) == " = ") {
      const int j = line[5] - '0';
      if (j < 0 || j > 3) return std::nullopt;
      node_expr[static_cast<std::size_t>(j)] = line.substr(9);
    }
  }
  nb201::CellGenotype g;
  for (int dst = 1; dst <= 3; ++dst) {
    if (!node_expr[static_cast<std::size_t>(dst)]) return std::nullopt;
    std::string_view expr = *node_expr[static_cast<std::size_t>(dst)];
    while (!expr.empty()) {
      const std::size_t plus = expr.find(" + ");
      const std::string_view term = expr.substr(0, plus);
      expr = plus == std::string_view::npos ? std::string_view{} : expr.substr(plus + 3);
      if (term == "torch.zeros_like(node_0)") continue;
      if (term.size() == 6 && term.substr(0, 5) == "node_") {
        const int src = term[5] - '0';
        if (src < 0 || src >= dst) return std::nullopt;
        g.set_op(src, dst, nb201::OpKind::SkipConnect);
        continue;
      }
      if (term.size() == 19 && term.substr(0, 8) == "self.op_") {
        const int src = term[8] - '0';
        if (src < 0 || src >= dst || term[10] - '0' != dst) return std::nullopt;
        const auto op = fields[nb201::edge_index(src, dst)];
        if (!op) return std::nullopt;
        g.set_op(src, dst, *op);
        continue;
      }
      return std::nullopt;
    }
  }
  return g;
}

inline constexpr std::size_t kStructuralMockDim =
    nb201::kPathEncodingBits + nb201::kNumEdges * nb201::kNumOps;

/// Informative stand-in for a language model on NB201 cell emissions: the
/// 180-bit path encoding followed by per-edge one-hot op indicators, plus
/// deterministic pseudo-noise of the given scale.
class StructuralMockProvider final : public EmbeddingProvider {
 public:
  StructuralMockProvider(double noise, std::uint64_t seed) : noise_(noise), seed_(seed) {
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw InputError("structural mock: noise must be >= 0");
  }

  std::string id() const override {
    char buf[64];
    std::snprintf(buf, sizeof buf, "structural:noise=%.17g:seed=", noise_);
    return buf + std::to_string(seed_);
  }
  std::size_t dim() const override { return kStructuralMockDim; }

  std::vector<float> vector_for(const nb201::CellGenotype& g, std::uint64_t digest) const {
    std::vector<float> v(kStructuralMockDim, 0.0f);
    const auto bits = nb201::path_encode(g);
    for (std::size_t i = 0; i < nb201::kPathEncodingBits; ++i) v[i] = bits[i] ? 1.0f : 0.0f;
    for (std::size_t e = 0; e < nb201::kNumEdges; ++e) {
      v[nb201::kPathEncodingBits + e * nb201::kNumOps + static_cast<std::size_t>(g.ops()[e])] = 1.0f;
    }
    if (noise_ > 0.0) {
      Rng rng(derive_seed({seed_, digest}));
      for (auto& x : v) x = static_cast<float>(x + noise_ * rng.normal());
    }
    return v;
  }

  std::vector<ProviderOutput> embed(std::span<const std::string> texts) const override {
    std::vector<ProviderOutput> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      const auto g = recover_genotype(t);
      if (!g) throw InputError("structural mock provider: text is not an NB201 cell emission");
      out.emplace_back(vector_for(*g, noise_ > 0.0 ? content_digest64(t) : 0));
    }
    return out;
  }

 private:
  double noise_;
  std::uint64_t seed_;
};

/// Serves precomputed vectors (e.g. from a real language model) out of a
/// cache file. Texts absent from the cache are an input error.
class CacheFileProvider final : public EmbeddingProvider {
 public:
  explicit CacheFileProvider(EmbeddingCache cache) : cache_(std::move(cache)) {
    const auto records = cache_.snapshot();
    if (records.empty()) throw InputError("cache provider: cache is empty");
    id_ = records.begin()->second.provider_id;
    dim_ = records.begin()->second.dim();
    for (const auto& [key, v] : records) {
      if (v.provider_id != id_ || v.dim() != dim_) {
        throw InputError("cache provider: mixed providers or dims in cache (key " + key + ")");
      }
    }
  }

  std::string id() const override { return id_; }
  std::size_t dim() const override { return dim_; }

  std::vector<ProviderOutput> embed(std::span<const std::string> texts) const override {
    std::vector<ProviderOutput> out;
    std::vector<std::string> missing;
    for (const auto& t : texts) {
      const std::string key = sha256_hex(t);
      auto v = cache_.find(key);
      if (!v) {
        missing.push_back(key);
        continue;
      }
      out.emplace_back(std::move(v->values));
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& k : missing) list += (list.empty() ? "" : ", ") + k;
      throw InputError("cache provider: no vector for key(s) " + list);
    }
    return out;
  }

 private:
  EmbeddingCache cache_;
  std::string id_;
  std::size_t dim_ = 0;
};

}  // namespace cole::embedding
