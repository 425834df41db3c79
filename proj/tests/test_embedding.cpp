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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>

#include "cole/codegen.hpp"
#include "cole/embedding.hpp"
#include "cole/nb201.hpp"
#include "cole/remote_provider.hpp"

namespace em = cole::embedding;
namespace nb = cole::nb201;
namespace cg = cole::codegen;

namespace {

std::vector<std::string> make_texts(std::size_t n) {
  std::vector<std::string> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back("text number " + std::to_string(i));
  return t;
}

// Deterministic fake that records call sizes; optionally fails the first
// `fail_first` calls with a transport error, or every call containing a
// poisoned text.
class CountingProvider : public em::EmbeddingProvider {
 public:
  explicit CountingProvider(std::size_t dim = 3, int fail_first = 0, std::string poison = {})
      : dim_(dim), fail_first_(fail_first), poison_(std::move(poison)) {}
  std::string id() const override { return "counting"; }
  std::size_t dim() const override { return dim_; }
  std::vector<em::ProviderOutput> embed(std::span<const std::string> texts) const override {
    {
      std::lock_guard lock(mu_);
      sizes_.push_back(texts.size());
      if (calls_++ < fail_first_) throw cole::TransportError("flaky", {});
    }
    std::vector<em::ProviderOutput> out;
    for (const auto& t : texts) {
      if (!poison_.empty() && t == poison_) throw cole::TransportError("poisoned batch", {});
      std::vector<float> v(dim_);
      for (std::size_t d = 0; d < dim_; ++d) v[d] = static_cast<float>(t.size() + d);
      out.emplace_back(std::move(v));
    }
    return out;
  }
  std::vector<std::size_t> sizes() const {
    std::lock_guard lock(mu_);
    return sizes_;
  }

 private:
  std::size_t dim_;
  int fail_first_;
  std::string poison_;
  mutable std::mutex mu_;
  mutable int calls_ = 0;
  mutable std::vector<std::size_t> sizes_;
};

// Returns per-token hidden states: rows are tokens.
class HiddenStateProvider : public em::EmbeddingProvider {
 public:
  std::string id() const override { return "hidden"; }
  std::size_t dim() const override { return 2; }
  std::vector<em::ProviderOutput> embed(std::span<const std::string> texts) const override {
    std::vector<em::ProviderOutput> out;
    for (const auto& t : texts) {
      em::TokenHiddenStates h(static_cast<Eigen::Index>(t.size()), 2);
      for (Eigen::Index r = 0; r < h.rows(); ++r) {
        h(r, 0) = static_cast<double>(r);
        h(r, 1) = 1.0;
      }
      out.emplace_back(std::move(h));
    }
    return out;
  }
};

em::EmbedOptions fast_options() {
  em::EmbedOptions o;
  o.backoff = std::chrono::milliseconds(1);
  return o;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cole_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(EmbeddingHash, Sha256KnownVectors) {
  EXPECT_EQ(em::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(em::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(EmbeddingPool, MeanOverTokens) {
  em::TokenHiddenStates h(3, 2);
  h << 1, 2, 3, 4, 5, 9;
  const auto v = em::mean_pool(h);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_DOUBLE_EQ(v[0], 3.0);
  EXPECT_DOUBLE_EQ(v[1], 5.0);
  EXPECT_THROW(em::mean_pool(em::TokenHiddenStates(0, 2)), cole::Error);
}

TEST(EmbeddingBatch, BatchesAndPreservesOrder) {
  CountingProvider p;
  const auto texts = make_texts(40);
  const auto out = em::embed_batch(p, std::span<const std::string>(texts), nullptr, fast_options());
  ASSERT_EQ(out.size(), 40u);
  for (std::size_t i = 0; i < texts.size(); ++i) EXPECT_EQ(out[i].values[0], static_cast<float>(texts[i].size()));
  auto sizes = p.sizes();
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{8, 16, 16}));
}

TEST(EmbeddingBatch, SecondRunIsAllCacheHits) {
  CountingProvider p;
  em::EmbeddingCache cache;
  auto texts = make_texts(20);
  texts.push_back(texts[3]);  // duplicate served from the same request
  em::EmbedStats first, second;
  const auto a = em::embed_batch(p, std::span<const std::string>(texts), &cache, fast_options(), &first);
  EXPECT_EQ(first.texts_embedded, 20u);
  EXPECT_EQ(first.provider_calls, 2u);
  EXPECT_EQ(cache.size(), 20u);
  const auto b = em::embed_batch(p, std::span<const std::string>(texts), &cache, fast_options(), &second);
  EXPECT_EQ(second.provider_calls, 0u);
  EXPECT_EQ(second.cache_hits, 21u);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a[3], a[20]);
}

TEST(EmbeddingBatch, RetriesTransientFailures) {
  CountingProvider p(3, 2);
  const auto texts = make_texts(5);
  EXPECT_NO_THROW(em::embed_batch(p, std::span<const std::string>(texts), nullptr, fast_options()));
  EXPECT_EQ(p.sizes().size(), 3u);
}

TEST(EmbeddingBatch, PersistentFailureListsIndicesAndKeepsSuccesses) {
  const auto texts = make_texts(40);
  CountingProvider p(3, 0, texts[20]);
  em::EmbeddingCache cache;
  try {
    em::embed_batch(p, std::span<const std::string>(texts), &cache, fast_options());
    FAIL();
  } catch (const cole::TransportError& e) {
    std::vector<std::size_t> want;
    for (std::size_t i = 16; i < 32; ++i) want.push_back(i);
    EXPECT_EQ(e.failed_indices(), want);
  }
  EXPECT_EQ(cache.size(), 24u);
}

TEST(EmbeddingBatch, CacheFromAnotherProviderIsRejected) {
  em::EmbeddingCache cache;
  const auto texts = make_texts(2);
  em::embed_batch(em::HashProvider(1, 4), std::span<const std::string>(texts), &cache);
  EXPECT_THROW(em::embed_batch(em::HashProvider(2, 4), std::span<const std::string>(texts), &cache), cole::InputError);
  CountingProvider wide(4);
  em::EmbeddingCache c2;
  c2.put(em::sha256_hex(texts[0]), {{1.0f, 2.0f}, "counting"});
  EXPECT_THROW(em::embed_batch(wide, std::span<const std::string>(texts), &c2), cole::InputError);
}

TEST(EmbeddingBatch, HiddenStatesAreMeanPooled) {
  HiddenStateProvider p;
  const std::vector<std::string> texts = {"abcde"};
  const auto out = em::embed_batch(p, std::span<const std::string>(texts));
  EXPECT_FLOAT_EQ(out[0].values[0], 2.0f);
  EXPECT_FLOAT_EQ(out[0].values[1], 1.0f);
}

TEST(EmbeddingBatch, WrongWidthFromProviderIsAnError) {
  class Liar : public CountingProvider {
   public:
    std::size_t dim() const override { return 5; }
  } p;
  const auto texts = make_texts(1);
  EXPECT_THROW(em::embed_batch(p, std::span<const std::string>(texts)), cole::Error);
}

TEST(EmbeddingCache, SaveLoadRoundTripIsByteIdentical) {
  em::EmbeddingCache cache;
  const auto texts = make_texts(30);
  em::embed_batch(em::HashProvider(3, 8), std::span<const std::string>(texts), &cache);
  const auto p1 = temp_path("c1.jsonl"), p2 = temp_path("c2.jsonl");
  cache.save(p1.string());
  const auto back = em::EmbeddingCache::load(p1.string());
  EXPECT_EQ(back.snapshot(), cache.snapshot());
  back.save(p2.string());
  std::ifstream a(p1), b(p2);
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(sa, sb);
  // Keys appear in sorted order.
  std::vector<std::string> keys;
  std::istringstream lines(sa);
  for (std::string l; std::getline(lines, l);) keys.push_back(nlohmann::json::parse(l)["key"]);
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST(EmbeddingCache, MissingFileIsEmptyAndBadRecordNamesLine) {
  EXPECT_EQ(em::EmbeddingCache::load(temp_path("nope.jsonl").string()).size(), 0u);
  const auto p = temp_path("bad.jsonl");
  {
    std::ofstream out(p);
    out << R"({"key":"a","provider":"x","dim":1,"vec":[1.0]})" << "\n";
    out << R"({"key":"b","provider":"x","dim":2,"vec":[1.0]})" << "\n";
  }
  try {
    em::EmbeddingCache::load(p.string());
    FAIL();
  } catch (const cole::InputError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(p);
}

TEST(EmbeddingProviders, HashIsDeterministicAndBounded) {
  em::HashProvider a(7, 16), b(7, 16), c(8, 16);
  const std::vector<std::string> texts = {"x", "y"};
  const auto va = em::embed_batch(a, std::span<const std::string>(texts));
  EXPECT_EQ(va, em::embed_batch(b, std::span<const std::string>(texts)));
  EXPECT_NE(va[0].values, em::embed_batch(c, std::span<const std::string>(texts))[0].values);
  EXPECT_NE(va[0].values, va[1].values);
  for (const auto& v : va) {
    for (float x : v.values) {
      EXPECT_GE(x, -1.0f);
      EXPECT_LT(x, 1.0f);
    }
  }
}

TEST(EmbeddingProviders, StructuralMockRecoversEveryGenotype) {
  for (auto mode : {cg::VerbosityMode::HelperMethod, cg::VerbosityMode::Inline, cg::VerbosityMode::ExcludedHelper}) {
    for (const auto& g : nb::enumerate_space()) {
      const auto text = cg::emit_cell_code(g, mode).text;
      const auto back = em::recover_genotype(text);
      ASSERT_TRUE(back.has_value()) << text;
      ASSERT_EQ(*back, g) << text;
    }
  }
  const auto g = nb::CellGenotype::from_index(4321);
  EXPECT_EQ(em::recover_genotype(cg::emit_cell_code(g, cg::VerbosityMode::Inline, {true, true}).text), g);
  EXPECT_FALSE(em::recover_genotype("class Network(nn.Module):\n  pass\n").has_value());
}

TEST(EmbeddingProviders, StructuralMockLayout) {
  em::StructuralMockProvider p(0.0, 0);
  ASSERT_EQ(p.dim(), 210u);
  const auto g = nb::parse_arch_string(
      "|avg_pool_3x3~0|+|nor_conv_1x1~0|skip_connect~1|+|nor_conv_1x1~0|skip_connect~1|skip_connect~2|");
  const std::vector<std::string> texts = {cg::emit_cell_code(g, cg::VerbosityMode::ExcludedHelper).text};
  const auto v = em::embed_batch(p, std::span<const std::string>(texts))[0].values;
  const auto bits = nb::path_encode(g);
  for (std::size_t i = 0; i < 180; ++i) EXPECT_EQ(v[i], bits[i] ? 1.0f : 0.0f);
  for (std::size_t e = 0; e < 6; ++e) {
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_EQ(v[180 + e * 5 + k], static_cast<std::size_t>(g.ops()[e]) == k ? 1.0f : 0.0f);
    }
  }
  em::StructuralMockProvider noisy(0.5, 3), noisy2(0.5, 3);
  const auto n1 = em::embed_batch(noisy, std::span<const std::string>(texts))[0].values;
  EXPECT_EQ(n1, em::embed_batch(noisy2, std::span<const std::string>(texts))[0].values);
  EXPECT_NE(n1, v);
  const std::vector<std::string> junk = {"def f(): pass"};
  EXPECT_THROW(em::embed_batch(p, std::span<const std::string>(junk)), cole::InputError);
}

TEST(EmbeddingProviders, CacheFileProviderServesAndReportsMissing) {
  em::EmbeddingCache cache;
  const auto texts = make_texts(3);
  const auto vecs = em::embed_batch(em::HashProvider(0, 4), std::span<const std::string>(texts), &cache);
  em::CacheFileProvider p(cache);
  EXPECT_EQ(p.id(), "hash:seed=0:dim=4");
  EXPECT_EQ(p.dim(), 4u);
  EXPECT_EQ(em::embed_batch(p, std::span<const std::string>(texts)), vecs);
  const std::vector<std::string> other = {"never seen"};
  try {
    em::embed_batch(p, std::span<const std::string>(other));
    FAIL();
  } catch (const cole::InputError& e) {
    EXPECT_NE(std::string(e.what()).find(em::sha256_hex("never seen")), std::string::npos);
  }
  EXPECT_THROW(em::CacheFileProvider(em::EmbeddingCache{}), cole::InputError);
  cache.put("zz", {{1.0f}, "other"});
  EXPECT_THROW(em::CacheFileProvider{cache}, cole::InputError);
}

class RemoteProviderTest : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/api/v1/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests_;
      last_auth_ = req.get_header_value("Authorization");
      if (mode_ == "error") {
        res.status = 503;
        return;
      }
      const auto body = nlohmann::json::parse(req.body);
      nlohmann::json reply;
      reply["dim"] = mode_ == "wrong_dim" ? 3 : 2;
      reply["embeddings"] = nlohmann::json::array();
      for (const auto& t : body["inputs"]) {
        reply["embeddings"].push_back({static_cast<double>(t.get<std::string>().size()), 0.5});
      }
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::string mode_ = "ok";
  std::string last_auth_;
};

TEST_F(RemoteProviderTest, EmbedsThroughEndpointWithBearerToken) {
  em::RemoteProvider p(em::RemoteEndpoint::from_env(url(), "sekrit"), 2);
  const std::vector<std::string> texts = {"ab", "abcd"};
  const auto out = em::embed_batch(p, std::span<const std::string>(texts));
  EXPECT_EQ(out[0].values, (std::vector<float>{2.0f, 0.5f}));
  EXPECT_EQ(out[1].values, (std::vector<float>{4.0f, 0.5f}));
  EXPECT_EQ(last_auth_, "Bearer sekrit");
  EXPECT_EQ(p.id(), "remote:" + url());
}

TEST_F(RemoteProviderTest, ServerErrorsAreRetriedThenReported) {
  mode_ = "error";
  em::RemoteProvider p(em::RemoteEndpoint::from_env(url()), 2);
  const std::vector<std::string> texts = {"a"};
  EXPECT_THROW(em::embed_batch(p, std::span<const std::string>(texts), nullptr, fast_options()), cole::TransportError);
  EXPECT_EQ(requests_.load(), 4);
}

TEST_F(RemoteProviderTest, DimMismatchIsHardError) {
  mode_ = "wrong_dim";
  em::RemoteProvider p(em::RemoteEndpoint::from_env(url()), 2);
  const std::vector<std::string> texts = {"a"};
  try {
    em::embed_batch(p, std::span<const std::string>(texts), nullptr, fast_options());
    FAIL();
  } catch (const cole::TransportError&) {
    FAIL() << "dim mismatch reported as transport error";
  } catch (const cole::Error&) {
  }
  EXPECT_EQ(requests_.load(), 1);
}

TEST(RemoteProvider, UnreachableEndpointIsTransportError) {
  // Port 9 (discard) on loopback is not listening in the test environment.
  em::RemoteEndpoint ep = em::RemoteEndpoint::from_env("http://127.0.0.1:9");
  ep.timeout = std::chrono::seconds(2);
  em::RemoteProvider p(ep, 2);
  const std::vector<std::string> texts = {"a"};
  auto opts = fast_options();
  opts.retries = 1;
  EXPECT_THROW(em::embed_batch(p, std::span<const std::string>(texts), nullptr, opts), cole::TransportError);
}

TEST(RemoteProvider, NeedsUrl) {
  EXPECT_THROW(em::RemoteProvider(em::RemoteEndpoint{"localhost:80", "", std::chrono::seconds(1)}, 2), cole::InputError);
}
