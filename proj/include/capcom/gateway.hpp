#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "capcom/embedding.hpp"
#include "capcom/types.hpp"

namespace capcom::gateway {

struct EndpointConfig {
  std::string base_url;
  std::optional<std::string> api_key;
  double timeout_s = 60.0;
  int max_retries = 3;
  int max_parallel = 4;
  int backoff_ms = 100;
  // Model name recorded in cache keys (captioner/embedder) or the default
  // completion model (LLM).
  std::string model;
  // Embedder only: maximum items per request.
  std::size_t batch_limit = 256;

  void validate() const;
};

// Content digest over (service kind, model, full request payload, seed).
struct CacheKey {
  std::string digest;

  static CacheKey make(std::string_view kind, std::string_view model,
                       const nlohmann::json& payload, std::int64_t seed);
  bool operator==(const CacheKey&) const = default;
};

// One JSON blob per key under <dir>/<digest[0:2]>/<digest>.json. Writes are
// atomic, so concurrent writers of the same key are harmless.
class DiskCache {
 public:
  explicit DiskCache(std::filesystem::path dir);

  std::optional<std::string> get(const CacheKey& key) const;
  void put(const CacheKey& key, std::string_view blob) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path path_for(const CacheKey& key) const;
  std::filesystem::path dir_;
};

struct Pricing {
  double prompt_per_1k = 0.0;      // currency per 1000 prompt tokens
  double completion_per_1k = 0.0;  // currency per 1000 completion tokens
};

struct ModelInfo {
  std::string name;
  std::string family;  // "language", "chat", or "summary"
  int context_tokens = 2048;
  Pricing pricing;
};

// Summarizer models known to the gateway. Entries describe hosted or local
// servers; nothing is bundled. Prices default to zero except the GPT-3
// davinci entries, which carry the per-token list price the cost figures
// were quoted at.
class ModelRegistry {
 public:
  static ModelRegistry defaults();
  static ModelRegistry from_json(const nlohmann::json& j);

  void add(ModelInfo info);
  const ModelInfo* find(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, ModelInfo, std::less<>> models_;
};

// Tokens and nominal_cost describe the completion whether or not it came
// from cache; cost is what this process actually spent (0 on a cache hit).
struct CostEntry {
  std::string image_id;
  std::string model;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  double cost = 0.0;
  bool cached = false;
  double nominal_cost = 0.0;
};

class CostLedger {
 public:
  void record(CostEntry e);
  double total() const;
  double nominal_total() const;
  std::map<std::string, double> per_image() const;
  std::map<std::string, double> nominal_per_image() const;
  std::vector<CostEntry> entries() const;
  long total_tokens() const;
  void clear();

 private:
  mutable std::mutex mu_;
  std::vector<CostEntry> entries_;
};

struct CompletionParams {
  std::string model;  // empty: the LLM endpoint's default model
  int max_tokens = 128;
  double temperature = 0.0;
  std::vector<std::string> stop;
  std::int64_t seed = 0;  // cache key only; not sent on the wire
  std::string image_id;   // cost attribution
};

struct GatewayConfig {
  std::optional<EndpointConfig> captioner;
  std::optional<EndpointConfig> llm;
  std::optional<EndpointConfig> embedder;
  std::filesystem::path cache_dir = ".capcom-cache";
  ModelRegistry registry = ModelRegistry::defaults();

  // CC_CAPTIONER_URL, CC_LLM_URL, CC_EMBED_URL, CC_API_KEY, CC_CACHE_DIR.
  static GatewayConfig from_env();
};

struct CallCounters {
  std::atomic<long> captioner{0};
  std::atomic<long> llm{0};
  std::atomic<long> embedder{0};
  std::atomic<long> cache_hits{0};
};

// Clients for the captioner, LLM, and embedder services. Safe for concurrent
// use; each endpoint admits at most max_parallel requests in flight.
class Gateway {
 public:
  explicit Gateway(GatewayConfig config);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  CandidateSet sample_candidates(const ImageRecord& image, int k, double temperature,
                                 std::int64_t seed);
  Caption baseline_caption(const ImageRecord& image, int beams, std::int64_t seed = 0);

  // Raw completion text. Throws ContextLengthError when the prompt cannot fit
  // the model context (checked locally and mapped from service errors).
  std::string complete(std::string_view prompt, const CompletionParams& params);

  std::vector<EmbeddingVector> embed(const std::vector<std::string>& items, Modality modality);

  CostLedger& ledger() noexcept { return ledger_; }
  const CostLedger& ledger() const noexcept { return ledger_; }
  const CallCounters& counters() const noexcept { return counters_; }
  long network_calls() const noexcept;
  const GatewayConfig& config() const noexcept { return config_; }
  const ModelInfo& model_info(std::string_view name) const;

  struct Endpoint;  // opaque per-service client

 private:
  std::string caption_request(const ImageRecord& image, const nlohmann::json& payload,
                              std::int64_t seed);

  GatewayConfig config_;
  DiskCache cache_;
  CostLedger ledger_;
  CallCounters counters_;
  std::unique_ptr<Endpoint> captioner_;
  std::unique_ptr<Endpoint> llm_;
  std::unique_ptr<Endpoint> embedder_;
};

// Rough token count used for context checks and when a service omits usage:
// one token per four bytes, rounded up.
long estimate_tokens(std::string_view text);

}  // namespace capcom::gateway
