#include "capcom/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_map>

#include "capcom/errors.hpp"
#include "capcom/hashing.hpp"
#include "capcom/io.hpp"
#include "capcom/text.hpp"
#include "http_util.hpp"

namespace capcom::gateway {

using nlohmann::json;

void EndpointConfig::validate() const {
  if (base_url.empty()) throw ValidationError("endpoint base_url is empty");
  if (!(timeout_s > 0)) throw ValidationError("endpoint timeout must be > 0");
  if (max_parallel < 1) throw ValidationError("endpoint max_parallel must be >= 1");
  if (max_retries < 0) throw ValidationError("endpoint max_retries must be >= 0");
  if (batch_limit < 1) throw ValidationError("endpoint batch_limit must be >= 1");
}

CacheKey CacheKey::make(std::string_view kind, std::string_view model, const json& payload,
                        std::int64_t seed) {
  // json objects keep keys sorted, so dump() is canonical.
  json j = {{"kind", std::string(kind)},
            {"model", std::string(model)},
            {"payload", payload},
            {"seed", seed}};
  return CacheKey{sha256_hex(j.dump())};
}

DiskCache::DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path DiskCache::path_for(const CacheKey& key) const {
  return dir_ / key.digest.substr(0, 2) / (key.digest + ".json");
}

std::optional<std::string> DiskCache::get(const CacheKey& key) const {
  const auto p = path_for(key);
  std::error_code ec;
  if (!std::filesystem::exists(p, ec)) return std::nullopt;
  return read_file(p);
}

void DiskCache::put(const CacheKey& key, std::string_view blob) const {
  write_file_atomic(path_for(key), blob);
}

ModelRegistry ModelRegistry::defaults() {
  ModelRegistry r;
  auto add = [&](std::string name, std::string family, int ctx, Pricing p = {}) {
    r.add(ModelInfo{std::move(name), std::move(family), ctx, p});
  };
  // GPT-3 davinci at $0.02 / 1k tokens and gpt-3.5-turbo at $0.002 / 1k match
  // the per-image cost figures (about $0.0109 and $0.001 per image).
  add("text-davinci-003", "language", 4097, {0.02, 0.02});
  add("text-davinci-002", "language", 4097, {0.02, 0.02});
  add("text-curie-001", "language", 2049);
  add("text-babbage-001", "language", 2049);
  add("text-ada-001", "language", 2049);
  add("gpt-3.5-turbo", "chat", 4096, {0.002, 0.002});
  add("gpt-4", "chat", 8192);
  add("claude", "chat", 9000);
  add("bloom", "language", 2048);
  add("distilgpt2", "language", 1024);
  add("gpt2", "language", 1024);
  add("gpt2-medium", "language", 1024);
  add("gpt2-large", "language", 1024);
  add("gpt2-xl", "language", 1024);
  add("gpt-neo-125m", "language", 2048);
  add("gpt-neo-1.3b", "language", 2048);
  add("gpt-neo-2.7b", "language", 2048);
  add("llama-7b", "language", 2048);
  add("llama-13b", "language", 2048);
  add("stablelm-3b", "language", 4096);
  add("stablelm-7b", "language", 4096);
  add("alpaca-7b", "chat", 2048);
  add("koala-7b", "chat", 2048);
  add("koala-13b-v1", "chat", 2048);
  add("koala-13b-v2", "chat", 2048);
  add("vicuna-7b", "chat", 2048);
  add("vicuna-13b", "chat", 2048);
  add("t5-small", "summary", 512);
  add("t5-base", "summary", 512);
  return r;
}

ModelRegistry ModelRegistry::from_json(const json& j) {
  auto r = defaults();
  for (const auto& m : j.at("models")) {
    ModelInfo info;
    info.name = m.at("name").get<std::string>();
    info.family = m.value("family", "language");
    info.context_tokens = m.value("context_tokens", 2048);
    info.pricing.prompt_per_1k = m.value("prompt_per_1k", 0.0);
    info.pricing.completion_per_1k = m.value("completion_per_1k", 0.0);
    r.add(std::move(info));
  }
  return r;
}

void ModelRegistry::add(ModelInfo info) {
  if (info.name.empty()) throw ValidationError("model name is empty");
  if (info.context_tokens < 1) throw ValidationError("model context must be positive");
  if (info.pricing.prompt_per_1k < 0 || info.pricing.completion_per_1k < 0)
    throw ValidationError("model prices must be non-negative");
  auto name = info.name;
  models_[name] = std::move(info);
}

const ModelInfo* ModelRegistry::find(std::string_view name) const {
  auto it = models_.find(name);
  return it == models_.end() ? nullptr : &it->second;
}

std::vector<std::string> ModelRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : models_) out.push_back(k);
  return out;
}

void CostLedger::record(CostEntry e) {
  if (e.prompt_tokens < 0 || e.completion_tokens < 0 || e.cost < 0 || e.nominal_cost < 0)
    throw ValidationError("cost entries must be non-negative");
  std::lock_guard lock(mu_);
  entries_.push_back(std::move(e));
}

// Summed per image in id order so concurrent workers cannot change the
// rounding of the total.
double CostLedger::total() const {
  double t = 0.0;
  for (const auto& [id, c] : per_image()) t += c;
  return t;
}

double CostLedger::nominal_total() const {
  double t = 0.0;
  for (const auto& [id, c] : nominal_per_image()) t += c;
  return t;
}

long CostLedger::total_tokens() const {
  std::lock_guard lock(mu_);
  long t = 0;
  for (const auto& e : entries_) t += e.prompt_tokens + e.completion_tokens;
  return t;
}

std::map<std::string, double> CostLedger::per_image() const {
  std::lock_guard lock(mu_);
  std::map<std::string, double> out;
  for (const auto& e : entries_) out[e.image_id] += e.cost;
  return out;
}

std::map<std::string, double> CostLedger::nominal_per_image() const {
  std::lock_guard lock(mu_);
  std::map<std::string, double> out;
  for (const auto& e : entries_) out[e.image_id] += e.nominal_cost;
  return out;
}

std::vector<CostEntry> CostLedger::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

void CostLedger::clear() {
  std::lock_guard lock(mu_);
  entries_.clear();
}

GatewayConfig GatewayConfig::from_env() {
  GatewayConfig c;
  auto env = [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
  const auto key = env("CC_API_KEY");
  auto endpoint = [&](const char* var) -> std::optional<EndpointConfig> {
    auto url = env(var);
    if (!url) return std::nullopt;
    EndpointConfig e;
    e.base_url = *url;
    e.api_key = key;
    return e;
  };
  c.captioner = endpoint("CC_CAPTIONER_URL");
  c.llm = endpoint("CC_LLM_URL");
  c.embedder = endpoint("CC_EMBED_URL");
  if (auto dir = env("CC_CACHE_DIR")) c.cache_dir = *dir;
  return c;
}

long estimate_tokens(std::string_view text) {
  return static_cast<long>((text.size() + 3) / 4);
}

struct Gateway::Endpoint {
  explicit Endpoint(EndpointConfig c)
      : cfg(std::move(c)), slots(static_cast<std::ptrdiff_t>(cfg.max_parallel)) {}

  detail::HttpResponse post_raw(const std::string& path, const std::string& body) {
    detail::Headers headers;
    if (cfg.api_key) headers.emplace_back("Authorization", "Bearer " + *cfg.api_key);
    slots.acquire();
    struct Release {
      std::counting_semaphore<1024>& s;
      ~Release() { s.release(); }
    } release{slots};
    return detail::post_json_raw(cfg.base_url, path, body, cfg.timeout_s, cfg.max_retries,
                                 headers, cfg.backoff_ms);
  }

  std::string post(const std::string& path, const std::string& body) {
    auto res = post_raw(path, body);
    if (res.status < 200 || res.status >= 300)
      throw TransportError("POST " + cfg.base_url + path + " returned HTTP " +
                           std::to_string(res.status) + ": " + res.body.substr(0, 200));
    return std::move(res.body);
  }

  EndpointConfig cfg;
  std::counting_semaphore<1024> slots;
};

namespace {

std::unique_ptr<Gateway::Endpoint> make_endpoint(const std::optional<EndpointConfig>& c) {
  if (!c) return nullptr;
  c->validate();
  return std::make_unique<Gateway::Endpoint>(*c);
}

json parse_body(const std::string& body, std::string_view service) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw MalformedResponseError(std::string(service) + " response is not JSON: " + e.what());
  }
}

std::vector<std::string> parse_captions(const std::string& body) {
  const auto j = parse_body(body, "captioner");
  if (!j.is_object() || !j.contains("captions") || !j.at("captions").is_array())
    throw MalformedResponseError("captioner response lacks a \"captions\" array");
  std::vector<std::string> out;
  for (const auto& c : j.at("captions")) {
    if (!c.is_string()) throw MalformedResponseError("captioner returned a non-string caption");
    const auto text = std::string(trim(c.get<std::string>()));
    if (text.empty()) throw MalformedResponseError("captioner returned a blank caption");
    out.push_back(text);
  }
  return out;
}

}  // namespace

Gateway::Gateway(GatewayConfig config)
    : config_(std::move(config)),
      cache_(config_.cache_dir),
      captioner_(make_endpoint(config_.captioner)),
      llm_(make_endpoint(config_.llm)),
      embedder_(make_endpoint(config_.embedder)) {}

Gateway::~Gateway() = default;

long Gateway::network_calls() const noexcept {
  return counters_.captioner + counters_.llm + counters_.embedder;
}

const ModelInfo& Gateway::model_info(std::string_view name) const {
  const auto* m = config_.registry.find(name);
  if (!m) throw ValidationError("model '" + std::string(name) + "' is not in the registry");
  return *m;
}

std::string Gateway::caption_request(const ImageRecord& image, const json& payload,
                                     std::int64_t seed) {
  const auto model = config_.captioner ? config_.captioner->model : std::string{};
  const auto key = CacheKey::make("caption", model, payload, seed);
  if (auto hit = cache_.get(key)) {
    ++counters_.cache_hits;
    return *hit;
  }
  if (!captioner_)
    throw TransportError("captioner endpoint not configured and no cached response for " +
                         image.image_id);
  ++counters_.captioner;
  auto body = captioner_->post("/v1/caption", payload.dump());
  parse_captions(body);  // validate before caching
  cache_.put(key, body);
  return body;
}

CandidateSet Gateway::sample_candidates(const ImageRecord& image, int k, double temperature,
                                        std::int64_t seed) {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (!(temperature > 0)) throw ValidationError("temperature must be > 0");
  json payload = {{"image_uri", image.image_uri},
                  {"n", k},
                  {"temperature", temperature},
                  {"beams", nullptr},
                  {"seed", seed}};
  const auto captions = parse_captions(caption_request(image, payload, seed));
  if (static_cast<int>(captions.size()) < k)
    throw ShortResponseError("captioner returned " + std::to_string(captions.size()) +
                             " captions, expected " + std::to_string(k));
  CandidateSet set;
  set.image_id = image.image_id;
  set.temperature = temperature;
  set.k = k;
  for (int i = 0; i < k; ++i)
    set.captions.push_back(Caption{captions[static_cast<std::size_t>(i)], CaptionSource::Sampled,
                                   GenParams{temperature, std::nullopt, seed}});
  return set;
}

Caption Gateway::baseline_caption(const ImageRecord& image, int beams, std::int64_t seed) {
  if (beams < 1) throw ValidationError("beams must be >= 1");
  json payload = {{"image_uri", image.image_uri},
                  {"n", 1},
                  {"temperature", nullptr},
                  {"beams", beams},
                  {"seed", seed}};
  const auto captions = parse_captions(caption_request(image, payload, seed));
  if (captions.empty()) throw ShortResponseError("captioner returned no baseline caption");
  return Caption{captions.front(), CaptionSource::BaselineBeam,
                 GenParams{std::nullopt, beams, seed}};
}

std::string Gateway::complete(std::string_view prompt, const CompletionParams& params) {
  if (trim(prompt).empty()) throw ValidationError("prompt is empty");
  const auto model_name =
      !params.model.empty() ? params.model : (config_.llm ? config_.llm->model : std::string{});
  const auto& info = model_info(model_name);
  if (estimate_tokens(prompt) + params.max_tokens > info.context_tokens)
    throw ContextLengthError("prompt of ~" + std::to_string(estimate_tokens(prompt)) +
                             " tokens plus " + std::to_string(params.max_tokens) +
                             " completion tokens exceeds the " +
                             std::to_string(info.context_tokens) + "-token context of " +
                             model_name);

  json payload = {{"model", model_name},
                  {"prompt", std::string(prompt)},
                  {"max_tokens", params.max_tokens},
                  {"temperature", params.temperature},
                  {"stop", params.stop}};
  const auto key = CacheKey::make("completion", model_name, payload, params.seed);

  auto extract = [&](const std::string& body) {
    const auto j = parse_body(body, "llm");
    try {
      return j.at("choices").at(0).at("text").get<std::string>();
    } catch (const json::exception& e) {
      throw MalformedResponseError(std::string("llm response lacks choices[0].text: ") +
                                   e.what());
    }
  };

  auto record = [&](const std::string& body, const std::string& text, bool cached) {
    const auto j = json::parse(body);
    long prompt_tokens = estimate_tokens(prompt);
    long completion_tokens = estimate_tokens(text);
    if (j.contains("usage") && j.at("usage").is_object()) {
      const auto& u = j.at("usage");
      prompt_tokens = u.value("prompt_tokens", prompt_tokens);
      completion_tokens = u.value("completion_tokens", completion_tokens);
    }
    const double nominal =
        static_cast<double>(prompt_tokens) * info.pricing.prompt_per_1k / 1000.0 +
        static_cast<double>(completion_tokens) * info.pricing.completion_per_1k / 1000.0;
    ledger_.record(CostEntry{params.image_id, model_name, prompt_tokens, completion_tokens,
                             cached ? 0.0 : nominal, cached, nominal});
  };

  if (auto hit = cache_.get(key)) {
    ++counters_.cache_hits;
    auto text = extract(*hit);
    record(*hit, text, true);
    return text;
  }
  if (!llm_) throw TransportError("llm endpoint not configured and no cached completion");
  ++counters_.llm;
  auto res = llm_->post_raw("/v1/completions", payload.dump());
  if (res.status < 200 || res.status >= 300) {
    if (res.body.find("context_length") != std::string::npos ||
        res.body.find("maximum context") != std::string::npos)
      throw ContextLengthError("llm rejected the prompt: " + res.body.substr(0, 200));
    throw TransportError("llm returned HTTP " + std::to_string(res.status) + ": " +
                         res.body.substr(0, 200));
  }
  auto text = extract(res.body);
  record(res.body, text, false);
  cache_.put(key, res.body);
  return text;
}

std::vector<EmbeddingVector> Gateway::embed(const std::vector<std::string>& items,
                                            Modality modality) {
  if (items.empty()) throw ValidationError("embed needs at least one item");
  const auto model = config_.embedder ? config_.embedder->model : std::string{};
  const auto modality_name = std::string(to_string(modality));

  auto key_for = [&](const std::string& item) {
    return CacheKey::make("embed", model, json{{"modality", modality_name}, {"item", item}}, 0);
  };
  auto parse_vec = [](const json& arr) {
    std::vector<double> v;
    if (!arr.is_array()) throw MalformedResponseError("embedding is not an array");
    v.reserve(arr.size());
    for (const auto& x : arr) {
      if (!x.is_number()) throw MalformedResponseError("embedding has a non-numeric entry");
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw MalformedResponseError("embedding has a non-finite entry");
      v.push_back(d);
    }
    return v;
  };

  std::unordered_map<std::string, std::vector<double>> resolved;
  std::vector<std::string> misses;
  for (const auto& item : items) {
    if (resolved.contains(item) ||
        std::find(misses.begin(), misses.end(), item) != misses.end())
      continue;
    if (auto hit = cache_.get(key_for(item))) {
      ++counters_.cache_hits;
      resolved[item] = parse_vec(parse_body(*hit, "embed cache"));
    } else {
      misses.push_back(item);
    }
  }

  if (!misses.empty()) {
    if (!embedder_) throw TransportError("embedder endpoint not configured and cache incomplete");
    const auto limit = config_.embedder->batch_limit;
    for (std::size_t start = 0; start < misses.size(); start += limit) {
      const auto end = std::min(misses.size(), start + limit);
      std::vector<std::string> batch(misses.begin() + static_cast<std::ptrdiff_t>(start),
                                     misses.begin() + static_cast<std::ptrdiff_t>(end));
      json payload = {{"modality", modality_name}, {"items", batch}};
      ++counters_.embedder;
      const auto body = embedder_->post("/v1/embed", payload.dump());
      const auto j = parse_body(body, "embedder");
      if (!j.contains("vectors") || !j.at("vectors").is_array())
        throw MalformedResponseError("embedder response lacks \"vectors\"");
      const auto& vecs = j.at("vectors");
      if (vecs.size() != batch.size())
        throw MalformedResponseError("embedder returned " + std::to_string(vecs.size()) +
                                     " vectors for " + std::to_string(batch.size()) + " items");
      const auto declared = j.value("dim", static_cast<std::size_t>(0));
      for (std::size_t i = 0; i < batch.size(); ++i) {
        auto v = parse_vec(vecs[i]);
        if (v.empty() || (declared && v.size() != declared))
          throw DimensionMismatchError("embedder returned a vector of dim " +
                                       std::to_string(v.size()) + ", declared " +
                                       std::to_string(declared));
        cache_.put(key_for(batch[i]), json(v).dump());
        resolved[batch[i]] = std::move(v);
      }
    }
  }

  std::vector<EmbeddingVector> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    out.push_back(EmbeddingVector{resolved.at(item), modality});
    if (out.back().dim() != out.front().dim())
      throw DimensionMismatchError("embedder returned inconsistent dimensions (" +
                                   std::to_string(out.front().dim()) + " vs " +
                                   std::to_string(out.back().dim()) + ")");
  }
  return out;
}

}  // namespace capcom::gateway
