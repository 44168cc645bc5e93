#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "capcom/gateway.hpp"
#include "capcom/pipeline.hpp"
#include "capcom/types.hpp"

namespace capcom::calibration {

// Distance between a pool of sampled captions and a pool of references.
using DistanceFn = std::function<double(const std::vector<std::string>& sampled,
                                        const std::vector<std::string>& references)>;

struct Metric {
  std::string name;
  DistanceFn fn;
};

// Jensen-Shannon divergence (base 2, so in [0, 1]) between pooled unigram and
// bigram frequency distributions of the two caption pools.
double ngram_js_divergence(const std::vector<std::string>& a, const std::vector<std::string>& b);
Metric js_ngram_metric();

// 0.20, 0.35, ..., 2.00 (13 points).
std::vector<double> default_grid();

struct SweepSpec {
  std::vector<double> grid = default_grid();
  int samples_per_point = 10;
  std::size_t max_images = 100;
  Metric metric = js_ngram_metric();
  std::uint64_t seed = 0;

  void validate() const;
};

struct CurvePoint {
  double t = 0.0;
  double distance = 0.0;
  bool operator==(const CurvePoint&) const = default;
};

struct SweepResult {
  double best_t = 0.0;
  std::vector<CurvePoint> curve;
  std::string metric;
};

using SampleFn = std::function<std::vector<std::string>(const ImageRecord&, int n, double t,
                                                        std::int64_t seed)>;
SampleFn sampler(gateway::Gateway& gw);

// argmin over the curve; ties go to the lower temperature.
double best_temperature(const std::vector<CurvePoint>& curve);

// For each grid temperature, samples `samples_per_point` captions for up to
// `max_images` images and scores the pooled samples against the pooled
// references. Sampling goes through the caller's sampler, so a cached
// gateway makes an interrupted sweep resume without repeating requests.
SweepResult calibrate_temperature(const DatasetSplit& split, const SweepSpec& spec,
                                  const SampleFn& sample);

std::string curve_csv(const SweepResult& r);
nlohmann::json sweep_json(const SweepResult& r);

struct KAblationRow {
  int k = 0;
  std::optional<double> mrr;
  double noun_recall = 0.0;  // exact
  double verb_recall = 0.0;  // exact
  double fuzzy_noun = 0.0;
  double fuzzy_verb = 0.0;
  double mean_cost = 0.0;  // nominal LLM cost per image
  std::size_t failures = 0;
};

// Runs generation and evaluation once per k (each k draws its own candidate
// request). Rows come back sorted by k, whatever the input order.
std::vector<KAblationRow> k_ablation(const DatasetSplit& split, std::vector<int> k_grid,
                                     gateway::Gateway& gw, const pipeline::GenerateConfig& base,
                                     const pipeline::EvaluateConfig& eval,
                                     const pipeline::EmbedFn& embed);

std::string k_ablation_csv(const std::vector<KAblationRow>& rows);
nlohmann::json k_ablation_json(const std::vector<KAblationRow>& rows);

}  // namespace capcom::calibration
