#include "capcom/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "capcom/dataset.hpp"
#include "capcom/errors.hpp"
#include "capcom/text.hpp"

namespace capcom::calibration {

using nlohmann::json;

namespace {

std::map<std::string, double> ngram_counts(const std::vector<std::string>& pool) {
  std::map<std::string, double> counts;
  for (const auto& caption : pool) {
    const auto toks = tokenize(caption);
    for (std::size_t i = 0; i < toks.size(); ++i) {
      counts[toks[i]] += 1.0;
      if (i + 1 < toks.size()) counts[toks[i] + '\x1f' + toks[i + 1]] += 1.0;
    }
  }
  return counts;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

double ngram_js_divergence(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const auto pa = ngram_counts(a);
  const auto pb = ngram_counts(b);
  double na = 0.0, nb = 0.0;
  for (const auto& [_, c] : pa) na += c;
  for (const auto& [_, c] : pb) nb += c;
  if (na == 0.0 || nb == 0.0) throw ValidationError("JS divergence needs two non-empty caption pools");

  std::set<std::string> keys;
  for (const auto& [k, _] : pa) keys.insert(k);
  for (const auto& [k, _] : pb) keys.insert(k);
  double js = 0.0;
  for (const auto& k : keys) {
    auto ia = pa.find(k);
    auto ib = pb.find(k);
    const double p = ia == pa.end() ? 0.0 : ia->second / na;
    const double q = ib == pb.end() ? 0.0 : ib->second / nb;
    const double m = 0.5 * (p + q);
    if (p > 0) js += 0.5 * p * std::log2(p / m);
    if (q > 0) js += 0.5 * q * std::log2(q / m);
  }
  return std::clamp(js, 0.0, 1.0);
}

Metric js_ngram_metric() { return {"js-ngram-1-2", ngram_js_divergence}; }

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 12; ++i) g.push_back((20 + 15 * i) / 100.0);
  return g;
}

void SweepSpec::validate() const {
  if (grid.empty()) throw ValidationError("temperature grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 2.0)) throw ValidationError("grid temperatures must lie in [0, 2]");
    if (i && !(grid[i] > grid[i - 1])) throw ValidationError("grid must be strictly increasing");
  }
  if (samples_per_point < 1) throw ValidationError("samples_per_point must be >= 1");
  if (max_images < 1) throw ValidationError("max_images must be >= 1");
  if (!metric.fn) throw ValidationError("sweep metric is not set");
}

SampleFn sampler(gateway::Gateway& gw) {
  return [&gw](const ImageRecord& img, int n, double t, std::int64_t seed) {
    return gw.sample_candidates(img, n, t, seed).texts();
  };
}

double best_temperature(const std::vector<CurvePoint>& curve) {
  if (curve.empty()) throw InsufficientDataError("empty calibration curve");
  const CurvePoint* best = &curve.front();
  for (const auto& p : curve)
    if (p.distance < best->distance || (p.distance == best->distance && p.t < best->t)) best = &p;
  return best->t;
}

SweepResult calibrate_temperature(const DatasetSplit& split, const SweepSpec& spec,
                                  const SampleFn& sample) {
  spec.validate();
  if (split.size() == 0) throw InsufficientDataError("calibration split is empty");
  std::vector<const ImageRecord*> images;
  if (split.size() > spec.max_images) {
    for (const auto& id : sample_ids(split, spec.max_images, spec.seed)) images.push_back(split.find(id));
  } else {
    for (const auto& rec : split) images.push_back(&rec);
  }
  std::vector<std::string> refs;
  for (const auto* img : images)
    refs.insert(refs.end(), img->references.begin(), img->references.end());

  SweepResult r;
  r.metric = spec.metric.name;
  for (double t : spec.grid) {
    std::vector<std::string> pool;
    for (const auto* img : images) {
      auto s = sample(*img, spec.samples_per_point, t, static_cast<std::int64_t>(spec.seed));
      pool.insert(pool.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
    }
    r.curve.push_back({t, spec.metric.fn(pool, refs)});
  }
  r.best_t = best_temperature(r.curve);
  return r;
}

std::string curve_csv(const SweepResult& r) {
  std::string out = "t,distance\n";
  for (const auto& p : r.curve) out += fmt(p.t) + "," + fmt(p.distance) + "\n";
  return out;
}

json sweep_json(const SweepResult& r) {
  json curve = json::array();
  for (const auto& p : r.curve) curve.push_back({{"t", p.t}, {"distance", p.distance}});
  return {{"best_t", r.best_t}, {"metric", r.metric}, {"curve", curve}};
}

std::vector<KAblationRow> k_ablation(const DatasetSplit& split, std::vector<int> k_grid,
                                     gateway::Gateway& gw, const pipeline::GenerateConfig& base,
                                     const pipeline::EvaluateConfig& eval,
                                     const pipeline::EmbedFn& embed) {
  if (k_grid.empty()) throw ValidationError("k grid is empty");
  std::sort(k_grid.begin(), k_grid.end());
  if (std::adjacent_find(k_grid.begin(), k_grid.end()) != k_grid.end())
    throw ValidationError("k grid has duplicates");
  if (k_grid.front() < 1) throw ValidationError("k values must be positive");

  std::vector<KAblationRow> rows;
  for (int k : k_grid) {
    auto cfg = base;
    cfg.k = k;
    const auto before = gw.ledger().entries().size();
    const auto gen = pipeline::generate(split, gw, cfg);
    const auto entries = gw.ledger().entries();
    double nominal = 0.0;
    for (std::size_t i = before; i < entries.size(); ++i) nominal += entries[i].nominal_cost;

    KAblationRow row;
    row.k = k;
    row.failures = gen.failures.size();
    if (gen.rows.empty()) throw InsufficientDataError("every image failed for k=" + std::to_string(k));
    row.mean_cost = nominal / static_cast<double>(gen.rows.size());
    auto ecfg = eval;
    ecfg.metrics = pipeline::MetricSet::none();
    ecfg.metrics.recall = true;
    ecfg.metrics.coverage = true;
    const auto report = pipeline::evaluate(gen.rows, split, ecfg, embed);
    const auto& comm = report.systems.back();
    if (comm.recall) row.mrr = comm.recall->mrr;
    if (comm.coverage) {
      row.noun_recall = comm.coverage->noun_exact;
      row.verb_recall = comm.coverage->verb_exact;
      row.fuzzy_noun = comm.coverage->noun_fuzzy;
      row.fuzzy_verb = comm.coverage->verb_fuzzy;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string k_ablation_csv(const std::vector<KAblationRow>& rows) {
  std::string out = "k,mrr,noun_recall,verb_recall,fuzzy_noun,fuzzy_verb,mean_cost\n";
  for (const auto& r : rows)
    out += std::to_string(r.k) + "," + (r.mrr ? fmt(*r.mrr) : std::string()) + "," +
           fmt(r.noun_recall) + "," + fmt(r.verb_recall) + "," + fmt(r.fuzzy_noun) + "," +
           fmt(r.fuzzy_verb) + "," + fmt(r.mean_cost) + "\n";
  return out;
}

json k_ablation_json(const std::vector<KAblationRow>& rows) {
  json out = json::array();
  for (const auto& r : rows)
    out.push_back({{"k", r.k},
                   {"mrr", r.mrr ? json(*r.mrr) : json(nullptr)},
                   {"noun_recall", r.noun_recall},
                   {"verb_recall", r.verb_recall},
                   {"fuzzy_noun", r.fuzzy_noun},
                   {"fuzzy_verb", r.fuzzy_verb},
                   {"mean_cost", r.mean_cost},
                   {"failures", r.failures}});
  return out;
}

}  // namespace capcom::calibration
