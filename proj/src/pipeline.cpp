#include "capcom/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <map>
#include <thread>

#include "capcom/dataset.hpp"
#include "capcom/errors.hpp"
#include "capcom/hashing.hpp"
#include "capcom/io.hpp"
#include "capcom/stats.hpp"
#include "capcom/text.hpp"

namespace capcom::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

double default_temperature(std::string_view captioner) {
  return to_lower(captioner).find("ofa") != std::string::npos ? 0.95 : 1.15;
}

CandidateSource parse_candidate_source(std::string_view s) {
  if (s == "sampled" || s == "captioner") return CandidateSource::Sampled;
  if (s == "references") return CandidateSource::References;
  throw ValidationError("unknown candidate source: " + std::string(s));
}

std::string to_string(CandidateSource s) {
  return s == CandidateSource::Sampled ? "sampled" : "references";
}

void GenerateConfig::validate() const {
  if (k < 1) throw ValidationError("k must be >= 1");
  if (!(temperature > 0)) throw ValidationError("temperature must be > 0");
  if (baseline_beams < 1) throw ValidationError("baseline_beams must be >= 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  guard.validate();
}

json GenerateConfig::to_json() const {
  return {{"captioner", captioner},
          {"k", k},
          {"temperature", temperature},
          {"baseline_beams", baseline_beams},
          {"source", pipeline::to_string(source)},
          {"variant", prompt::to_json(variant)},
          {"guard",
           {{"max_commas", guard.max_commas},
            {"max_regen", guard.max_regen},
            {"regen_temperature", guard.regen_temperature}}},
          {"llm",
           {{"model", llm.model},
            {"max_tokens", llm.max_tokens},
            {"temperature", llm.temperature},
            {"stop", llm.stop}}},
          {"seed", seed}};
}

// ---- captions file

namespace {

std::string row_line(const CaptionRow& row) {
  ordered_json j;
  j["image_id"] = row.image_id;
  j["baseline"] = row.baseline;
  j["candidates"] = row.candidates;
  j["summary"] = row.summary;
  ordered_json flags;
  flags["uncertain_language_present"] = row.flags.uncertain_language_present;
  flags["comma_guard_exhausted"] = row.flags.comma_guard_exhausted;
  flags["guard_retries"] = row.guard_retries;
  j["flags"] = flags;
  return j.dump();
}

}  // namespace

json row_to_json(const CaptionRow& row) { return json::parse(row_line(row)); }

CaptionRow row_from_json(const json& j) {
  CaptionRow row;
  row.image_id = j.at("image_id").get<std::string>();
  row.baseline = j.at("baseline").get<std::string>();
  row.candidates = j.at("candidates").get<std::vector<std::string>>();
  row.summary = j.at("summary").get<std::string>();
  if (j.contains("flags")) {
    const auto& f = j.at("flags");
    row.flags.uncertain_language_present = f.value("uncertain_language_present", false);
    row.flags.comma_guard_exhausted = f.value("comma_guard_exhausted", false);
    row.guard_retries = f.value("guard_retries", 0);
  }
  if (row.image_id.empty()) throw ValidationError("caption row has empty image_id");
  return row;
}

std::vector<CaptionRow> parse_captions(std::string_view jsonl) {
  std::vector<CaptionRow> rows;
  std::set<std::string> seen;
  std::size_t pos = 0, line_no = 0;
  while (pos < jsonl.size()) {
    auto end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const auto line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto row = row_from_json(json::parse(line));
      if (!seen.insert(row.image_id).second) throw DuplicateIdError(row.image_id);
      rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw ParseError("line " + std::to_string(line_no), e.what());
    }
  }
  return rows;
}

std::vector<CaptionRow> read_captions(const std::filesystem::path& path) {
  return parse_captions(read_file(path));
}

std::string captions_to_jsonl(std::vector<CaptionRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const CaptionRow& a, const CaptionRow& b) { return a.image_id < b.image_id; });
  std::string out;
  for (const auto& r : rows) out += row_line(r) + "\n";
  return out;
}

// ---- generation

GenerateResult generate(const DatasetSplit& split, gateway::Gateway& gw,
                        const GenerateConfig& config, std::vector<CaptionRow> done) {
  config.validate();
  std::map<std::string, CaptionRow> rows;
  for (auto& r : done) rows.emplace(r.image_id, std::move(r));

  std::vector<const ImageRecord*> todo;
  for (const auto& rec : split)
    if (!rows.count(rec.image_id)) todo.push_back(&rec);

  std::vector<std::optional<CaptionRow>> results(todo.size());
  std::vector<std::string> errors(todo.size());
  const auto complete = prompt::completer(gw);

  auto process = [&](std::size_t i) {
    const ImageRecord& img = *todo[i];
    CaptionRow row;
    row.image_id = img.image_id;
    if (config.source == CandidateSource::References) {
      row.baseline = img.references.front();
      row.candidates = img.references;
    } else {
      row.baseline = gw.baseline_caption(img, config.baseline_beams, config.seed).text;
      row.candidates = gw.sample_candidates(img, config.k, config.temperature, config.seed).texts();
    }
    auto params = config.llm;
    params.seed = config.seed;
    const auto sr = prompt::summarize(complete, img.image_id, row.candidates, config.variant,
                                      config.guard, params);
    row.summary = sr.summary_text;
    row.flags = sr.flags;
    row.guard_retries = sr.guard_retries;
    results[i] = std::move(row);
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < todo.size(); i = next++) {
      try {
        process(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.workers), todo.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    if (n_threads > 0) worker();
  }

  GenerateResult out;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    if (results[i]) rows.emplace(todo[i]->image_id, std::move(*results[i]));
    else out.failures.push_back({todo[i]->image_id, errors[i]});
  }
  for (auto& [_, r] : rows) out.rows.push_back(std::move(r));
  std::sort(out.failures.begin(), out.failures.end(),
            [](const ImageFailure& a, const ImageFailure& b) { return a.image_id < b.image_id; });
  return out;
}

// ---- evaluation

MetricSet parse_metric_set(std::string_view s) {
  if (s == "all") return MetricSet::all();
  MetricSet m = MetricSet::none();
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto end = s.find(',', pos);
    if (end == std::string_view::npos) end = s.size();
    const auto name = trim(s.substr(pos, end - pos));
    pos = end + 1;
    if (name.empty()) continue;
    if (name == "recall") m.recall = true;
    else if (name == "coverage") m.coverage = true;
    else if (name == "ngram") m.ngram = true;
    else if (name == "diagnostics") m.diagnostics = true;
    else throw ValidationError("unknown metric set entry: " + std::string(name));
  }
  return m;
}

EmbedFn embedder(gateway::Gateway& gw) {
  return [&gw](const std::vector<std::string>& items, Modality m) { return gw.embed(items, m); };
}

EvaluationReport evaluate(const std::vector<CaptionRow>& rows_in, const DatasetSplit& split,
                          const EvaluateConfig& config, const EmbedFn& embed) {
  EvaluationReport report;
  auto rows = rows_in;
  std::sort(rows.begin(), rows.end(),
            [](const CaptionRow& a, const CaptionRow& b) { return a.image_id < b.image_id; });
  report.images = rows.size();
  if (config.metrics.empty()) return report;
  if (rows.empty()) throw InsufficientDataError("no caption rows to evaluate");

  std::vector<const ImageRecord*> records;
  std::vector<std::string> ids;
  for (const auto& r : rows) {
    const auto* rec = split.find(r.image_id);
    if (!rec) throw UnknownIdError(r.image_id);
    records.push_back(rec);
    ids.push_back(r.image_id);
  }
  std::vector<std::vector<std::string>> refs;
  for (const auto* rec : records) refs.push_back(rec->references);

  const std::vector<std::pair<std::string, std::vector<std::string>>> systems = [&] {
    std::vector<std::string> base, comm;
    for (const auto& r : rows) {
      base.push_back(r.baseline);
      comm.push_back(r.summary);
    }
    return std::vector<std::pair<std::string, std::vector<std::string>>>{{"baseline", base},
                                                                         {"committee", comm}};
  }();

  // Recall inputs.
  std::optional<std::vector<EmbeddingVector>> image_vecs;
  if (config.metrics.recall) {
    if (!embed) {
      report.notices.push_back("recall skipped: no embedding endpoint configured");
    } else {
      try {
        std::vector<std::string> uris;
        for (const auto* rec : records) uris.push_back(rec->image_uri);
        image_vecs = embed(uris, Modality::Image);
      } catch (const TransportError& e) {
        report.notices.push_back(std::string("recall skipped: embedding endpoint unavailable (") +
                                 e.what() + ")");
      }
    }
  }

  // Coverage inputs.
  coverage::LexiconAnnotator lexicon;
  const coverage::Annotator& annotator =
      config.annotator ? *config.annotator : static_cast<const coverage::Annotator&>(lexicon);
  coverage::EmbeddingTable no_vectors;
  const auto& vectors = config.word_vectors ? *config.word_vectors : no_vectors;
  std::vector<std::vector<coverage::LinguisticAnnotation>> ref_ann;
  if (config.metrics.coverage || config.metrics.diagnostics) {
    for (const auto& rs : refs) {
      std::vector<coverage::LinguisticAnnotation> a;
      for (const auto& r : rs) a.push_back(annotator.annotate(r));
      ref_ann.push_back(std::move(a));
    }
    if (vectors.empty())
      report.notices.push_back("fuzzy coverage uses exact matching only: no word vectors loaded");
  }

  for (const auto& [name, texts] : systems) {
    SystemMetrics sm;
    sm.name = name;
    sm.llop = coverage::llop(texts);
    sm.length = coverage::length_stats(texts);
    if (image_vecs) {
      try {
        const auto text_vecs = embed(texts, Modality::Text);
        sm.recall = recall::recall_stats(recall::build_score_matrix(ids, *image_vecs, text_vecs).clipped);
      } catch (const TransportError& e) {
        report.notices.push_back("recall skipped for " + name + ": " + e.what());
      }
    }
    if (config.metrics.coverage || config.metrics.diagnostics) {
      std::vector<coverage::CoverageInput> inputs;
      for (std::size_t i = 0; i < texts.size(); ++i)
        inputs.push_back({ids[i], annotator.annotate(texts[i]), ref_ann[i]});
      sm.coverage = coverage::coverage_report(inputs, vectors, config.phi);
    }
    if (config.metrics.ngram) {
      try {
        sm.ngram = ngram::score_corpus(texts, refs);
      } catch (const InsufficientDataError& e) {
        report.notices.push_back("n-gram metrics skipped for " + name + ": " + e.what());
      }
    }
    report.systems.push_back(std::move(sm));
  }

  if (config.metrics.diagnostics) {
    Diagnostics d;
    const auto& comm = report.systems.back();
    std::vector<double> sb_all;
    std::vector<double> sb_r, rr, sb_n, noun, sb_v, verb;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].candidates.size() < 2) continue;
      const double sb = ngram::self_bleu(rows[i].candidates);
      sb_all.push_back(sb);
      if (comm.recall) {
        sb_r.push_back(sb);
        rr.push_back(1.0 / comm.recall->per_image_rank[i]);
      }
      if (comm.coverage) {
        const auto& pc = comm.coverage->per_image[i].exact;
        if (pc.noun) {
          sb_n.push_back(sb);
          noun.push_back(*pc.noun);
        }
        if (pc.verb) {
          sb_v.push_back(sb);
          verb.push_back(*pc.verb);
        }
      }
    }
    auto corr = [&](const std::vector<double>& a, const std::vector<double>& b,
                    const char* what) -> std::optional<double> {
      try {
        return stats::pearson_r(a, b);
      } catch (const InsufficientDataError& e) {
        report.notices.push_back(std::string("correlation with ") + what + " undefined: " + e.what());
        return std::nullopt;
      }
    };
    if (!sb_all.empty()) d.mean_self_bleu = stats::mean(sb_all);
    d.r_self_bleu_mrr = corr(sb_r, rr, "reciprocal rank");
    d.r_self_bleu_noun = corr(sb_n, noun, "noun recall");
    d.r_self_bleu_verb = corr(sb_v, verb, "verb recall");
    report.diagnostics = d;
    if (!config.metrics.coverage)
      for (auto& s : report.systems) s.coverage.reset();
  }
  return report;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(double v, int places = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

}  // namespace

json report_to_json(const EvaluationReport& r) {
  json systems = json::array();
  for (const auto& s : r.systems) {
    json j = {{"name", s.name},
              {"llop", s.llop},
              {"length", {{"mean_chars", s.length.mean_chars}, {"mean_commas", s.length.mean_commas}}},
              {"recall", nullptr},
              {"coverage", nullptr},
              {"ngram", nullptr}};
    if (s.recall) {
      json per = json::array();
      for (std::size_t i = 0; i < s.recall->image_ids.size(); ++i)
        per.push_back({{"image_id", s.recall->image_ids[i]}, {"rank", s.recall->per_image_rank[i]}});
      j["recall"] = {{"mrr", s.recall->mrr},
                     {"r_at_1", s.recall->r_at.at(1)},
                     {"r_at_5", s.recall->r_at.at(5)},
                     {"r_at_10", s.recall->r_at.at(10)},
                     {"per_image", per}};
    }
    if (s.coverage) {
      json per = json::array();
      for (const auto& p : s.coverage->per_image)
        per.push_back({{"image_id", p.image_id},
                       {"noun_exact", opt(p.exact.noun)},
                       {"verb_exact", opt(p.exact.verb)},
                       {"noun_fuzzy", opt(p.fuzzy.noun)},
                       {"verb_fuzzy", opt(p.fuzzy.verb)}});
      j["coverage"] = {{"noun_exact", s.coverage->noun_exact},
                       {"verb_exact", s.coverage->verb_exact},
                       {"noun_fuzzy", s.coverage->noun_fuzzy},
                       {"verb_fuzzy", s.coverage->verb_fuzzy},
                       {"excluded_noun", s.coverage->excluded_noun},
                       {"excluded_verb", s.coverage->excluded_verb},
                       {"per_image", per}};
    }
    if (s.ngram) {
      j["ngram"] = {{"bleu4", s.ngram->bleu4},
                    {"cider", s.ngram->cider},
                    {"rouge_l", s.ngram->rouge_l},
                    {"meteor", nullptr},
                    {"mauve", nullptr}};
    }
    systems.push_back(std::move(j));
  }
  json out = {{"images", r.images}, {"systems", systems}, {"notices", r.notices},
              {"diagnostics", nullptr}};
  if (r.diagnostics) {
    out["diagnostics"] = {{"mean_self_bleu", r.diagnostics->mean_self_bleu},
                          {"r_self_bleu_mrr", opt(r.diagnostics->r_self_bleu_mrr)},
                          {"r_self_bleu_noun", opt(r.diagnostics->r_self_bleu_noun)},
                          {"r_self_bleu_verb", opt(r.diagnostics->r_self_bleu_verb)}};
  }
  return out;
}

std::string report_to_markdown(const EvaluationReport& r, bool paper_layout) {
  std::string md = "# Evaluation (" + std::to_string(r.images) + " images)\n";
  const bool any_recall = std::any_of(r.systems.begin(), r.systems.end(),
                                      [](const SystemMetrics& s) { return s.recall.has_value(); });
  if (any_recall) {
    md += "\n## CLIP recall\n\n";
    if (paper_layout) {
      md += "| Model | MRR | R@1 | R@5 | R@10 |\n|---|---|---|---|---|\n";
      for (const auto& s : r.systems)
        if (s.recall)
          md += "| " + s.name + " | " + fmt(s.recall->mrr) + " | " + fmt(s.recall->r_at.at(1)) +
                " | " + fmt(s.recall->r_at.at(5)) + " | " + fmt(s.recall->r_at.at(10)) + " |\n";
    } else {
      md += "| Model | R@1 | R@5 | R@10 | MRR |\n|---|---|---|---|---|\n";
      for (const auto& s : r.systems)
        if (s.recall)
          md += "| " + s.name + " | " + fmt(s.recall->r_at.at(1)) + " | " +
                fmt(s.recall->r_at.at(5)) + " | " + fmt(s.recall->r_at.at(10)) + " | " +
                fmt(s.recall->mrr) + " |\n";
    }
  }
  const bool any_cov = std::any_of(r.systems.begin(), r.systems.end(),
                                   [](const SystemMetrics& s) { return s.coverage.has_value(); });
  if (any_cov) {
    md += "\n## Content coverage\n\n| Model | Exact Noun | Exact Verb | Fuzzy Noun | Fuzzy Verb |\n"
          "|---|---|---|---|---|\n";
    for (const auto& s : r.systems)
      if (s.coverage)
        md += "| " + s.name + " | " + fmt(s.coverage->noun_exact) + " | " +
              fmt(s.coverage->verb_exact) + " | " + fmt(s.coverage->noun_fuzzy) + " | " +
              fmt(s.coverage->verb_fuzzy) + " |\n";
  }
  const bool any_ngram = std::any_of(r.systems.begin(), r.systems.end(),
                                     [](const SystemMetrics& s) { return s.ngram.has_value(); });
  if (any_ngram) {
    md += "\n## N-gram metrics\n\n| Model | BLEU@4 | CIDEr | ROUGE-L | METEOR | MAUVE |\n"
          "|---|---|---|---|---|---|\n";
    for (const auto& s : r.systems)
      if (s.ngram)
        md += "| " + s.name + " | " + fmt(s.ngram->bleu4) + " | " + fmt(s.ngram->cider) + " | " +
              fmt(s.ngram->rouge_l) + " | - | - |\n";
  }
  if (!r.systems.empty()) {
    md += "\n## Caption style\n\n| Model | LLOP (%) | Mean chars | Mean commas |\n|---|---|---|---|\n";
    for (const auto& s : r.systems)
      md += "| " + s.name + " | " + fmt(100.0 * s.llop, 1) + " | " + fmt(s.length.mean_chars, 1) +
            " | " + fmt(s.length.mean_commas, 2) + " |\n";
  }
  if (r.diagnostics) {
    auto o = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("n/a"); };
    md += "\n## Candidate diversity\n\n| Mean Self-BLEU | r(MRR) | r(Noun) | r(Verb) |\n"
          "|---|---|---|---|\n| " +
          fmt(r.diagnostics->mean_self_bleu) + " | " + o(r.diagnostics->r_self_bleu_mrr) + " | " +
          o(r.diagnostics->r_self_bleu_noun) + " | " + o(r.diagnostics->r_self_bleu_verb) + " |\n";
  }
  if (!r.notices.empty()) {
    md += "\n## Notices\n\n";
    for (const auto& n : r.notices) md += "- " + n + "\n";
  }
  return md;
}

// ---- manifests

json RunManifest::to_json() const {
  return {{"run_id", run_id},
          {"command", command},
          {"config", config},
          {"dataset_fingerprint", dataset_fingerprint},
          {"tool_version", tool_version},
          {"cost", cost}};
}

std::string make_run_id(std::string_view command, const json& config,
                        std::string_view dataset_fingerprint) {
  const json key = {{"command", command}, {"config", config}, {"dataset", dataset_fingerprint}};
  return sha256_hex(key.dump()).substr(0, 12);
}

json cost_summary(const gateway::CostLedger& ledger, std::size_t images) {
  long prompt_tokens = 0, completion_tokens = 0;
  for (const auto& e : ledger.entries()) {
    prompt_tokens += e.prompt_tokens;
    completion_tokens += e.completion_tokens;
  }
  const double total = ledger.nominal_total();
  return {{"currency", "USD"},
          {"llm_cost", total},
          {"llm_cost_per_image", images ? total / static_cast<double>(images) : 0.0},
          {"prompt_tokens", prompt_tokens},
          {"completion_tokens", completion_tokens}};
}

json endpoint_snapshot(const gateway::GatewayConfig& gw) {
  auto ep = [](const std::optional<gateway::EndpointConfig>& e) -> json {
    if (!e) return nullptr;
    return {{"base_url", e->base_url}, {"model", e->model}};
  };
  return {{"captioner", ep(gw.captioner)}, {"llm", ep(gw.llm)}, {"embedder", ep(gw.embedder)}};
}

namespace {

json endpoint_models(const gateway::GatewayConfig& gw) {
  auto m = [](const std::optional<gateway::EndpointConfig>& e) -> json {
    return e ? json(e->model) : json(nullptr);
  };
  return {{"captioner", m(gw.captioner)}, {"llm", m(gw.llm)}, {"embedder", m(gw.embedder)}};
}

void write_json(const std::filesystem::path& p, const json& j) {
  write_file_atomic(p, j.dump(2) + "\n");
}

}  // namespace

CommandResult cmd_generate(const DatasetSplit& split, gateway::Gateway& gw,
                           const GenerateCommand& cmd) {
  cmd.config.validate();
  const auto fp = fingerprint(split);
  // Endpoint URLs are recorded but do not change the run identity.
  const json id_config = {{"generate", cmd.config.to_json()},
                          {"models", endpoint_models(gw.config())}};
  RunManifest manifest;
  manifest.command = "generate";
  manifest.run_id = make_run_id(manifest.command, id_config, fp);
  manifest.config = {{"generate", cmd.config.to_json()}, {"endpoints", endpoint_snapshot(gw.config())}};
  manifest.dataset_fingerprint = fp;

  CommandResult result;
  result.run_id = manifest.run_id;
  result.run_dir = cmd.runs_dir / manifest.run_id;
  std::filesystem::create_directories(result.run_dir);
  write_json(result.run_dir / "manifest.json", manifest.to_json());

  const auto captions_path = result.run_dir / "captions.jsonl";
  std::vector<CaptionRow> done;
  if (std::filesystem::exists(captions_path)) done = read_captions(captions_path);

  const auto before = gw.ledger().entries().size();
  auto gen = generate(split, gw, cmd.config, std::move(done));
  gateway::CostLedger run_ledger;
  const auto entries = gw.ledger().entries();
  for (std::size_t i = before; i < entries.size(); ++i) run_ledger.record(entries[i]);

  const auto jsonl = captions_to_jsonl(gen.rows);
  write_file_atomic(captions_path, jsonl);
  if (cmd.out) write_file_atomic(*cmd.out, jsonl);

  manifest.cost = cost_summary(run_ledger, split.size());
  json j = manifest.to_json();
  json failures = json::array();
  for (const auto& f : gen.failures) {
    failures.push_back({{"image_id", f.image_id}, {"error", f.message}});
    std::cerr << "generate: " << f.image_id << ": " << f.message << "\n";
  }
  j["failures"] = failures;
  write_json(result.run_dir / "manifest.json", j);
  result.failures = std::move(gen.failures);
  return result;
}

CommandResult cmd_evaluate(const DatasetSplit& split, const EvaluateCommand& cmd,
                           const EmbedFn& embed, const gateway::GatewayConfig* endpoints) {
  const auto captions_text = read_file(cmd.captions);
  const auto rows = parse_captions(captions_text);
  const auto fp = fingerprint(split);
  const auto& m = cmd.config.metrics;
  coverage::LexiconAnnotator lexicon;
  const auto annotator_version =
      cmd.config.annotator ? cmd.config.annotator->version() : lexicon.version();
  json cfg = {{"metrics",
               {{"recall", m.recall}, {"coverage", m.coverage}, {"ngram", m.ngram},
                {"diagnostics", m.diagnostics}}},
              {"phi", cmd.config.phi},
              {"annotator", annotator_version},
              {"word_vectors",
               cmd.config.word_vectors
                   ? json{{"size", cmd.config.word_vectors->size()}, {"dim", cmd.config.word_vectors->dim()}}
                   : json(nullptr)},
              {"captions_digest", sha256_hex(captions_text)},
              {"paper_tables", cmd.paper_tables},
              {"models", endpoints ? endpoint_models(*endpoints) : json(nullptr)}};

  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.run_id = make_run_id(manifest.command, cfg, fp);
  manifest.config = cfg;
  if (endpoints) manifest.config["endpoints"] = endpoint_snapshot(*endpoints);
  manifest.dataset_fingerprint = fp;

  CommandResult result;
  result.run_id = manifest.run_id;
  result.run_dir = cmd.runs_dir / manifest.run_id;
  std::filesystem::create_directories(result.run_dir);
  write_json(result.run_dir / "manifest.json", manifest.to_json());

  if (!m.empty()) {
    const auto report = evaluate(rows, split, cmd.config, embed);
    for (const auto& n : report.notices) std::cerr << "evaluate: " << n << "\n";
    json rj = report_to_json(report);
    rj["run_id"] = manifest.run_id;
    write_json(result.run_dir / "report.json", rj);
    write_file_atomic(result.run_dir / "report.md",
                      "<!-- run " + manifest.run_id + " -->\n" +
                          report_to_markdown(report, cmd.paper_tables));
  }
  gateway::CostLedger none;
  manifest.cost = cost_summary(none, rows.size());
  write_json(result.run_dir / "manifest.json", manifest.to_json());
  return result;
}

DatasetSplit cmd_build_hard_split(const json& report, const DatasetSplit& split, std::size_t n,
                                  const std::string& model, const std::string& system) {
  const json* sys = nullptr;
  for (const auto& s : report.at("systems"))
    if (s.at("name") == system) sys = &s;
  if (!sys) throw ValidationError("report has no system named " + system);
  if (sys->at("recall").is_null()) throw ValidationError("report has no recall section for " + system);
  recall::RecallReport rr;
  for (const auto& p : sys->at("recall").at("per_image")) {
    rr.image_ids.push_back(p.at("image_id").get<std::string>());
    rr.per_image_rank.push_back(p.at("rank").get<int>());
  }
  rr.mrr = sys->at("recall").at("mrr").get<double>();
  return recall::build_hard_split(rr, split, n, "hard-mrr-" + model);
}

}  // namespace capcom::pipeline
