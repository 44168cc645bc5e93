#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "capcom/coverage.hpp"
#include "capcom/embedding.hpp"
#include "capcom/gateway.hpp"
#include "capcom/ngram.hpp"
#include "capcom/prompt.hpp"
#include "capcom/recall.hpp"
#include "capcom/types.hpp"

namespace capcom::pipeline {

inline constexpr std::string_view kToolVersion = "capcom 0.1.0";

// Default sampling temperature for a captioner name: 0.95 for OFA-like
// models, 1.15 otherwise (BLIP-like).
double default_temperature(std::string_view captioner);

enum class CandidateSource { Sampled, References };
CandidateSource parse_candidate_source(std::string_view s);
std::string to_string(CandidateSource s);

struct GenerateConfig {
  std::string captioner = "blip";  // label recorded in manifests and tables
  int k = 10;
  double temperature = 1.15;
  int baseline_beams = 5;
  CandidateSource source = CandidateSource::Sampled;
  prompt::PromptVariant variant;
  prompt::GuardConfig guard;
  gateway::CompletionParams llm;
  std::int64_t seed = 0;
  int workers = 4;

  void validate() const;
  nlohmann::json to_json() const;
};

struct CaptionRow {
  std::string image_id;
  std::string baseline;
  std::vector<std::string> candidates;
  std::string summary;
  prompt::SummaryFlags flags;
  int guard_retries = 0;

  bool operator==(const CaptionRow&) const = default;
};

nlohmann::json row_to_json(const CaptionRow& row);
CaptionRow row_from_json(const nlohmann::json& j);
std::vector<CaptionRow> parse_captions(std::string_view jsonl);
std::vector<CaptionRow> read_captions(const std::filesystem::path& path);
std::string captions_to_jsonl(std::vector<CaptionRow> rows);  // sorted by image_id

struct ImageFailure {
  std::string image_id;
  std::string message;
};

struct GenerateResult {
  std::vector<CaptionRow> rows;  // sorted by image_id
  std::vector<ImageFailure> failures;
};

// Runs baseline, candidate sampling, and summarization for every image not
// already in `done`. Per-image errors are collected, not thrown.
GenerateResult generate(const DatasetSplit& split, gateway::Gateway& gw,
                        const GenerateConfig& config, std::vector<CaptionRow> done = {});

// ---- evaluation

struct MetricSet {
  bool recall = true;
  bool coverage = true;
  bool ngram = true;
  bool diagnostics = true;

  static MetricSet all() { return {}; }
  static MetricSet none() { return {false, false, false, false}; }
  bool empty() const { return !recall && !coverage && !ngram && !diagnostics; }
};
// Comma-separated subset of recall,coverage,ngram,diagnostics; "all"; or "".
MetricSet parse_metric_set(std::string_view s);

using EmbedFn =
    std::function<std::vector<EmbeddingVector>(const std::vector<std::string>&, Modality)>;
EmbedFn embedder(gateway::Gateway& gw);

struct EvaluateConfig {
  MetricSet metrics;
  double phi = coverage::kDefaultPhi;
  const coverage::Annotator* annotator = nullptr;  // null: built-in lexicon annotator
  const coverage::EmbeddingTable* word_vectors = nullptr;  // null: exact-only fuzzy
};

struct SystemMetrics {
  std::string name;
  std::optional<recall::RecallReport> recall;
  std::optional<coverage::CoverageReport> coverage;
  std::optional<ngram::NgramReport> ngram;
  double llop = 0.0;
  coverage::LengthStats length;
};

struct Diagnostics {
  double mean_self_bleu = 0.0;
  std::optional<double> r_self_bleu_mrr;
  std::optional<double> r_self_bleu_noun;
  std::optional<double> r_self_bleu_verb;
};

struct EvaluationReport {
  std::vector<SystemMetrics> systems;  // "baseline", then "committee"
  std::optional<Diagnostics> diagnostics;
  std::vector<std::string> notices;
  std::size_t images = 0;
};

// Scores baseline and summary captions against the split's references.
// Without `embed` (or when it throws TransportError) recall is skipped with
// a notice.
EvaluationReport evaluate(const std::vector<CaptionRow>& rows, const DatasetSplit& split,
                          const EvaluateConfig& config, const EmbedFn& embed = {});

nlohmann::json report_to_json(const EvaluationReport& r);
// Markdown tables; `paper_layout` orders recall columns MRR, R@1, R@5, R@10.
std::string report_to_markdown(const EvaluationReport& r, bool paper_layout = true);

// ---- run bookkeeping

struct RunManifest {
  std::string run_id;
  std::string command;
  nlohmann::json config;
  std::string dataset_fingerprint;
  std::string tool_version = std::string(kToolVersion);
  nlohmann::json cost;  // null until the run finishes

  nlohmann::json to_json() const;
};

// Stable id over (command, config, dataset fingerprint).
std::string make_run_id(std::string_view command, const nlohmann::json& config,
                        std::string_view dataset_fingerprint);

nlohmann::json cost_summary(const gateway::CostLedger& ledger, std::size_t images);

nlohmann::json endpoint_snapshot(const gateway::GatewayConfig& gw);

// ---- commands

struct GenerateCommand {
  std::filesystem::path runs_dir = "runs";
  std::optional<std::filesystem::path> out;  // extra copy of captions.jsonl
  GenerateConfig config;
};

struct CommandResult {
  std::string run_id;
  std::filesystem::path run_dir;
  std::vector<ImageFailure> failures;
  int exit_code() const { return failures.empty() ? 0 : 1; }
};

// Writes runs/<run_id>/{manifest.json, captions.jsonl}. Rows already present
// in an earlier captions.jsonl for the same run are kept (resume).
CommandResult cmd_generate(const DatasetSplit& split, gateway::Gateway& gw,
                           const GenerateCommand& cmd);

struct EvaluateCommand {
  std::filesystem::path runs_dir = "runs";
  std::filesystem::path captions;
  EvaluateConfig config;
  bool paper_tables = true;
};

// Writes runs/<run_id>/{manifest.json, report.json, report.md}.
CommandResult cmd_evaluate(const DatasetSplit& split, const EvaluateCommand& cmd,
                           const EmbedFn& embed, const gateway::GatewayConfig* endpoints);

// Hard split from a report's per-image ranks for `system`. The split is named
// hard-mrr-<model>.
DatasetSplit cmd_build_hard_split(const nlohmann::json& report, const DatasetSplit& split,
                                  std::size_t n, const std::string& model,
                                  const std::string& system = "baseline");

}  // namespace capcom::pipeline
