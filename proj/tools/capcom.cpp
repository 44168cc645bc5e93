// capcom: command-line front end for generation, evaluation, calibration and
// the rating service.

#include <csignal>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "capcom/calibration.hpp"
#include "capcom/dataset.hpp"
#include "capcom/errors.hpp"
#include "capcom/gateway.hpp"
#include "capcom/human_eval.hpp"
#include "capcom/io.hpp"
#include "capcom/pipeline.hpp"
#include "capcom/server.hpp"

namespace {

using namespace capcom;
using nlohmann::json;

struct Common {
  std::string cache_dir;
  std::string runs_dir = "runs";
  std::string captioner_url;
  std::string llm_url;
  std::string embed_url;
  std::string models_file;
  int max_parallel = 4;
};

struct SplitArgs {
  std::string path;
  std::string format = "jsonl";
  std::string karpathy_split = "test";
  std::size_t limit = 0;
  std::uint64_t seed = 0;
};

struct GenArgs {
  std::string captioner = "blip";
  std::string llm = "text-davinci-003";
  int k = 10;
  std::optional<double> temperature;
  std::string variant = "default";
  std::int64_t seed = 0;
  std::string source = "sampled";
  int max_commas = 7;
  int max_regen = 2;
  int max_tokens = 128;
  int beams = 5;
  int workers = 4;
};

struct EvalArgs {
  std::string metrics = "all";
  double phi = coverage::kDefaultPhi;
  std::string word_vectors;
  std::string annotator_url;
  std::string lexicon_extra;
  std::string table = "paper";
};

void add_split_options(CLI::App* app, SplitArgs& s) {
  app->add_option("--split", s.path, "Dataset split file")->required();
  app->add_option("--format", s.format, "jsonl or karpathy")->check(CLI::IsMember({"jsonl", "karpathy"}));
  app->add_option("--karpathy-split", s.karpathy_split, "Split name inside a Karpathy file");
  app->add_option("--limit", s.limit, "Use a seeded random subset of this many images");
  app->add_option("--subset-seed", s.seed, "Seed for --limit");
}

void add_gen_options(CLI::App* app, GenArgs& g) {
  app->add_option("--captioner", g.captioner, "Captioner model name");
  app->add_option("--llm", g.llm, "Summarizer model name");
  app->add_option("--k", g.k, "Candidates per image")->check(CLI::PositiveNumber);
  app->add_option("--temperature", g.temperature, "Sampling temperature (default per captioner)");
  app->add_option("--variant", g.variant, "Prompt variant preset or JSON object");
  app->add_option("--seed", g.seed, "Sampling seed");
  app->add_option("--source", g.source, "sampled or references")
      ->check(CLI::IsMember({"sampled", "references"}));
  app->add_option("--max-commas", g.max_commas, "Comma guard threshold");
  app->add_option("--max-regen", g.max_regen, "Comma guard regeneration budget");
  app->add_option("--max-tokens", g.max_tokens, "Completion token limit");
  app->add_option("--beams", g.beams, "Beam width for the baseline caption");
  app->add_option("--workers", g.workers, "Images processed concurrently");
}

void add_eval_options(CLI::App* app, EvalArgs& e) {
  app->add_option("--metrics", e.metrics, "all, or a comma list of recall,coverage,ngram,diagnostics");
  app->add_option("--phi", e.phi, "Fuzzy coverage threshold");
  app->add_option("--word-vectors", e.word_vectors, "Word vector file for fuzzy coverage");
  app->add_option("--annotator-url", e.annotator_url, "POS/lemma service (default: built-in lexicon)");
  app->add_option("--lexicon-extra", e.lexicon_extra, "Extra lexicon entries, '<lemma>\\tN|V' per line");
  app->add_option("--table", e.table, "paper or plain")->check(CLI::IsMember({"paper", "plain"}));
}

DatasetSplit load(const SplitArgs& s) {
  auto split = load_split(s.path, parse_split_format(s.format), s.karpathy_split);
  if (s.limit && s.limit < split.size())
    split = subset(split, sample_ids(split, s.limit, s.seed), split.name());
  return split;
}

gateway::GatewayConfig gateway_config(const Common& c, const std::string& captioner,
                                      const std::string& llm, const std::string& embedder) {
  auto cfg = gateway::GatewayConfig::from_env();
  auto set = [&](std::optional<gateway::EndpointConfig>& ep, const std::string& url,
                 const std::string& model) {
    if (!url.empty()) {
      if (!ep) ep = gateway::EndpointConfig{};
      ep->base_url = url;
    }
    if (ep) {
      ep->model = model;
      ep->max_parallel = c.max_parallel;
    }
  };
  set(cfg.captioner, c.captioner_url, captioner);
  set(cfg.llm, c.llm_url, llm);
  set(cfg.embedder, c.embed_url, embedder);
  if (!c.cache_dir.empty()) cfg.cache_dir = c.cache_dir;
  if (!c.models_file.empty()) cfg.registry = gateway::ModelRegistry::from_json(json::parse(read_file(c.models_file)));
  return cfg;
}

pipeline::GenerateConfig generate_config(const GenArgs& g) {
  pipeline::GenerateConfig cfg;
  cfg.captioner = g.captioner;
  cfg.k = g.k;
  cfg.temperature = g.temperature ? *g.temperature : pipeline::default_temperature(g.captioner);
  cfg.baseline_beams = g.beams;
  cfg.source = pipeline::parse_candidate_source(g.source);
  cfg.variant = prompt::parse_variant(g.variant);
  cfg.guard.max_commas = g.max_commas;
  cfg.guard.max_regen = g.max_regen;
  cfg.llm.model = g.llm;
  cfg.llm.max_tokens = g.max_tokens;
  cfg.seed = g.seed;
  cfg.workers = g.workers;
  return cfg;
}

struct EvalResources {
  std::unique_ptr<coverage::Annotator> annotator;
  std::optional<coverage::EmbeddingTable> vectors;
};

pipeline::EvaluateConfig eval_config(const EvalArgs& e, EvalResources& res) {
  pipeline::EvaluateConfig cfg;
  cfg.metrics = pipeline::parse_metric_set(e.metrics);
  cfg.phi = e.phi;
  if (!e.annotator_url.empty()) {
    res.annotator = std::make_unique<coverage::HttpAnnotator>(e.annotator_url);
  } else if (!e.lexicon_extra.empty()) {
    auto lex = std::make_unique<coverage::LexiconAnnotator>();
    lex->load_extra(e.lexicon_extra);
    res.annotator = std::move(lex);
  }
  cfg.annotator = res.annotator.get();
  if (!e.word_vectors.empty()) {
    res.vectors = coverage::EmbeddingTable::load(e.word_vectors);
    cfg.word_vectors = &*res.vectors;
  }
  return cfg;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    double lo, hi, step;
    char c1, c2;
    std::istringstream in(s);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || !(step > 0))
      throw ValidationError("grid range must look like 0.2:2.0:0.15");
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(std::round((lo + i * step) * 1e6) / 1e6);
    return out;
  }
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) out.push_back(std::stoi(tok));
  return out;
}

human_eval::RatingServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Caption-by-committee pipeline, evaluation and rating service"};
  app.require_subcommand(1);
  // Common options are accepted after the subcommand name too.
  app.fallthrough();
  Common common;
  app.add_option("--cache-dir", common.cache_dir, "Response cache directory (default .capcom-cache)");
  app.add_option("--runs-dir", common.runs_dir, "Where run bundles are written");
  app.add_option("--captioner-url", common.captioner_url, "Captioner service base URL");
  app.add_option("--llm-url", common.llm_url, "Completion service base URL");
  app.add_option("--embed-url", common.embed_url, "Embedding service base URL");
  app.add_option("--models", common.models_file, "Extra model registry JSON");
  app.add_option("--max-parallel", common.max_parallel, "In-flight requests per endpoint");

  SplitArgs split_args;
  GenArgs gen_args;
  EvalArgs eval_args;
  std::string embed_model = "clip";

  auto* gen = app.add_subcommand("generate", "Sample candidates and summarize them");
  add_split_options(gen, split_args);
  add_gen_options(gen, gen_args);
  std::string out_path;
  gen->add_option("--out", out_path, "Also write captions JSONL here");

  auto* ev = app.add_subcommand("evaluate", "Score a captions file");
  add_split_options(ev, split_args);
  add_eval_options(ev, eval_args);
  std::string captions_path;
  ev->add_option("--captions", captions_path, "Captions JSONL from generate")->required();
  ev->add_option("--embed-model", embed_model, "Embedding model name");

  auto* cal = app.add_subcommand("calibrate", "Sweep sampling temperature");
  add_split_options(cal, split_args);
  std::string grid = "0.2:2.0:0.15";
  int samples = 10;
  std::size_t images = 100;
  std::string cal_out;
  cal->add_option("--captioner", gen_args.captioner, "Captioner model name");
  cal->add_option("--grid", grid, "lo:hi:step or a comma list");
  cal->add_option("--samples", samples, "Samples per image per temperature");
  cal->add_option("--images", images, "Images per temperature");
  cal->add_option("--seed", gen_args.seed, "Seed");
  cal->add_option("--out", cal_out, "Output directory (default runs dir)");

  auto* kab = app.add_subcommand("k-ablation", "Tabulate metrics across candidate counts");
  add_split_options(kab, split_args);
  add_gen_options(kab, gen_args);
  add_eval_options(kab, eval_args);
  std::string k_grid = "1,10,100";
  std::string kab_out;
  kab->add_option("--k-grid", k_grid, "Comma list of k");
  kab->add_option("--embed-model", embed_model, "Embedding model name");
  kab->add_option("--out", kab_out, "Output directory (default runs dir)");

  auto* hard = app.add_subcommand("build-hard-split", "Worst-ranked images from a report");
  add_split_options(hard, split_args);
  std::string report_path, hard_out, hard_model = "blip", hard_system = "baseline";
  std::size_t hard_n = 200;
  hard->add_option("--report", report_path, "report.json from evaluate")->required();
  hard->add_option("--n", hard_n, "Images to keep");
  hard->add_option("--model", hard_model, "Model name used in the split name");
  hard->add_option("--system", hard_system, "baseline or committee");
  hard->add_option("--out", hard_out, "Output path (default hard-mrr-<model>.jsonl)");

  auto* serve = app.add_subcommand("serve", "Run the human rating service");
  std::string pool_path, data_dir = "rating-data", host = "127.0.0.1", static_dir;
  int port = 8080;
  std::uint64_t serve_seed = 0;
  double tau = 0.5;
  serve->add_option("--pool", pool_path, "Task pool JSONL")->required();
  serve->add_option("--data-dir", data_dir, "Event log and snapshot directory");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks one)");
  serve->add_option("--static", static_dir, "Rating UI assets");
  serve->add_option("--seed", serve_seed, "Session seed base");
  serve->add_option("--tau", tau, "Glicko-2 system constant");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const auto split = load(split_args);
      gateway::Gateway gw(gateway_config(common, gen_args.captioner, gen_args.llm, embed_model));
      pipeline::GenerateCommand cmd;
      cmd.runs_dir = common.runs_dir;
      if (!out_path.empty()) cmd.out = out_path;
      cmd.config = generate_config(gen_args);
      const auto r = pipeline::cmd_generate(split, gw, cmd);
      std::cout << "run " << r.run_id << " -> " << r.run_dir.string() << "\n"
                << "model calls: " << gw.network_calls() << ", cache hits: "
                << gw.counters().cache_hits << ", spent: " << gw.ledger().total() << " USD\n";
      if (!r.failures.empty()) std::cerr << r.failures.size() << " image(s) failed\n";
      return r.exit_code();
    }
    if (*ev) {
      const auto split = load(split_args);
      auto gcfg = gateway_config(common, gen_args.captioner, gen_args.llm, embed_model);
      const bool has_embedder = gcfg.embedder.has_value();
      gateway::Gateway gw(gcfg);
      EvalResources res;
      pipeline::EvaluateCommand cmd;
      cmd.runs_dir = common.runs_dir;
      cmd.captions = captions_path;
      cmd.config = eval_config(eval_args, res);
      cmd.paper_tables = eval_args.table == "paper";
      // The gateway serves cached embeddings even without an endpoint.
      const auto r = pipeline::cmd_evaluate(split, cmd, pipeline::embedder(gw), &gw.config());
      if (!has_embedder) std::cerr << "note: no embedding endpoint configured; using cache only\n";
      std::cout << "run " << r.run_id << " -> " << r.run_dir.string() << "\n";
      return 0;
    }
    if (*cal) {
      const auto split = load(split_args);
      gateway::Gateway gw(gateway_config(common, gen_args.captioner, gen_args.llm, embed_model));
      calibration::SweepSpec spec;
      spec.grid = parse_grid(grid);
      spec.samples_per_point = samples;
      spec.max_images = images;
      spec.seed = static_cast<std::uint64_t>(gen_args.seed);
      const auto result = calibration::calibrate_temperature(split, spec, calibration::sampler(gw));
      const json id_cfg = {{"grid", spec.grid}, {"samples", samples}, {"images", images},
                           {"seed", spec.seed}, {"metric", spec.metric.name},
                           {"captioner", gen_args.captioner}};
      const auto run_id = pipeline::make_run_id("calibrate", id_cfg, fingerprint(split));
      const std::filesystem::path dir =
          cal_out.empty() ? std::filesystem::path(common.runs_dir) / run_id : std::filesystem::path(cal_out);
      auto sj = calibration::sweep_json(result);
      sj["run_id"] = run_id;
      write_file_atomic(dir / "curve.csv", calibration::curve_csv(result));
      write_file_atomic(dir / "sweep.json", sj.dump(2) + "\n");
      std::cout << "best temperature " << result.best_t << " -> " << dir.string() << "\n";
      return 0;
    }
    if (*kab) {
      const auto split = load(split_args);
      gateway::Gateway gw(gateway_config(common, gen_args.captioner, gen_args.llm, embed_model));
      EvalResources res;
      const auto rows = calibration::k_ablation(split, parse_ints(k_grid), gw,
                                                generate_config(gen_args),
                                                eval_config(eval_args, res), pipeline::embedder(gw));
      const json id_cfg = {{"k_grid", parse_ints(k_grid)},
                           {"generate", generate_config(gen_args).to_json()}};
      const auto run_id = pipeline::make_run_id("k-ablation", id_cfg, fingerprint(split));
      const std::filesystem::path dir =
          kab_out.empty() ? std::filesystem::path(common.runs_dir) / run_id : std::filesystem::path(kab_out);
      write_file_atomic(dir / "k_ablation.csv", calibration::k_ablation_csv(rows));
      write_file_atomic(dir / "k_ablation.json",
                        json{{"run_id", run_id}, {"rows", calibration::k_ablation_json(rows)}}.dump(2) + "\n");
      std::cout << calibration::k_ablation_csv(rows);
      return 0;
    }
    if (*hard) {
      const auto split = load(split_args);
      const auto report = json::parse(read_file(report_path));
      const auto out = pipeline::cmd_build_hard_split(report, split, hard_n, hard_model, hard_system);
      const auto path = hard_out.empty() ? out.name() + ".jsonl" : hard_out;
      save_split(out, path);
      std::cout << out.size() << " images -> " << path << "\n";
      return 0;
    }
    if (*serve) {
      human_eval::ServiceConfig cfg;
      cfg.data_dir = data_dir;
      cfg.seed = serve_seed;
      cfg.glicko.tau = tau;
      human_eval::RatingService service(human_eval::TaskPool::load(pool_path), cfg);
      human_eval::RatingServer server(service, static_dir);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      server.listen();
      g_server = nullptr;
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
