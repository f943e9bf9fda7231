// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0
//
// Operator CLI: curate datasets, train the preference verifier, run single
// refinements, run benchmark suites, and inspect stored traces.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rflow/config.hpp"
#include "rflow/curation.hpp"
#include "rflow/evalbench.hpp"
#include "rflow/log.hpp"

using namespace rflow;

namespace {

// Exit codes: 1 config/usage, 2 backend, 3 I/O, 4 internal.
constexpr int kExitConfig = 1;
constexpr int kExitBackend = 2;
constexpr int kExitIo = 3;
constexpr int kExitInternal = 4;

struct GlobalOptions {
  std::string config_path;
  std::string seed_text;
  std::string out_dir;
  std::string assets_dir;
  std::string verifier;
  std::string bt_checkpoint;
  int jobs = 0;
  std::map<std::string, std::string> backend_urls;
};

AppConfig resolve_config(const GlobalOptions& g) {
  AppConfig cfg;
  if (!g.config_path.empty()) cfg = AppConfig::load_file(g.config_path);
  cfg.apply_env();
  // Flags override file and environment values.
  if (!g.seed_text.empty())
    cfg.seed = u64_from_string(g.seed_text, "--seed");
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  if (!g.assets_dir.empty()) cfg.assets_dir = g.assets_dir;
  if (!g.verifier.empty())
    cfg.verifier = verifier_choice_from_string(g.verifier);
  if (!g.bt_checkpoint.empty()) cfg.bt_checkpoint = g.bt_checkpoint;
  if (g.jobs > 0) cfg.jobs = g.jobs;
  for (const auto& [role, url] : g.backend_urls) {
    if (!url.empty()) {
      cfg.backends[role].kind = BackendKind::remote;
      cfg.backends[role].url = url;
    }
  }
  cfg.validate();
  return cfg;
}

std::string assets_dir_of(const AppConfig& cfg) {
  return cfg.assets_dir.empty() ? default_assets_dir() : cfg.assets_dir;
}

std::vector<StructuredPrompt> corpus_of(const AppConfig& cfg,
                                        const Vocabulary& vocab) {
  const std::string path = cfg.corpus_path.empty()
                               ? assets_dir_of(cfg) + "/corpora/default_corpus.jsonl"
                               : cfg.corpus_path;
  return load_prompt_corpus(path, vocab);
}

BenchmarkSuite suite_of(const AppConfig& cfg, const Vocabulary& vocab) {
  const std::string path = cfg.suite_path.empty()
                               ? assets_dir_of(cfg) + "/suites/default_suite.json"
                               : cfg.suite_path;
  BenchmarkSuite suite = load_suite(path);
  suite.validate(vocab);
  return suite;
}

std::vector<std::pair<int, int>> parse_splits(const std::string& text) {
  std::vector<std::pair<int, int>> splits;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    const auto x = part.find('x');
    if (x == std::string::npos)
      throw InvalidInputError("malformed split '" + part +
                              "'; expected WIDTHxDEPTH");
    splits.emplace_back(std::stoi(part.substr(0, x)),
                        std::stoi(part.substr(x + 1)));
  }
  if (splits.empty()) throw InvalidInputError("no splits given");
  return splits;
}

int run_curate(const AppConfig& cfg, const std::string& sources_csv) {
  const Vocabulary vocab = Vocabulary::defaults();
  CurationConfig curation = cfg.curation;
  if (!sources_csv.empty()) {
    curation.sources.clear();
    std::stringstream in(sources_csv);
    std::string s;
    while (std::getline(in, s, ',')) {
      if (!is_triplet_source(s))
        throw InvalidInputError("unknown source: " + s);
      curation.sources.insert(s);
    }
  }
  if (curation.edit_records_path.empty())
    curation.edit_records_path =
        assets_dir_of(cfg) + "/fixtures/edit_records.jsonl";

  const std::vector<StructuredPrompt> corpus = corpus_of(cfg, vocab);
  BackendBundle backends = cfg.make_backends(vocab);

  CurationOutput out =
      run_curation(corpus, curation, *backends.generator, vocab, cfg.seed);

  std::filesystem::create_directories(cfg.out_dir);
  const std::string config_hash =
      Digest{fnv1a64(curation.to_json().dump())}.hex();
  const DatasetManifest manifest = export_dataset(
      out.triplets, cfg.out_dir + "/dataset.jsonl",
      cfg.out_dir + "/manifest.json", cfg.seed, config_hash, out.counters);
  save_checkpoint(out.model, cfg.out_dir + "/reward_model.json");

  std::cout << "curate: emitted " << manifest.total << " triplets\n";
  for (const auto& [source, count] : manifest.counts)
    std::cout << "  " << source << ": " << count << "\n";
  std::cout << "dataset:  " << cfg.out_dir << "/dataset.jsonl\n"
            << "manifest: " << cfg.out_dir << "/manifest.json\n";
  return 0;
}

int run_train_verifier(const AppConfig& cfg, const std::string& dataset_path,
                       TrainHyper hyper) {
  const Vocabulary vocab = Vocabulary::defaults();
  const std::vector<Triplet> triplets = load_dataset(dataset_path, vocab);
  std::vector<PreferencePair> pairs;
  pairs.reserve(triplets.size());
  for (const Triplet& t : triplets) {
    PreferencePair p;
    p.prompt = t.structured_prompt;
    p.winner = t.good;
    p.loser = t.flawed;
    p.source = t.source;
    pairs.push_back(std::move(p));
  }
  if (pairs.size() < 5)
    throw InvalidInputError("dataset too small to train on");

  // Deterministic shuffle, then an 80/20 train/held-out split.
  Rng rng(derive_seed(cfg.seed, {0x73706c6974ULL}));
  for (std::size_t i = pairs.size(); i > 1; --i)
    std::swap(pairs[i - 1], pairs[rng.next_below(i)]);
  const std::size_t holdout = std::max<std::size_t>(1, pairs.size() / 5);
  const std::span<const PreferencePair> train_span(pairs.data(),
                                                   pairs.size() - holdout);
  const std::span<const PreferencePair> holdout_span(
      pairs.data() + (pairs.size() - holdout), holdout);

  hyper.seed = cfg.seed;
  const TrainResult result = train_bt(train_span, holdout_span, hyper, vocab);

  std::filesystem::create_directories(cfg.out_dir);
  save_checkpoint(result.model, cfg.out_dir + "/verifier_checkpoint.json");
  {
    std::ofstream metrics(cfg.out_dir + "/training_metrics.jsonl",
                          std::ios::trunc);
    if (!metrics) throw IoError("cannot write training metrics");
    for (const EpochStats& s : result.log) {
      Json line;
      line["epoch"] = s.epoch;
      line["loss"] = s.train_loss;
      line["holdout_accuracy"] = s.holdout_accuracy;
      metrics << line.dump() << "\n";
    }
  }
  std::cout << "train-verifier: pairs=" << pairs.size()
            << " train=" << train_span.size() << " held_out=" << holdout
            << "\nfinal_loss=" << result.final_train_loss
            << "\nheld_out_accuracy=" << result.holdout_accuracy << "\n"
            << "checkpoint: " << cfg.out_dir << "/verifier_checkpoint.json\n";
  return 0;
}

StructuredPrompt prompt_from_cli(const AppConfig& cfg,
                                 const std::string& prompt_text,
                                 const std::string& prompt_file,
                                 const Vocabulary& vocab) {
  if (!prompt_file.empty()) {
    std::ifstream in(prompt_file);
    if (!in) throw IoError("cannot open prompt file: " + prompt_file);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    StructuredPrompt p = prompt_from_json(parse_json(text, "prompt"), "prompt");
    validate_prompt(p, vocab);
    return p;
  }
  if (!prompt_text.empty()) return parse_prompt_text(prompt_text, vocab);
  // Fall back to the first prompt of the configured corpus.
  return corpus_of(cfg, vocab).front();
}

int run_single(const AppConfig& cfg, const std::string& prompt_text,
               const std::string& prompt_file, int width, int depth,
               int budget, const std::string& trace_out, bool timings) {
  const Vocabulary vocab = Vocabulary::defaults();
  const StructuredPrompt prompt =
      prompt_from_cli(cfg, prompt_text, prompt_file, vocab);

  RunConfig run_config = cfg.run;
  if (width > 0) run_config.width = width;
  if (depth > 0) run_config.depth = depth;
  if (budget > 0) {
    if (width > 0 && depth <= 0)
      run_config.depth = budget / run_config.width;
    else if (depth > 0 && width <= 0)
      run_config.width = budget / run_config.depth;
    else if (width <= 0 && depth <= 0) {
      run_config.width = 1;
      run_config.depth = budget;
    }
    if (run_config.width * run_config.depth != budget)
      throw InvalidInputError("width x depth does not match --budget");
  }
  run_config.seed = cfg.seed;
  run_config.jobs = cfg.jobs;

  BackendBundle backends = cfg.make_backends(vocab);
  const RunOutput out = run(prompt, run_config, backends);

  const RuleVerdict verdict = verify_rule(prompt, out.best, vocab);
  std::cout << "prompt: " << render_prompt_text(prompt, false) << "\n"
            << "width=" << run_config.width << " depth=" << run_config.depth
            << " budget_mode=" << to_string(run_config.budget_mode) << "\n"
            << "images_generated=" << out.trace.images_generated << "\n"
            << "selected chain=" << out.trace.selected.chain
            << " iteration=" << out.trace.selected.iteration << "\n"
            << "verifier_score="
            << out.trace.selected_step().report.overall_score << "\n"
            << "rule_score=" << verdict.score
            << " pass=" << (verdict.pass ? "true" : "false") << "\n"
            << "selected scene: " << canonical_serialize(out.best) << "\n";
  if (!trace_out.empty()) {
    save_trace(out.trace, trace_out, timings);
    std::cout << "trace: " << trace_out << "\n";
  }
  return 0;
}

int run_eval(const AppConfig& cfg, const std::string& splits_csv, int budget,
             int width, int depth, const std::string& formats_csv) {
  const Vocabulary vocab = Vocabulary::defaults();
  const BenchmarkSuite suite = suite_of(cfg, vocab);
  BackendBundle backends = cfg.make_backends(vocab);

  Report report;
  if (!splits_csv.empty()) {
    if (budget <= 0)
      throw InvalidInputError("--splits needs --budget");
    report = compare_strategies(budget, parse_splits(splits_csv), suite,
                                backends, vocab, cfg.jobs);
  } else {
    RunConfig config = cfg.run;
    if (width > 0) config.width = width;
    if (depth > 0) config.depth = depth;
    const std::string label = std::to_string(config.width) + "x" +
                              std::to_string(config.depth);
    const std::vector<std::pair<std::string, RunConfig>> configs = {
        {label, config}};
    report = run_suite(suite, configs, backends, vocab, cfg.jobs);
  }

  std::vector<std::string> formats;
  std::stringstream in(formats_csv);
  std::string f;
  while (std::getline(in, f, ',')) formats.push_back(f);

  std::filesystem::create_directories(cfg.out_dir);
  const auto written = emit_reports(report, formats, cfg.out_dir);

  std::cout << "config";
  if (!report.rows.empty())
    for (const auto& [cat, rate] : report.rows.front().per_category)
      std::cout << "," << cat;
  std::cout << ",overall\n";
  for (const ConfigRow& row : report.rows) {
    std::cout << row.label;
    for (const auto& [cat, rate] : row.per_category) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "%.4f", rate);
      std::cout << "," << buf;
    }
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.4f", row.overall);
    std::cout << "," << buf << "\n";
  }
  for (const std::string& path : written) std::cout << "wrote " << path << "\n";
  return 0;
}

int run_trace(const std::string& trace_path) {
  const Trace trace = load_trace(trace_path);
  std::cout << "trace v" << trace.version << "  width=" << trace.config.width
            << " depth=" << trace.config.depth
            << " budget_mode=" << to_string(trace.config.budget_mode)
            << " seed=" << trace.config.seed << "\n"
            << "prompt: " << render_prompt_text(trace.prompt, false) << "\n"
            << "images_generated=" << trace.images_generated << "\n";
  for (const auto& [role, calls] : trace.backend_calls)
    std::cout << "calls." << role << "=" << calls << "\n";
  for (const ChainState& chain : trace.chains) {
    std::cout << "chain " << chain.chain_id
              << (chain.dead ? " [dead: " + chain.death_reason + "]" : "")
              << "\n";
    for (std::size_t i = 0; i < chain.history.size(); ++i) {
      const Step& step = chain.history[i];
      std::cout << "  iter " << i << "  score="
                << step.report.overall_score << "  by=" << step.produced_by;
      if (step.reflection)
        std::cout << "\n    reflection: " << step.reflection->text;
      if (!step.refined_prompt.empty())
        std::cout << "\n    refined_prompt: " << step.refined_prompt;
      std::cout << "\n";
    }
  }
  std::cout << "selected: chain=" << trace.selected.chain
            << " iteration=" << trace.selected.iteration << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflectionflow: iterative generate-verify-reflect-correct "
               "search, dataset curation, and benchmarking"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--seed", g.seed_text, "global 64-bit seed");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--jobs", g.jobs, "worker pool size");
  app.add_option("--assets-dir", g.assets_dir, "assets directory override");
  app.add_option("--verifier", g.verifier,
                 "in-loop verifier: oracle|noisy|bt|remote");
  app.add_option("--bt-checkpoint", g.bt_checkpoint,
                 "reward-model checkpoint for --verifier bt");
  for (const char* role :
       {"generator", "corrector", "reflector", "verifier", "refiner"})
    app.add_option("--backend-url-" + std::string(role),
                   g.backend_urls[role],
                   std::string("remote URL for the ") + role + " role");

  auto* curate = app.add_subcommand(
      "curate", "build a triplet dataset: rollout, filter, pair, annotate, "
                "post-filter, export");
  std::string sources_csv;
  curate->add_option("--sources", sources_csv,
                     "comma-separated source filter: rule,reward,longshort,edit");

  auto* train = app.add_subcommand("train-verifier",
                                   "train the pairwise preference reward "
                                   "model on a triplet dataset");
  std::string dataset_path;
  TrainHyper hyper;
  train->add_option("--dataset", dataset_path, "triplet JSONL path")
      ->required();
  train->add_option("--epochs", hyper.epochs, "training epochs");
  train->add_option("--lr", hyper.lr, "learning rate");
  train->add_option("--batch", hyper.batch, "minibatch size (0 = full batch)");
  train->add_option("--l2", hyper.l2, "L2 regularization strength");

  auto* run_cmd = app.add_subcommand(
      "run", "run one refinement search and print the selected scene");
  std::string prompt_text, prompt_file, trace_out;
  int width = 0, depth = 0, budget = 0;
  bool timings = false;
  run_cmd->add_option("--prompt", prompt_text, "prompt text");
  run_cmd->add_option("--prompt-file", prompt_file, "structured prompt JSON");
  run_cmd->add_option("--width", width, "search width N");
  run_cmd->add_option("--depth", depth, "refinement depth M");
  run_cmd->add_option("--budget", budget, "total image budget (N*M)");
  run_cmd->add_option("--trace-out", trace_out, "write the trace here");
  run_cmd->add_flag("--timings", timings,
                    "include wall-clock timings in the trace file (breaks "
                    "byte-reproducibility)");

  auto* eval_cmd =
      app.add_subcommand("eval", "run a benchmark suite and write reports");
  std::string splits_csv, formats_csv = "csv,json,plotdata";
  int ewidth = 0, edepth = 0, ebudget = 0;
  eval_cmd->add_option("--splits", splits_csv,
                       "comma-separated WIDTHxDEPTH splits, e.g. 16x1,1x16");
  eval_cmd->add_option("--budget", ebudget, "budget for --splits");
  eval_cmd->add_option("--width", ewidth, "search width N");
  eval_cmd->add_option("--depth", edepth, "refinement depth M");
  eval_cmd->add_option("--formats", formats_csv,
                       "report formats: csv,json,plotdata");

  auto* trace_cmd =
      app.add_subcommand("trace", "pretty-print a stored trace file");
  std::string trace_path;
  trace_cmd->add_option("file", trace_path, "trace file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*trace_cmd) return run_trace(trace_path);
    const AppConfig cfg = resolve_config(g);
    if (*curate) return run_curate(cfg, sources_csv);
    if (*train) return run_train_verifier(cfg, dataset_path, hyper);
    if (*run_cmd)
      return run_single(cfg, prompt_text, prompt_file, width, depth, budget,
                        trace_out, timings);
    if (*eval_cmd)
      return run_eval(cfg, splits_csv, ebudget, ewidth, edepth, formats_csv);
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const RunError& e) {
    std::cerr << "run error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidInputError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitConfig;
}
