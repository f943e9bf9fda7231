// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/reward.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "rflow/errors.hpp"
#include "rflow/rng.hpp"
#include "rflow/sim_backend.hpp"

namespace rflow {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<double> featurize(const StructuredPrompt& prompt,
                              const SceneGraph& scene,
                              const Vocabulary& vocab) {
  const RuleVerdict verdict = verify_rule(prompt, scene, vocab);
  const RubricBreakdown bd = rubric_breakdown(prompt, scene, verdict, vocab);
  const double delta =
      std::abs(bd.observed_objects - bd.expected_objects) /
      std::max(1.0, static_cast<double>(bd.expected_objects));
  return {
      bd.presence_subscore(),
      bd.color_subscore(),
      bd.count_subscore(),
      bd.relation_subscore(),
      1.0 / (1.0 + bd.extra_errors),
      scene.quality,
      -std::min(1.0, delta),
  };
}

RewardModel RewardModel::zeros() {
  RewardModel m;
  m.weights.assign(static_cast<std::size_t>(m.feature_spec.dim), 0.0);
  return m;
}

void RewardModel::validate() const {
  if (static_cast<int>(weights.size()) != feature_spec.dim)
    throw InvalidInputError("reward model weight count does not match the "
                            "feature spec dimension");
  for (const double w : weights)
    if (!std::isfinite(w))
      throw InvalidInputError("reward model weights must be finite");
  if (!std::isfinite(bias))
    throw InvalidInputError("reward model bias must be finite");
}

double reward_score(const RewardModel& model,
                    std::span<const double> features) {
  if (features.size() != model.weights.size())
    throw InvalidInputError("feature vector length mismatch");
  double r = model.bias;
  for (std::size_t i = 0; i < features.size(); ++i)
    r += model.weights[i] * features[i];
  return r;
}

double reward_score(const RewardModel& model, const StructuredPrompt& prompt,
                    const SceneGraph& scene, const Vocabulary& vocab) {
  return reward_score(model, featurize(prompt, scene, vocab));
}

void PreferencePair::validate(const Vocabulary& vocab) const {
  validate_prompt(prompt, vocab);
  if (content_hash(winner) == content_hash(loser))
    throw InvalidInputError("preference pair winner and loser are identical");
}

namespace {

struct GapCache {
  std::vector<std::vector<double>> fw;
  std::vector<std::vector<double>> fl;
};

GapCache featurize_pairs(std::span<const PreferencePair> pairs,
                         const Vocabulary& vocab) {
  GapCache cache;
  cache.fw.reserve(pairs.size());
  cache.fl.reserve(pairs.size());
  for (const PreferencePair& p : pairs) {
    cache.fw.push_back(featurize(p.prompt, p.winner, vocab));
    cache.fl.push_back(featurize(p.prompt, p.loser, vocab));
  }
  return cache;
}

double loss_from_cache(const RewardModel& model, const GapCache& cache) {
  double total = 0.0;
  for (std::size_t i = 0; i < cache.fw.size(); ++i) {
    const double gap = reward_score(model, cache.fw[i]) -
                       reward_score(model, cache.fl[i]);
    // -log sigmoid(gap), written in the numerically stable form.
    total += std::log1p(std::exp(-std::abs(gap))) + std::max(0.0, -gap);
  }
  return total / static_cast<double>(cache.fw.size());
}

std::vector<double> grad_from_cache(const RewardModel& model,
                                    const GapCache& cache,
                                    std::span<const std::size_t> subset) {
  const std::size_t d = model.weights.size();
  std::vector<double> grad(d + 1, 0.0);
  for (const std::size_t i : subset) {
    const double gap = reward_score(model, cache.fw[i]) -
                       reward_score(model, cache.fl[i]);
    const double coeff = -(1.0 - sigmoid(gap));
    for (std::size_t k = 0; k < d; ++k)
      grad[k] += coeff * (cache.fw[i][k] - cache.fl[i][k]);
    // The bias cancels in the gap; its gradient component stays 0.
  }
  for (std::size_t k = 0; k < d; ++k)
    grad[k] /= static_cast<double>(subset.size());
  return grad;
}

}  // namespace

double bt_loss(const RewardModel& model, std::span<const PreferencePair> pairs,
               const Vocabulary& vocab) {
  if (pairs.empty())
    throw InvalidInputError("bt_loss needs a non-empty pair list");
  model.validate();
  return loss_from_cache(model, featurize_pairs(pairs, vocab));
}

std::vector<double> bt_grad(const RewardModel& model,
                            std::span<const PreferencePair> pairs,
                            const Vocabulary& vocab) {
  if (pairs.empty())
    throw InvalidInputError("bt_grad needs a non-empty pair list");
  model.validate();
  const GapCache cache = featurize_pairs(pairs, vocab);
  std::vector<std::size_t> all(pairs.size());
  std::iota(all.begin(), all.end(), 0);
  return grad_from_cache(model, cache, all);
}

double pairwise_accuracy(const RewardModel& model,
                         std::span<const PreferencePair> pairs,
                         const Vocabulary& vocab) {
  if (pairs.empty())
    throw InvalidInputError("pairwise_accuracy needs a non-empty pair list");
  std::size_t correct = 0;
  for (const PreferencePair& p : pairs) {
    if (reward_score(model, p.prompt, p.winner, vocab) >
        reward_score(model, p.prompt, p.loser, vocab))
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

TrainResult train_bt(std::span<const PreferencePair> train,
                     std::span<const PreferencePair> held_out,
                     const TrainHyper& hyper, const Vocabulary& vocab) {
  if (train.empty())
    throw InvalidInputError("train_bt needs a non-empty training set");

  TrainResult result;
  result.model = RewardModel::zeros();
  const std::size_t d = result.model.weights.size();
  const GapCache cache = featurize_pairs(train, vocab);

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(hyper.seed, {0x62742d747261696eULL}));

  const std::size_t batch =
      hyper.batch <= 0 ? train.size()
                       : std::min<std::size_t>(train.size(),
                                               static_cast<std::size_t>(hyper.batch));

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    if (batch < train.size()) {
      // Fisher-Yates with our own rng keeps shuffles reproducible.
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.next_below(i)]);
    }
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const std::span<const std::size_t> subset(order.data() + start,
                                                end - start);
      const std::vector<double> grad =
          grad_from_cache(result.model, cache, subset);
      for (std::size_t k = 0; k < d; ++k)
        result.model.weights[k] -=
            hyper.lr * (grad[k] + hyper.l2 * result.model.weights[k]);
      result.model.bias -= hyper.lr * grad[d];
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_from_cache(result.model, cache);
    stats.holdout_accuracy =
        held_out.empty() ? 0.0
                         : pairwise_accuracy(result.model, held_out, vocab);
    if (!std::isfinite(stats.train_loss))
      throw InvalidInputError(
          "train_bt: loss became non-finite at epoch " +
          std::to_string(epoch) + " (lr=" + std::to_string(hyper.lr) + ")");
    result.log.push_back(stats);
  }

  result.final_train_loss =
      result.log.empty() ? loss_from_cache(result.model, cache)
                         : result.log.back().train_loss;
  result.holdout_accuracy =
      held_out.empty() ? 0.0
                       : pairwise_accuracy(result.model, held_out, vocab);
  return result;
}

void save_checkpoint(const RewardModel& model, const std::string& path) {
  model.validate();
  Json j;
  j["v"] = 1;
  Json spec;
  spec["name"] = model.feature_spec.name;
  spec["version"] = model.feature_spec.version;
  spec["dim"] = model.feature_spec.dim;
  j["feature_spec"] = std::move(spec);
  Json weights = Json::array();
  for (const double w : model.weights) weights.push_back(w);
  j["weights"] = std::move(weights);
  j["bias"] = model.bias;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("checkpoint write failed: " + path);
}

RewardModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const Json j = parse_json(text, "checkpoint");
  if (require_int(j, "v", "checkpoint") != 1)
    throw SchemaError("checkpoint.v", "unsupported checkpoint version");
  RewardModel m;
  const Json& spec = require_object(j, "feature_spec", "checkpoint");
  m.feature_spec.name = require_string(spec, "name", "checkpoint.feature_spec");
  m.feature_spec.version = static_cast<int>(
      require_int(spec, "version", "checkpoint.feature_spec"));
  m.feature_spec.dim =
      static_cast<int>(require_int(spec, "dim", "checkpoint.feature_spec"));
  m.weights.clear();
  for (const auto& w : require_array(j, "weights", "checkpoint"))
    m.weights.push_back(w.get<double>());
  m.bias = require_number(j, "bias", "checkpoint");
  m.validate();
  if (m.feature_spec != FeatureSpec{})
    throw SchemaError("checkpoint.feature_spec",
                      "checkpoint feature spec does not match this build's "
                      "featurizer (rubric v1)");
  return m;
}

EnsembleConfig EnsembleConfig::defaults() {
  EnsembleConfig cfg;
  const double third = 1.0 / 3.0;
  cfg.weights = {{"alignment", third}, {"aesthetic", third}, {"fidelity", third}};
  cfg.window = {{"alignment", {0.5, 0.3}},
                {"aesthetic", {0.75, 0.15}},
                {"fidelity", {0.8, 0.25}}};
  return cfg;
}

void EnsembleConfig::validate() const {
  if (weights.empty())
    throw InvalidInputError("ensemble config needs at least one signal");
  double sum = 0.0;
  for (const auto& [name, w] : weights) {
    if (w < 0.0)
      throw InvalidInputError("ensemble weight for '" + name +
                              "' must be non-negative");
    if (!window.count(name))
      throw InvalidInputError("ensemble window stats missing for '" + name +
                              "'");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InvalidInputError("ensemble weights must sum to 1");
  if (!(sigma_floor > 0.0))
    throw InvalidInputError("ensemble sigma_floor must be > 0");
}

double ensemble_score(const std::map<std::string, double>& signals,
                      const EnsembleConfig& cfg) {
  cfg.validate();
  double score = 0.0;
  for (const auto& [name, weight] : cfg.weights) {
    const auto it = signals.find(name);
    if (it == signals.end())
      throw InvalidInputError("ensemble signal missing: " + name);
    const SignalStats& stats = cfg.window.at(name);
    const double sigma = std::max(stats.stddev, cfg.sigma_floor);
    score += weight * (it->second - stats.mean) / sigma;
  }
  return score;
}

std::map<std::string, double> compute_signals(const StructuredPrompt& prompt,
                                              const SceneGraph& scene,
                                              const Vocabulary& vocab) {
  const RuleVerdict verdict = verify_rule(prompt, scene, vocab);
  const RubricBreakdown bd = rubric_breakdown(prompt, scene, verdict, vocab);
  return {{"alignment", verdict.score},
          {"aesthetic", scene.quality},
          {"fidelity", bd.presence_subscore()}};
}

std::vector<PreferencePair> make_separable_pairs(int count, std::uint64_t seed,
                                                 const Vocabulary& vocab) {
  if (count < 0) throw InvalidInputError("pair count must be >= 0");
  std::vector<PreferencePair> pairs;
  pairs.reserve(static_cast<std::size_t>(count));

  const std::vector<StructuredPrompt> prompts =
      make_random_prompts(std::max(1, std::min(count, 64)),
                          derive_seed(seed, {0x73657061726162ULL}), vocab);

  // Winners come from a clean generator, losers from a heavily corrupted one
  // with degraded quality, so winner features dominate coordinatewise.
  SimConfig clean;
  clean.error_model = ErrorModel::perfect();
  SimConfig noisy;
  noisy.error_model = ErrorModel::perfect();
  noisy.error_model.eps_attr = 0.85;
  SimGenerator clean_gen(clean);
  SimGenerator noisy_gen(noisy);

  Rng rng(derive_seed(seed, {0x70616972ULL}));
  for (int i = 0; i < count; ++i) {
    const StructuredPrompt& prompt = prompts[i % prompts.size()];
    const std::string text = render_prompt_text(prompt, true);
    PreferencePair pair;
    pair.prompt = prompt;
    pair.source = "rule";
    pair.winner = clean_gen.generate(text, prompt, rng.next_u64());
    pair.winner.quality = q6(rng.uniform(0.8, 0.95));
    for (int tries = 0; tries < 64; ++tries) {
      pair.loser = noisy_gen.generate(text, prompt, rng.next_u64());
      if (!verify_rule(prompt, pair.loser, vocab).pass) break;
    }
    pair.loser.quality = q6(rng.uniform(0.3, 0.6));
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace rflow
