// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rflow/rule_verify.hpp"

namespace rflow {

// Feature map "rubric-v1": deterministic handcrafted features over a
// (prompt, scene) pair.
//   [0] presence subscore      [4] extra-object subscore 1/(1+extras)
//   [1] color subscore         [5] quality scalar
//   [2] count subscore         [6] -min(1, |observed-expected|/max(1,expected))
//   [3] relation subscore
// The constant-1 slot is excluded; the bias is a separate model parameter.
struct FeatureSpec {
  std::string name = "rubric";
  int version = 1;
  int dim = 7;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

std::vector<double> featurize(const StructuredPrompt& prompt,
                              const SceneGraph& scene,
                              const Vocabulary& vocab);

// Linear-plus-sigmoid pairwise preference scorer.
struct RewardModel {
  std::vector<double> weights;  // length feature_spec.dim
  double bias = 0.0;
  FeatureSpec feature_spec;

  static RewardModel zeros();
  void validate() const;  // finite entries, dim consistency
};

double reward_score(const RewardModel& model, std::span<const double> features);
double reward_score(const RewardModel& model, const StructuredPrompt& prompt,
                    const SceneGraph& scene, const Vocabulary& vocab);

struct PreferencePair {
  StructuredPrompt prompt;
  SceneGraph winner;
  SceneGraph loser;
  std::string source;  // rule | reward | longshort | edit | cot

  void validate(const Vocabulary& vocab) const;  // winner != loser by hash
};

// Mean over pairs of -log sigmoid(r(winner) - r(loser)). The bias cancels in
// the gap. Throws InvalidInputError on an empty list.
double bt_loss(const RewardModel& model, std::span<const PreferencePair> pairs,
               const Vocabulary& vocab);

// Analytic gradient of bt_loss with respect to (weights..., bias). The bias
// component is exactly 0.
std::vector<double> bt_grad(const RewardModel& model,
                            std::span<const PreferencePair> pairs,
                            const Vocabulary& vocab);

struct TrainHyper {
  double lr = 0.5;
  int epochs = 200;
  int batch = 0;  // 0 = full batch
  std::uint64_t seed = 0;
  double l2 = 0.0;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double holdout_accuracy = 0.0;
};

struct TrainResult {
  RewardModel model;
  std::vector<EpochStats> log;
  double final_train_loss = 0.0;
  double holdout_accuracy = 0.0;
};

// Deterministic (mini)batch gradient descent from a zero-initialized model.
// Aborts with InvalidInputError diagnostics if the loss turns non-finite.
TrainResult train_bt(std::span<const PreferencePair> train,
                     std::span<const PreferencePair> held_out,
                     const TrainHyper& hyper, const Vocabulary& vocab);

// Fraction of pairs with r(winner) > r(loser).
double pairwise_accuracy(const RewardModel& model,
                         std::span<const PreferencePair> pairs,
                         const Vocabulary& vocab);

// Versioned checkpoint file (JSON): feature spec, weights, bias.
void save_checkpoint(const RewardModel& model, const std::string& path);
RewardModel load_checkpoint(const std::string& path);

// ---------------------------------------------------------------------------
// Ensemble scoring: z-normalize each named signal by its configured window
// stats (sigma floored) and mix with non-negative weights summing to 1.

struct SignalStats {
  double mean = 0.0;
  double stddev = 1.0;
};

struct EnsembleConfig {
  std::map<std::string, double> weights;
  std::map<std::string, SignalStats> window;
  double sigma_floor = 1e-6;

  static EnsembleConfig defaults();  // uniform weights over the raw signals
  void validate() const;
};

double ensemble_score(const std::map<std::string, double>& signals,
                      const EnsembleConfig& cfg);

// The raw signals computed for a (prompt, scene) pair:
//   alignment  rule-check score        (text-image alignment analogue)
//   aesthetic  scene quality scalar    (human-preference analogue)
//   fidelity   presence subscore       (object-fidelity analogue)
std::map<std::string, double> compute_signals(const StructuredPrompt& prompt,
                                              const SceneGraph& scene,
                                              const Vocabulary& vocab);

// Deterministic synthetic preference set whose winner features dominate the
// loser's coordinatewise; linearly separable by construction. Used by the
// training benchmark and shipped tests.
std::vector<PreferencePair> make_separable_pairs(int count, std::uint64_t seed,
                                                 const Vocabulary& vocab);

}  // namespace rflow
