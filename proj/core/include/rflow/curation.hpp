// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "rflow/reward.hpp"
#include "rflow/rng.hpp"
#include "rflow/triplet.hpp"

namespace rflow {

// --------------------------------------------------------------------------
// Rollouts and difficulty

struct Candidate {
  SceneGraph scene;
  RuleVerdict verdict;
};

struct RolloutResult {
  StructuredPrompt prompt;
  std::vector<Candidate> candidates;
  double difficulty = 0.0;  // fraction of passing candidates
};

// Generates n candidates per prompt (seeds derived per prompt and index) and
// rule-verifies each. A generator failure skips that prompt with a logged
// reason; the pipeline continues.
std::vector<RolloutResult> rollout(std::span<const StructuredPrompt> prompts,
                                   int n, Generator& generator,
                                   const Vocabulary& vocab,
                                   std::uint64_t seed);

enum class DifficultyMode {
  // Empirical tercile boundaries (nearest-rank quantiles) over the observed
  // difficulty distribution; keeps difficulties d with q(1/3) < d <= q(2/3).
  // Difficulty 1.0 is always discarded (nothing flawed to pair).
  strict_quantile,
  // Keeps difficulties strictly inside (0, 1): both a pass and a fail exist.
  fixed_bins,
};

// Returns the kept prompt ids. Throws InvalidInputError for fewer than 3
// prompts.
std::set<std::string> filter_by_difficulty(
    const std::map<std::string, double>& difficulty, DifficultyMode mode);

// --------------------------------------------------------------------------
// Pairing

struct ScenePair {
  SceneGraph good;
  SceneGraph flawed;
  double good_score = 0.0;    // score in the ranking metric of the source
  double flawed_score = 0.0;
};

// Pairs each lowest-scoring candidate with a uniformly chosen highest-scoring
// one. Returns empty when the candidates lack a pass or lack a fail.
std::vector<ScenePair> pair_rule(std::span<const Candidate> candidates,
                                 std::uint64_t seed);

// Ranks candidates by ensemble score (ties broken by ascending content
// hash), then draws `pair_count` distinct (top-k x bottom-k) cells uniformly
// without replacement. Throws InvalidInputError when 2k exceeds the
// candidate count.
std::vector<ScenePair> pair_reward(std::span<const Candidate> candidates,
                                   int k, int pair_count,
                                   const StructuredPrompt& prompt,
                                   const EnsembleConfig& ensemble,
                                   const Vocabulary& vocab,
                                   std::uint64_t seed);

// Renders the prompt long (full detail) and short (at its own specificity),
// generates n scenes per variant, pairs them index-aligned, and keeps pairs
// whose good-side ensemble score exceeds the flawed side's by `margin`, up
// to max_pairs. Identical renderings produce an empty result with a logged
// reason.
std::vector<ScenePair> make_longshort_pairs(const StructuredPrompt& prompt,
                                            Generator& generator, int n,
                                            double margin, int max_pairs,
                                            const EnsembleConfig& ensemble,
                                            const Vocabulary& vocab,
                                            std::uint64_t seed);

// --------------------------------------------------------------------------
// Edit-record import
//
// Line-delimited JSON records with required fields:
//   source_scene     scene object (canonical schema)
//   edited_scene     scene object
//   instruction      non-empty imperative edit instruction
//   edited_caption   non-empty caption of the edited scene
//   structured_prompt  prompt object (canonical schema)
// Maps to Triplet{prompt_text=edited_caption, flawed=source, good=edited,
// reflection=instruction, source=edit}. Invalid records are rejected with
// their line number.

struct EditImportResult {
  std::vector<Triplet> triplets;
  std::vector<std::string> rejects;  // "line N: reason"
};

EditImportResult ingest_edit_pairs(const std::string& jsonl_path,
                                   const Vocabulary& vocab);

// --------------------------------------------------------------------------
// Reflection annotation

// Client contract for pairwise chain-of-thought annotation: the two scenes
// are presented side by side together with the prompt; the reply must be the
// strict JSON {"Analysis", "Result", "Instructions"}.
class CotClient {
 public:
  virtual ~CotClient() = default;
  virtual std::string annotate(const std::string& prompt_text,
                               const StructuredPrompt& prompt,
                               const SceneGraph& left, const SceneGraph& right,
                               std::uint64_t seed) = 0;
};

// Deterministic stand-in for a strong annotation model. Judges sides by rule
// score (quality breaks ties) and emits the instruction for the losing side.
// flip_rate > 0 makes it occasionally misreport the preferred side, which
// exercises the consistency rejection path.
class SimCotClient final : public CotClient {
 public:
  SimCotClient(Vocabulary vocab, double flip_rate = 0.0,
               std::uint64_t model_seed = 0)
      : vocab_(std::move(vocab)), flip_rate_(flip_rate),
        model_seed_(model_seed) {}
  std::string annotate(const std::string& prompt_text,
                       const StructuredPrompt& prompt, const SceneGraph& left,
                       const SceneGraph& right, std::uint64_t seed) override;

 private:
  Vocabulary vocab_;
  double flip_rate_ = 0.0;
  std::uint64_t model_seed_ = 0;
};

struct AnnotateOutcome {
  bool accepted = false;
  Reflection reflection;
  int attempts = 0;
  std::string reject_reason;
};

// Chain-of-thought annotation of a (good, flawed) pair: places the pair on a
// seeded random side, submits to the client, parses the strict JSON, and
// accepts only when Result names the good side. Parse failures and
// preference-inconsistent results retry (2 retries max), then drop.
AnnotateOutcome annotate_reflection_cot(const StructuredPrompt& prompt,
                                        const std::string& prompt_text,
                                        const ScenePair& pair,
                                        CotClient& client,
                                        std::uint64_t seed);

// Simulated path: the oracle reflector's instructions for the flawed scene.
Reflection annotate_reflection_oracle(const StructuredPrompt& prompt,
                                      const ScenePair& pair,
                                      const Vocabulary& vocab);

// --------------------------------------------------------------------------
// Post-filtering and export

// Keeps triplets whose reward gap r(good) - r(flawed) >= margin and fills
// scores.reward_gap.
std::vector<Triplet> post_filter(std::span<const Triplet> triplets,
                                 const RewardModel& model, double margin,
                                 const Vocabulary& vocab);

struct DatasetManifest {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::map<std::string, std::uint64_t> counts;  // per source
  std::uint64_t total = 0;
  std::map<std::string, std::uint64_t> rejected;
};

Json manifest_to_json(const DatasetManifest& m);

// Writes one canonical triplet JSON per line plus a manifest file. Writes go
// through a temp file and rename; failures clean up the partial file.
DatasetManifest export_dataset(std::span<const Triplet> triplets,
                               const std::string& dataset_path,
                               const std::string& manifest_path,
                               std::uint64_t seed,
                               const std::string& config_hash,
                               const std::map<std::string, std::uint64_t>&
                                   rejected_counters);

std::vector<Triplet> load_dataset(const std::string& dataset_path,
                                  const Vocabulary& vocab);

// --------------------------------------------------------------------------
// Task warm-up schedule

// Linear interpolation between (edit = initial_edit_weight, rest uniform) at
// t = 0 and fully uniform weights at t >= horizon. Edit weight is
// non-increasing in t, all weights non-negative and summing to 1.
struct CurriculumSchedule {
  std::vector<std::string> sources = {"rule", "reward", "longshort", "edit"};
  double initial_edit_weight = 0.7;
  std::uint64_t horizon = 10000;

  void validate() const;
  std::map<std::string, double> weights_at(std::uint64_t t) const;
};

std::string sample_curriculum(const CurriculumSchedule& schedule,
                              std::uint64_t t, Rng& rng);

// --------------------------------------------------------------------------
// Whole-pipeline driver (rollout -> filter -> pair -> annotate -> inline
// reward-model training -> post-filter), used by the CLI curate command.

struct CurationConfig {
  int rollout_n = 10;
  int top_bottom_k = 3;
  int pairs_per_prompt = 3;
  int longshort_n = 10;
  int longshort_max_pairs = 3;
  double post_filter_margin = 0.1;
  double longshort_margin = 0.1;
  DifficultyMode difficulty_mode = DifficultyMode::strict_quantile;
  double cot_flip_rate = 0.02;
  std::set<std::string> sources = {"rule", "reward", "longshort", "edit"};
  std::string edit_records_path;
  TrainHyper train;
  EnsembleConfig ensemble = EnsembleConfig::defaults();

  Json to_json() const;  // canonical form, hashed into the manifest
};

struct CurationOutput {
  std::vector<Triplet> triplets;
  RewardModel model;  // the inline-trained post-filter model
  std::map<std::string, std::uint64_t> counters;
};

CurationOutput run_curation(std::span<const StructuredPrompt> corpus,
                            const CurationConfig& cfg, Generator& generator,
                            const Vocabulary& vocab, std::uint64_t seed);

// One prompt JSON per line.
std::vector<StructuredPrompt> load_prompt_corpus(const std::string& jsonl_path,
                                                 const Vocabulary& vocab);

}  // namespace rflow
