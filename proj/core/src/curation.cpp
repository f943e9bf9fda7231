// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/curation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rflow/errors.hpp"
#include "rflow/log.hpp"
#include "rflow/sim_backend.hpp"

namespace rflow {

namespace {
constexpr std::uint64_t kRolloutStream = 0x726f6c6c6f7574ULL;
constexpr std::uint64_t kPairStream = 0x7061697221ULL;
constexpr std::uint64_t kLongShortStream = 0x6c6f6e6773686fULL;
constexpr std::uint64_t kAnnotateStream = 0x616e6e6f74617465ULL;
constexpr std::uint64_t kCurriculumStream = 0x637572726963ULL;
}  // namespace

std::vector<RolloutResult> rollout(std::span<const StructuredPrompt> prompts,
                                   int n, Generator& generator,
                                   const Vocabulary& vocab,
                                   std::uint64_t seed) {
  if (n < 2) throw InvalidInputError("rollout needs n >= 2 candidates");
  std::vector<RolloutResult> results;
  results.reserve(prompts.size());
  for (const StructuredPrompt& prompt : prompts) {
    RolloutResult r;
    r.prompt = prompt;
    const std::string text = render_prompt_text(prompt, /*long_form=*/false);
    try {
      for (int i = 0; i < n; ++i) {
        const std::uint64_t s = derive_seed(
            seed, {kRolloutStream, fnv1a64(prompt.id),
                   static_cast<std::uint64_t>(i)});
        Candidate c;
        c.scene = generator.generate(text, prompt, s);
        c.verdict = verify_rule(prompt, c.scene, vocab);
        r.candidates.push_back(std::move(c));
      }
    } catch (const BackendError& e) {
      log::warn("rollout: skipping prompt '" + prompt.id +
                "' after generator failure: " + e.what());
      continue;
    }
    std::vector<RuleVerdict> verdicts;
    verdicts.reserve(r.candidates.size());
    for (const Candidate& c : r.candidates) verdicts.push_back(c.verdict);
    r.difficulty = prompt_difficulty(verdicts);
    results.push_back(std::move(r));
  }
  return results;
}

namespace {

// Nearest-rank quantile: q(p) = sorted[ceil(p*n) - 1].
double nearest_rank_quantile(std::vector<double> sorted, double p) {
  const std::size_t n = sorted.size();
  std::size_t rank = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(n)));
  if (rank == 0) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

}  // namespace

std::set<std::string> filter_by_difficulty(
    const std::map<std::string, double>& difficulty, DifficultyMode mode) {
  if (difficulty.size() < 3)
    throw InvalidInputError("difficulty filtering needs at least 3 prompts");
  for (const auto& [id, d] : difficulty)
    if (!(d >= 0.0 && d <= 1.0))
      throw InvalidInputError("difficulty for '" + id + "' outside [0,1]");

  std::set<std::string> kept;
  if (mode == DifficultyMode::fixed_bins) {
    for (const auto& [id, d] : difficulty)
      if (d > 0.0 && d < 1.0) kept.insert(id);
    return kept;
  }

  std::vector<double> values;
  values.reserve(difficulty.size());
  for (const auto& [id, d] : difficulty) values.push_back(d);
  std::sort(values.begin(), values.end());
  const double lo = nearest_rank_quantile(values, 1.0 / 3.0);
  const double hi = nearest_rank_quantile(values, 2.0 / 3.0);
  for (const auto& [id, d] : difficulty)
    if (d > lo && d <= hi && d < 1.0) kept.insert(id);
  return kept;
}

std::vector<ScenePair> pair_rule(std::span<const Candidate> candidates,
                                 std::uint64_t seed) {
  bool any_pass = false, any_fail = false;
  double min_score = 1.0, max_score = 0.0;
  for (const Candidate& c : candidates) {
    any_pass = any_pass || c.verdict.pass;
    any_fail = any_fail || !c.verdict.pass;
    min_score = std::min(min_score, c.verdict.score);
    max_score = std::max(max_score, c.verdict.score);
  }
  if (!any_pass || !any_fail) return {};

  std::vector<const Candidate*> best, worst;
  for (const Candidate& c : candidates) {
    if (c.verdict.score == max_score) best.push_back(&c);
    if (c.verdict.score == min_score) worst.push_back(&c);
  }

  Rng rng(derive_seed(seed, {kPairStream}));
  std::vector<ScenePair> pairs;
  for (const Candidate* flawed : worst) {
    const Candidate* good = best[rng.next_below(best.size())];
    pairs.push_back({good->scene, flawed->scene, good->verdict.score,
                     flawed->verdict.score});
  }
  return pairs;
}

std::vector<ScenePair> pair_reward(std::span<const Candidate> candidates,
                                   int k, int pair_count,
                                   const StructuredPrompt& prompt,
                                   const EnsembleConfig& ensemble,
                                   const Vocabulary& vocab,
                                   std::uint64_t seed) {
  if (k < 1 || pair_count < 1)
    throw InvalidInputError("pair_reward needs k >= 1 and pair_count >= 1");
  if (2 * static_cast<std::size_t>(k) > candidates.size())
    throw InvalidInputError("pair_reward: 2k exceeds the candidate count");

  struct Ranked {
    const Candidate* candidate;
    double score;
    Digest hash;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(candidates.size());
  for (const Candidate& c : candidates)
    ranked.push_back({&c,
                      ensemble_score(compute_signals(prompt, c.scene, vocab),
                                     ensemble),
                      content_hash(c.scene)});
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.hash < b.hash;
  });

  // All top-k x bottom-k cells, then a seeded partial shuffle picks
  // pair_count distinct ones.
  std::vector<std::pair<int, int>> cells;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) cells.emplace_back(i, j);
  Rng rng(derive_seed(seed, {kPairStream, 2}));
  const std::size_t take =
      std::min<std::size_t>(cells.size(), static_cast<std::size_t>(pair_count));
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.next_below(cells.size() - i);
    std::swap(cells[i], cells[j]);
  }

  std::vector<ScenePair> pairs;
  const std::size_t n = ranked.size();
  for (std::size_t i = 0; i < take; ++i) {
    const Ranked& top = ranked[static_cast<std::size_t>(cells[i].first)];
    const Ranked& bottom =
        ranked[n - 1 - static_cast<std::size_t>(cells[i].second)];
    pairs.push_back(
        {top.candidate->scene, bottom.candidate->scene, top.score, bottom.score});
  }
  return pairs;
}

std::vector<ScenePair> make_longshort_pairs(const StructuredPrompt& prompt,
                                            Generator& generator, int n,
                                            double margin, int max_pairs,
                                            const EnsembleConfig& ensemble,
                                            const Vocabulary& vocab,
                                            std::uint64_t seed) {
  if (n < 1) throw InvalidInputError("make_longshort_pairs needs n >= 1");
  const std::string long_text = render_prompt_text(prompt, /*long_form=*/true);
  const std::string short_text =
      render_prompt_text(prompt, /*long_form=*/false);
  if (long_text == short_text) {
    log::info("longshort: prompt '" + prompt.id +
              "' renders identically long and short; skipping");
    return {};
  }

  // The long variant behaves like a fully detailed prompt; the short variant
  // generates at the prompt's own specificity.
  StructuredPrompt detailed = prompt;
  detailed.specificity = 1.0;

  std::vector<ScenePair> pairs;
  for (int i = 0; i < n && static_cast<int>(pairs.size()) < max_pairs; ++i) {
    const std::uint64_t s_long = derive_seed(
        seed, {kLongShortStream, fnv1a64(prompt.id),
               static_cast<std::uint64_t>(i), 0});
    const std::uint64_t s_short = derive_seed(
        seed, {kLongShortStream, fnv1a64(prompt.id),
               static_cast<std::uint64_t>(i), 1});
    SceneGraph good = generator.generate(long_text, detailed, s_long);
    SceneGraph flawed = generator.generate(short_text, prompt, s_short);
    const double g =
        ensemble_score(compute_signals(prompt, good, vocab), ensemble);
    const double f =
        ensemble_score(compute_signals(prompt, flawed, vocab), ensemble);
    if (g - f >= margin)
      pairs.push_back({std::move(good), std::move(flawed), g, f});
  }
  return pairs;
}

EditImportResult ingest_edit_pairs(const std::string& jsonl_path,
                                   const Vocabulary& vocab) {
  std::ifstream in(jsonl_path);
  if (!in) throw IoError("cannot open edit records: " + jsonl_path);

  EditImportResult result;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const Json j = parse_json(line, "edit_record");
      Triplet t;
      t.flawed = scene_from_json(require_object(j, "source_scene", "edit_record"),
                                 "edit_record.source_scene");
      t.good = scene_from_json(require_object(j, "edited_scene", "edit_record"),
                               "edit_record.edited_scene");
      const std::string instruction =
          require_string(j, "instruction", "edit_record");
      t.prompt_text = require_string(j, "edited_caption", "edit_record");
      t.structured_prompt =
          prompt_from_json(require_object(j, "structured_prompt", "edit_record"),
                           "edit_record.structured_prompt");
      if (instruction.empty())
        throw SchemaError("edit_record.instruction", "empty instruction");
      if (t.prompt_text.empty())
        throw SchemaError("edit_record.edited_caption", "empty caption");
      t.reflection.text = instruction;
      t.source = "edit";
      t.scores = {0.0, 1.0, 0.0};
      validate_triplet(t, vocab);
      result.triplets.push_back(std::move(t));
    } catch (const Error& e) {
      result.rejects.push_back("line " + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return result;
}

std::string SimCotClient::annotate(const std::string& /*prompt_text*/,
                                   const StructuredPrompt& prompt,
                                   const SceneGraph& left,
                                   const SceneGraph& right,
                                   std::uint64_t seed) {
  const RuleVerdict lv = verify_rule(prompt, left, vocab_);
  const RuleVerdict rv = verify_rule(prompt, right, vocab_);
  bool left_better;
  if (lv.score != rv.score) left_better = lv.score > rv.score;
  else left_better = left.quality >= right.quality;

  Rng rng(derive_seed(model_seed_, {kAnnotateStream, seed}));
  if (rng.bernoulli(flip_rate_)) left_better = !left_better;

  const SceneGraph& worse = left_better ? right : left;
  const RuleVerdict& worse_verdict = left_better ? rv : lv;

  CotAnnotation a;
  a.result = left_better ? "left" : "right";
  std::ostringstream analysis;
  analysis << "The " << a.result
           << " image satisfies more of the prompt requirements ("
           << (left_better ? lv.errors.size() : rv.errors.size())
           << " vs " << (left_better ? rv.errors.size() : lv.errors.size())
           << " rule violations).";
  a.analysis = analysis.str();
  a.instructions = worse_verdict.errors.empty()
                       ? "Adjust the overall sharpness and lighting quality."
                       : render_instructions(worse_verdict.errors);
  (void)worse;
  return cot_annotation_to_json(a);
}

AnnotateOutcome annotate_reflection_cot(const StructuredPrompt& prompt,
                                        const std::string& prompt_text,
                                        const ScenePair& pair,
                                        CotClient& client,
                                        std::uint64_t seed) {
  AnnotateOutcome outcome;
  constexpr int kMaxAttempts = 3;  // first try plus two retries
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    ++outcome.attempts;
    const std::uint64_t attempt_seed =
        derive_seed(seed, {kAnnotateStream,
                           static_cast<std::uint64_t>(attempt)});
    Rng placement(attempt_seed);
    const bool good_on_left = placement.bernoulli(0.5);
    const SceneGraph& left = good_on_left ? pair.good : pair.flawed;
    const SceneGraph& right = good_on_left ? pair.flawed : pair.good;
    std::string raw;
    try {
      raw = client.annotate(prompt_text, prompt, left, right, attempt_seed);
      const CotAnnotation a = parse_cot_annotation(raw);
      const std::string good_side = good_on_left ? "left" : "right";
      if (a.result != good_side) {
        outcome.reject_reason = "result_inconsistent";
        continue;
      }
      outcome.accepted = true;
      outcome.reflection.text = a.instructions;
      outcome.reject_reason.clear();
      return outcome;
    } catch (const SchemaError& e) {
      outcome.reject_reason = "parse_failure";
      log::warn(std::string("cot annotation parse failure: ") + e.what());
      continue;
    }
  }
  return outcome;
}

Reflection annotate_reflection_oracle(const StructuredPrompt& prompt,
                                      const ScenePair& pair,
                                      const Vocabulary& vocab) {
  SimConfig cfg;
  cfg.error_model = ErrorModel::perfect();
  cfg.vocab = vocab;
  SimReflector reflector(cfg);
  const VerifierReport report = oracle_report(prompt, pair.flawed, vocab);
  Reflection r = reflector.reflect(prompt, pair.flawed, report);
  if (r.text == kNoChangesText) {
    // Rule-clean but preference-ranked pairs still need an actionable
    // instruction; fall back to a quality edit.
    r.text = "Adjust the overall sharpness and lighting quality.";
    r.structured.reset();
  }
  return r;
}

std::vector<Triplet> post_filter(std::span<const Triplet> triplets,
                                 const RewardModel& model, double margin,
                                 const Vocabulary& vocab) {
  model.validate();
  std::vector<Triplet> kept;
  for (const Triplet& t : triplets) {
    const double gap = reward_score(model, t.structured_prompt, t.good, vocab) -
                       reward_score(model, t.structured_prompt, t.flawed, vocab);
    if (gap >= margin) {
      Triplet out = t;
      out.scores.reward_gap = q6(gap);
      kept.push_back(std::move(out));
    }
  }
  return kept;
}

Json manifest_to_json(const DatasetManifest& m) {
  Json j;
  j["v"] = 1;
  j["seed"] = u64_to_string(m.seed);
  j["config_hash"] = m.config_hash;
  j["total"] = m.total;
  Json counts;
  for (const auto& [source, n] : m.counts) counts[source] = n;
  j["counts"] = std::move(counts);
  Json rejected;
  for (const auto& [reason, n] : m.rejected) rejected[reason] = n;
  j["rejected"] = std::move(rejected);
  return j;
}

DatasetManifest export_dataset(std::span<const Triplet> triplets,
                               const std::string& dataset_path,
                               const std::string& manifest_path,
                               std::uint64_t seed,
                               const std::string& config_hash,
                               const std::map<std::string, std::uint64_t>&
                                   rejected_counters) {
  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.config_hash = config_hash;
  manifest.total = triplets.size();
  for (const Triplet& t : triplets) ++manifest.counts[t.source];
  manifest.rejected = rejected_counters;

  const auto write_atomically = [](const std::string& path,
                                   const std::string& payload) {
    const std::string tmp = path + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write: " + tmp);
      out << payload;
      out.flush();
      if (!out) {
        std::remove(tmp.c_str());
        throw IoError("write failed: " + tmp);
      }
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
      std::remove(tmp.c_str());
      throw IoError("cannot move " + tmp + " into place");
    }
  };

  std::string dataset;
  for (const Triplet& t : triplets) {
    dataset += triplet_to_json(t).dump();
    dataset += "\n";
  }
  write_atomically(dataset_path, dataset);
  write_atomically(manifest_path, manifest_to_json(manifest).dump(2) + "\n");
  return manifest;
}

std::vector<Triplet> load_dataset(const std::string& dataset_path,
                                  const Vocabulary& vocab) {
  std::ifstream in(dataset_path);
  if (!in) throw IoError("cannot open dataset: " + dataset_path);
  std::vector<Triplet> triplets;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const Json j = parse_json(line, "dataset line " + std::to_string(line_no));
    Triplet t = triplet_from_json(j, "triplet");
    validate_triplet(t, vocab);
    triplets.push_back(std::move(t));
  }
  return triplets;
}

std::vector<StructuredPrompt> load_prompt_corpus(const std::string& jsonl_path,
                                                 const Vocabulary& vocab) {
  std::ifstream in(jsonl_path);
  if (!in) throw IoError("cannot open prompt corpus: " + jsonl_path);
  std::vector<StructuredPrompt> prompts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const Json j = parse_json(line, "corpus line " + std::to_string(line_no));
    StructuredPrompt p = prompt_from_json(j, "prompt");
    validate_prompt(p, vocab);
    prompts.push_back(std::move(p));
  }
  if (prompts.empty())
    throw InvalidInputError("prompt corpus is empty: " + jsonl_path);
  return prompts;
}

void CurriculumSchedule::validate() const {
  if (sources.size() < 2)
    throw InvalidInputError("curriculum needs at least 2 sources");
  if (std::find(sources.begin(), sources.end(), "edit") == sources.end())
    throw InvalidInputError("curriculum sources must include 'edit'");
  const double uniform = 1.0 / static_cast<double>(sources.size());
  if (!(initial_edit_weight >= uniform && initial_edit_weight <= 1.0))
    throw InvalidInputError(
        "initial edit weight must lie in [1/num_sources, 1]");
  if (horizon < 1) throw InvalidInputError("curriculum horizon must be >= 1");
}

std::map<std::string, double> CurriculumSchedule::weights_at(
    std::uint64_t t) const {
  validate();
  const double k = static_cast<double>(sources.size());
  const double u = std::min(1.0, static_cast<double>(t) /
                                     static_cast<double>(horizon));
  const double uniform = 1.0 / k;
  const double edit_w = initial_edit_weight + (uniform - initial_edit_weight) * u;
  const double other_w = (1.0 - edit_w) / (k - 1.0);
  std::map<std::string, double> weights;
  for (const std::string& s : sources)
    weights[s] = (s == "edit") ? edit_w : other_w;
  return weights;
}

std::string sample_curriculum(const CurriculumSchedule& schedule,
                              std::uint64_t t, Rng& rng) {
  const auto weights = schedule.weights_at(t);
  double roll = rng.next_double();
  // Iterate in the schedule's declared source order for reproducibility.
  for (const std::string& s : schedule.sources) {
    const double w = weights.at(s);
    if (roll < w) return s;
    roll -= w;
  }
  return schedule.sources.back();
}

Json CurationConfig::to_json() const {
  Json j;
  j["rollout_n"] = rollout_n;
  j["top_bottom_k"] = top_bottom_k;
  j["pairs_per_prompt"] = pairs_per_prompt;
  j["longshort_n"] = longshort_n;
  j["longshort_max_pairs"] = longshort_max_pairs;
  j["post_filter_margin"] = jnum(q6(post_filter_margin));
  j["longshort_margin"] = jnum(q6(longshort_margin));
  j["difficulty_mode"] = difficulty_mode == DifficultyMode::strict_quantile
                             ? "strict_quantile"
                             : "fixed_bins";
  j["cot_flip_rate"] = jnum(q6(cot_flip_rate));
  Json srcs = Json::array();
  for (const std::string& s : sources) srcs.push_back(s);
  j["sources"] = std::move(srcs);
  j["edit_records_path"] = edit_records_path;
  Json train_j;
  train_j["lr"] = jnum(q6(train.lr));
  train_j["epochs"] = train.epochs;
  train_j["batch"] = train.batch;
  train_j["seed"] = u64_to_string(train.seed);
  train_j["l2"] = jnum(q6(train.l2));
  j["train"] = std::move(train_j);
  return j;
}

CurationOutput run_curation(std::span<const StructuredPrompt> corpus,
                            const CurationConfig& cfg, Generator& generator,
                            const Vocabulary& vocab, std::uint64_t seed) {
  CurationOutput out;
  auto& counters = out.counters;
  const auto want = [&](const char* s) { return cfg.sources.count(s) > 0; };

  std::vector<Triplet> raw;

  // Rule and reward sources share one rollout per prompt.
  std::vector<RolloutResult> rollouts;
  if (want("rule") || want("reward"))
    rollouts = rollout(corpus, cfg.rollout_n, generator, vocab, seed);

  SimCotClient cot_client(vocab, cfg.cot_flip_rate,
                          derive_seed(seed, {0x636f74ULL}));

  const auto annotate_and_emit = [&](const StructuredPrompt& prompt,
                                     const std::string& prompt_text,
                                     const ScenePair& pair, const char* source,
                                     bool use_cot, std::uint64_t pair_seed) {
    Triplet t;
    t.prompt_text = prompt_text;
    t.structured_prompt = prompt;
    t.good = pair.good;
    t.flawed = pair.flawed;
    t.source = source;
    t.scores = {q6(pair.flawed_score), q6(pair.good_score), 0.0};
    if (t.scores.good_score < t.scores.flawed_score) {
      ++counters["pairs_dropped_score_order"];
      return;
    }
    if (content_hash(t.good) == content_hash(t.flawed)) {
      ++counters["pairs_dropped_identical"];
      return;
    }
    if (use_cot) {
      const AnnotateOutcome a = annotate_reflection_cot(
          prompt, prompt_text, pair, cot_client, pair_seed);
      counters["cot_attempts"] += static_cast<std::uint64_t>(a.attempts);
      if (!a.accepted) {
        ++counters["cot_dropped_" + a.reject_reason];
        return;
      }
      if (a.attempts > 1)
        counters["cot_retries"] +=
            static_cast<std::uint64_t>(a.attempts - 1);
      t.reflection = a.reflection;
    } else {
      t.reflection = annotate_reflection_oracle(prompt, pair, vocab);
    }
    validate_triplet(t, vocab);
    raw.push_back(std::move(t));
  };

  if (want("rule")) {
    std::map<std::string, double> difficulty;
    for (const RolloutResult& r : rollouts)
      difficulty[r.prompt.id] = r.difficulty;
    const std::set<std::string> kept =
        filter_by_difficulty(difficulty, cfg.difficulty_mode);
    counters["rule_prompts_kept"] = kept.size();
    for (const RolloutResult& r : rollouts) {
      if (!kept.count(r.prompt.id)) continue;
      const std::uint64_t s =
          derive_seed(seed, {kPairStream, fnv1a64(r.prompt.id)});
      const std::string text = render_prompt_text(r.prompt, false);
      for (const ScenePair& pair : pair_rule(r.candidates, s))
        annotate_and_emit(r.prompt, text, pair, "rule", /*use_cot=*/false,
                          derive_seed(s, {1}));
    }
  }

  if (want("reward")) {
    for (const RolloutResult& r : rollouts) {
      if (2 * cfg.top_bottom_k > static_cast<int>(r.candidates.size())) {
        ++counters["reward_prompts_skipped_small"];
        continue;
      }
      const std::uint64_t s =
          derive_seed(seed, {kPairStream, fnv1a64(r.prompt.id), 7});
      const std::string text = render_prompt_text(r.prompt, false);
      std::uint64_t pair_index = 0;
      for (const ScenePair& pair :
           pair_reward(r.candidates, cfg.top_bottom_k, cfg.pairs_per_prompt,
                       r.prompt, cfg.ensemble, vocab, s))
        annotate_and_emit(r.prompt, text, pair, "reward", /*use_cot=*/true,
                          derive_seed(s, {++pair_index}));
    }
  }

  if (want("longshort")) {
    for (const StructuredPrompt& prompt : corpus) {
      const std::uint64_t s =
          derive_seed(seed, {kLongShortStream, fnv1a64(prompt.id)});
      const std::string text = render_prompt_text(prompt, true);
      std::uint64_t pair_index = 0;
      for (const ScenePair& pair : make_longshort_pairs(
               prompt, generator, cfg.longshort_n, cfg.longshort_margin,
               cfg.longshort_max_pairs, cfg.ensemble, vocab, s))
        annotate_and_emit(prompt, text, pair, "longshort", /*use_cot=*/true,
                          derive_seed(s, {++pair_index}));
    }
  }

  if (want("edit") && !cfg.edit_records_path.empty()) {
    EditImportResult imported = ingest_edit_pairs(cfg.edit_records_path, vocab);
    counters["edit_rejected_schema"] = imported.rejects.size();
    for (const std::string& reject : imported.rejects)
      log::warn("edit import: " + reject);
    for (Triplet& t : imported.triplets) raw.push_back(std::move(t));
  }

  counters["pre_filter_total"] = raw.size();

  // Inline reward-model training on the curated preference pairs, then
  // post-filtering against the learned margin.
  std::vector<PreferencePair> pairs;
  pairs.reserve(raw.size());
  for (const Triplet& t : raw) {
    PreferencePair p;
    p.prompt = t.structured_prompt;
    p.winner = t.good;
    p.loser = t.flawed;
    p.source = t.source;
    pairs.push_back(std::move(p));
  }
  if (pairs.empty())
    throw InvalidInputError("curation produced no candidate triplets");

  const std::size_t holdout = std::max<std::size_t>(1, pairs.size() / 5);
  const std::span<const PreferencePair> train_span(pairs.data(),
                                                   pairs.size() - holdout);
  const std::span<const PreferencePair> holdout_span(
      pairs.data() + (pairs.size() - holdout), holdout);
  TrainHyper hyper = cfg.train;
  hyper.seed = derive_seed(seed, {0x747261696eULL});
  const TrainResult trained = train_bt(
      train_span.empty() ? std::span<const PreferencePair>(pairs) : train_span,
      holdout_span, hyper, vocab);
  out.model = trained.model;
  counters["train_pairs"] = train_span.size();

  out.triplets = post_filter(raw, out.model, cfg.post_filter_margin, vocab);
  counters["post_filter_dropped"] = raw.size() - out.triplets.size();
  for (const Triplet& t : out.triplets) ++counters["emitted_" + t.source];
  return out;
}

}  // namespace rflow
