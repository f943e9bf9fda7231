// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "rflow/backend.hpp"

namespace rflow {

// Shared configuration of the simulated backend family. Every simulated
// backend is a pure function of its inputs plus the derived seed, so results
// are identical across process runs and thread schedules.
struct SimConfig {
  ErrorModel error_model;
  Vocabulary vocab = Vocabulary::defaults();
  // Stream label mixed into internally derived seeds (reflector noise,
  // verifier noise). Two sims with different model_seed behave like two
  // different model checkpoints.
  std::uint64_t model_seed = 0;
  // Specificity step applied per prompt refinement.
  double refine_delta = 0.25;
};

class SimGenerator final : public Generator {
 public:
  explicit SimGenerator(SimConfig cfg) : cfg_(std::move(cfg)) {}
  BackendKind kind() const override { return BackendKind::simulated; }

  // Realizes the prompt exactly, then corrupts each rubric attribute
  // independently with probability effective_eps(prompt.specificity). A
  // scene passes the rule check iff no attribute was corrupted.
  SceneGraph generate(const std::string& prompt_text,
                      const StructuredPrompt& prompt,
                      std::uint64_t seed) override;

 private:
  SimConfig cfg_;
};

class SimCorrector final : public Corrector {
 public:
  explicit SimCorrector(SimConfig cfg) : cfg_(std::move(cfg)) {}
  BackendKind kind() const override { return BackendKind::simulated; }

  // Applies each reflected fact with probability p_fix, then with
  // probability p_regress corrupts one uniformly chosen scene attribute.
  // Reflection text that parses to no facts under the instruction grammar
  // falls back to a no-op correction with a logged warning.
  SceneGraph correct(const std::string& original_prompt,
                     const std::string& refined_prompt,
                     const Reflection& reflection, const SceneGraph& flawed,
                     std::uint64_t seed) override;

 private:
  SimConfig cfg_;
};

class SimReflector final : public Reflector {
 public:
  explicit SimReflector(SimConfig cfg) : cfg_(std::move(cfg)) {}
  BackendKind kind() const override { return BackendKind::simulated; }

  // With recall 1 and hallucination 0 this is the oracle reflector: the
  // structured facts equal verify_rule's errors exactly. Noise drops each
  // true fact with probability 1-recall and fabricates a wrong_color fact
  // with probability `hallucination`.
  Reflection reflect(const StructuredPrompt& prompt, const SceneGraph& scene,
                     const VerifierReport& report) override;

 private:
  SimConfig cfg_;
};

class SimVerifier final : public Verifier {
 public:
  explicit SimVerifier(SimConfig cfg) : cfg_(std::move(cfg)) {}
  BackendKind kind() const override { return BackendKind::simulated; }

  // Oracle mapping: overall = 10 * rule score; aspects derive from rubric
  // subscores and the quality scalar (see aspect mapping below). When
  // verifier_noise > 0, independent Gaussian noise is added to every score
  // and clamped to [0,10]; the noise seed derives from (model_seed, prompt
  // id, scene hash) so repeated calls stay deterministic.
  VerifierReport verify(const StructuredPrompt& prompt,
                        const SceneGraph& scene) override;

 private:
  SimConfig cfg_;
};

// Aspect mapping used by SimVerifier, per category, in schema key order:
//   single_object:      presence, quality, rule-score
//   two_objects:        quality, presence, rule-score
//   counting:           count, color, quality
//   colors:             color, quality, presence
//   position:           relation, quality, presence
//   color_attribution:  color, quality, presence
// Each sub-score is scaled to 0..10.
VerifierReport oracle_report(const StructuredPrompt& prompt,
                             const SceneGraph& scene, const Vocabulary& vocab);

class SimPromptRefiner final : public PromptRefiner {
 public:
  explicit SimPromptRefiner(SimConfig cfg) : cfg_(std::move(cfg)) {}
  BackendKind kind() const override { return BackendKind::simulated; }

  // Raises specificity by refine_delta (clamped at 1) and re-renders the
  // prompt at the new specificity. Object classes are never altered. Needs
  // ctx.structured; at the ceiling the result equals the current prompt.
  RefineResult refine(const RefineContext& ctx) override;

 private:
  SimConfig cfg_;
};

// Convenience factory wiring all five simulated backends from one config.
BackendBundle make_simulated_bundle(const SimConfig& cfg);

}  // namespace rflow
