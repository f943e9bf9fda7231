// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rflow/reflection_text.hpp"
#include "rflow/rule_verify.hpp"

namespace rflow {

enum class BackendKind { simulated, remote };
enum class BackendRole { generator, corrector, reflector, verifier, refiner };

const char* to_string(BackendRole r);

// Per-category aspect keys reported by verifiers. The "overall_score" key is
// carried separately and is common to every category.
const std::vector<std::string>& aspect_keys(Category category);
inline constexpr const char* kOverallScoreKey = "overall_score";

// Scores are on the 0..10 scale.
struct VerifierReport {
  std::map<std::string, double> aspect_scores;
  double overall_score = 0.0;
  std::string rationale;
};

// Throws SchemaError when keys deviate from the category schema or any score
// leaves [0, 10].
void validate_report(const VerifierReport& report, Category category);

Json report_to_json(const VerifierReport& report);
VerifierReport report_from_json(const Json& j, const std::string& path);

// An imperative improvement instruction, optionally backed by the structured
// facts it targets.
struct Reflection {
  std::string text;
  std::optional<std::vector<ErrorFact>> structured;
};

Json reflection_to_json(const Reflection& r);
Reflection reflection_from_json(const Json& j, const std::string& path);

// Knobs of the simulated backends.
//
//   eps_attr          per-attribute corruption probability at generation;
//                     scaled by 1 + specificity_gain * (1 - specificity)
//   p_fix             probability a reflected error is corrected
//   p_regress         probability a correction corrupts one random attribute
//   reflector_recall  probability a true error appears in a reflection
//   reflector_hallucination
//                     probability a fabricated error is added
//   verifier_noise    stddev of Gaussian noise on verifier scores (0..10
//                     scale) for the noisy verifier
struct ErrorModel {
  double eps_attr = 0.0;
  double specificity_gain = 0.0;
  double p_fix = 1.0;
  double p_regress = 0.0;
  double reflector_recall = 1.0;
  double reflector_hallucination = 0.0;
  double verifier_noise = 0.0;

  // Defaults give the corrector a clear advantage over fresh sampling on
  // multi-attribute prompts, which is what the depth-over-width benchmark
  // behavior relies on.
  static ErrorModel defaults();
  // All-zero noise: generation exactly realizes prompts.
  static ErrorModel perfect();

  void validate() const;
  double effective_eps(double specificity) const;
};

Json error_model_to_json(const ErrorModel& m);
ErrorModel error_model_from_json(const Json& j, const std::string& path);

// The five backend contracts. Implementations must be safe for concurrent
// calls from many chains; simulated ones are stateless, remote adapters may
// pool connections but keep per-call independence.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual BackendKind kind() const = 0;
  virtual SceneGraph generate(const std::string& prompt_text,
                              const StructuredPrompt& prompt,
                              std::uint64_t seed) = 0;
};

class Corrector {
 public:
  virtual ~Corrector() = default;
  virtual BackendKind kind() const = 0;
  virtual SceneGraph correct(const std::string& original_prompt,
                             const std::string& refined_prompt,
                             const Reflection& reflection,
                             const SceneGraph& flawed, std::uint64_t seed) = 0;
};

class Reflector {
 public:
  virtual ~Reflector() = default;
  virtual BackendKind kind() const = 0;
  virtual Reflection reflect(const StructuredPrompt& prompt,
                             const SceneGraph& scene,
                             const VerifierReport& report) = 0;
};

class Verifier {
 public:
  virtual ~Verifier() = default;
  virtual BackendKind kind() const = 0;
  virtual VerifierReport verify(const StructuredPrompt& prompt,
                                const SceneGraph& scene) = 0;
};

struct RefineContext {
  std::string original_prompt;
  std::string current_prompt;
  // Present when the caller tracks the structured prompt (simulated loops
  // do); remote refiners work from text alone.
  std::optional<StructuredPrompt> structured;
  std::vector<SceneGraph> scenes;
  std::vector<VerifierReport> reports;
  Reflection reflection;
};

struct RefineResult {
  std::string text;
  // Simulated refiners return the updated structured prompt so callers can
  // keep the two in sync; remote refiners leave it empty.
  std::optional<StructuredPrompt> structured;
};

class PromptRefiner {
 public:
  virtual ~PromptRefiner() = default;
  virtual BackendKind kind() const = 0;
  virtual RefineResult refine(const RefineContext& ctx) = 0;
};

// One implementation per contract; mixing simulated and remote roles is
// legal.
struct BackendBundle {
  std::shared_ptr<Generator> generator;
  std::shared_ptr<Corrector> corrector;
  std::shared_ptr<Reflector> reflector;
  std::shared_ptr<Verifier> verifier;
  std::shared_ptr<PromptRefiner> prompt_refiner;

  void validate() const;  // all five present
};

}  // namespace rflow
