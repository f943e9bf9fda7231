// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "rflow/prompt.hpp"
#include "rflow/scene.hpp"

namespace rflow {

enum class ErrorKind {
  missing_object,
  extra_object,
  wrong_color,
  wrong_count,
  wrong_position,
};

const char* to_string(ErrorKind k);
ErrorKind error_kind_from_string(const std::string& s);

struct ErrorFact {
  ErrorKind kind = ErrorKind::missing_object;
  std::string subject;   // offending class token
  std::string expected;  // requirement, e.g. "red", "4", "left_of ball"
  std::string observed;  // what the scene shows, e.g. "blue", "6", "absent"

  friend bool operator==(const ErrorFact&, const ErrorFact&) = default;
};

// Exact rule-check result. The score is partial credit over the prompt's
// rubric: one unit of mass per required object presence, per required
// (concrete) color, per required count, and per required relation. Every
// failed unit yields exactly one ErrorFact; extra_object facts add error
// mass without adding rubric mass, so the score clamps at 0.
struct RuleVerdict {
  double score = 0.0;
  bool pass = false;
  std::vector<ErrorFact> errors;
};

// Deterministic, pure rule verification of `scene` against `prompt`.
//
// Semantics, per object spec:
//  - presence: at least one scene object of the class exists;
//  - color (concrete colors only; wildcard adjectives are render-only):
//    every scene object of the class carries the required color, evaluated
//    in canonical object order;
//  - count (counting category only): the number of class objects equals the
//    spec count exactly; over- and under-count both fail;
//  - relation: some pair of (subject, reference) objects satisfies the
//    relation on bbox centers with strict inequality; ties fail.
// When a class is absent, its dependent color/count/relation units fail too
// (observed "absent").
// extra_object facts are raised only for single_object and counting prompts,
// one per foreign class present in the scene.
//
// Throws InvalidInputError on a vocabulary-violating prompt; never encodes
// bad input as a zero score.
RuleVerdict verify_rule(const StructuredPrompt& prompt, const SceneGraph& scene,
                        const Vocabulary& vocab);

// Fraction of passing verdicts. Throws InvalidInputError on an empty list.
double prompt_difficulty(std::span<const RuleVerdict> verdicts);

// Per-kind rubric decomposition of a verdict, used by the simulated verifier
// aspects and the reward featurizer.
struct RubricBreakdown {
  int presence_required = 0, presence_failed = 0;
  int color_required = 0, color_failed = 0;
  int count_required = 0, count_failed = 0;
  int relation_required = 0, relation_failed = 0;
  int extra_errors = 0;
  int expected_objects = 0;  // total object count implied by the prompt
  int observed_objects = 0;

  // 1.0 when nothing of the kind is required.
  double presence_subscore() const;
  double color_subscore() const;
  double count_subscore() const;
  double relation_subscore() const;
};

RubricBreakdown rubric_breakdown(const StructuredPrompt& prompt,
                                 const SceneGraph& scene,
                                 const RuleVerdict& verdict,
                                 const Vocabulary& vocab);

Json verdict_to_json(const RuleVerdict& v);
Json error_fact_to_json(const ErrorFact& f);
ErrorFact error_fact_from_json(const Json& j, const std::string& path);

}  // namespace rflow
