// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/triplet.hpp"

#include <array>

#include "rflow/errors.hpp"

namespace rflow {

bool is_triplet_source(const std::string& tag) {
  static constexpr std::array<const char*, 4> kSources = {"rule", "reward",
                                                          "longshort", "edit"};
  for (const char* s : kSources)
    if (tag == s) return true;
  return false;
}

void validate_triplet(const Triplet& t, const Vocabulary& vocab) {
  validate_prompt(t.structured_prompt, vocab);
  validate_scene(t.flawed);
  validate_scene(t.good);
  if (t.reflection.text.empty())
    throw InvalidInputError("triplet reflection must be non-empty");
  if (!is_triplet_source(t.source))
    throw InvalidInputError("unknown triplet source: " + t.source);
  if (t.scores.good_score < t.scores.flawed_score)
    throw InvalidInputError("triplet good_score must be >= flawed_score");
  if (content_hash(t.flawed) == content_hash(t.good))
    throw InvalidInputError("triplet flawed and good scenes are identical");
  if (t.prompt_text.empty())
    throw InvalidInputError("triplet prompt_text must be non-empty");
}

Json triplet_to_json(const Triplet& t) {
  Json j;
  j["prompt_text"] = t.prompt_text;
  j["structured_prompt"] = prompt_to_json(t.structured_prompt);
  j["flawed"] = scene_to_json(t.flawed);
  j["good"] = scene_to_json(t.good);
  j["reflection"] = reflection_to_json(t.reflection);
  j["source"] = t.source;
  Json scores;
  scores["flawed_score"] = jnum(q6(t.scores.flawed_score));
  scores["good_score"] = jnum(q6(t.scores.good_score));
  scores["reward_gap"] = jnum(q6(t.scores.reward_gap));
  j["scores"] = std::move(scores);
  return j;
}

Triplet triplet_from_json(const Json& j, const std::string& path) {
  Triplet t;
  t.prompt_text = require_string(j, "prompt_text", path);
  t.structured_prompt = prompt_from_json(
      require_object(j, "structured_prompt", path), path + ".structured_prompt");
  t.flawed = scene_from_json(require_object(j, "flawed", path), path + ".flawed");
  t.good = scene_from_json(require_object(j, "good", path), path + ".good");
  t.reflection = reflection_from_json(require_object(j, "reflection", path),
                                      path + ".reflection");
  t.source = require_string(j, "source", path);
  const Json& scores = require_object(j, "scores", path);
  t.scores.flawed_score = require_number(scores, "flawed_score", path + ".scores");
  t.scores.good_score = require_number(scores, "good_score", path + ".scores");
  t.scores.reward_gap = require_number(scores, "reward_gap", path + ".scores");
  return t;
}

CotAnnotation parse_cot_annotation(const std::string& raw_json) {
  const Json j = parse_json(raw_json, "cot_annotation");
  CotAnnotation a;
  a.analysis = require_string(j, "Analysis", "cot_annotation");
  a.result = require_string(j, "Result", "cot_annotation");
  a.instructions = require_string(j, "Instructions", "cot_annotation");
  if (a.analysis.empty())
    throw SchemaError("cot_annotation.Analysis", "empty analysis", raw_json);
  if (a.instructions.empty())
    throw SchemaError("cot_annotation.Instructions", "empty instructions",
                      raw_json);
  if (a.result != "left" && a.result != "right")
    throw SchemaError("cot_annotation.Result",
                      "expected \"left\" or \"right\", got \"" + a.result +
                          "\"",
                      raw_json);
  return a;
}

std::string cot_annotation_to_json(const CotAnnotation& a) {
  Json j;
  j["Analysis"] = a.analysis;
  j["Result"] = a.result;
  j["Instructions"] = a.instructions;
  return j.dump();
}

}  // namespace rflow
