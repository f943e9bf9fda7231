// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "rflow/backend.hpp"

namespace rflow {

// A (flawed scene, good scene, reflection) training record.
struct TripletScores {
  double flawed_score = 0.0;
  double good_score = 0.0;
  double reward_gap = 0.0;  // filled by post-filtering
};

struct Triplet {
  std::string prompt_text;
  StructuredPrompt structured_prompt;
  SceneGraph flawed;
  SceneGraph good;
  Reflection reflection;
  std::string source;  // rule | reward | longshort | edit
  TripletScores scores;
};

// Throws InvalidInputError when good_score < flawed_score, the reflection is
// empty, the source tag is unknown, or flawed == good by content hash.
void validate_triplet(const Triplet& t, const Vocabulary& vocab);

Json triplet_to_json(const Triplet& t);
Triplet triplet_from_json(const Json& j, const std::string& path);

bool is_triplet_source(const std::string& tag);

// Structured output of the pairwise annotation flow: a free-form analysis,
// the preferred side, and one imperative editing instruction.
struct CotAnnotation {
  std::string analysis;
  std::string result;  // "left" | "right"
  std::string instructions;
};

// Strict parse of the annotation JSON {"Analysis","Result","Instructions"}.
// Throws SchemaError on missing keys, wrong types, empty values, or a Result
// outside {left, right}.
CotAnnotation parse_cot_annotation(const std::string& raw_json);
std::string cot_annotation_to_json(const CotAnnotation& a);

}  // namespace rflow
