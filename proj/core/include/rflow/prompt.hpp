// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rflow/jsonutil.hpp"
#include "rflow/vocab.hpp"

namespace rflow {

// The six benchmark task families.
enum class Category {
  single_object,
  two_objects,
  counting,
  colors,
  position,
  color_attribution,
};

enum class Relation { left_of, right_of, above, below };

const char* to_string(Category c);
const char* to_string(Relation r);
Category category_from_string(const std::string& s);
Relation relation_from_string(const std::string& s);

struct RelationSpec {
  int other_index = 0;  // index of the reference object within the prompt
  Relation relation = Relation::left_of;
};

struct ObjectSpec {
  std::string cls;
  std::optional<std::string> color;  // concrete color or render-only wildcard
  int count = 1;
  std::optional<RelationSpec> relation;
};

// Machine-checkable generation intent. `specificity` controls how much
// attribute detail survives short-form rendering: 1.0 keeps everything,
// lower values progressively omit counts, colors and spatial relations.
struct StructuredPrompt {
  std::string id;
  Category category = Category::single_object;
  std::vector<ObjectSpec> objects;
  double specificity = 1.0;
};

// Attribute inclusion thresholds used by short-form rendering: an attribute
// is included iff its threshold <= specificity.
inline constexpr double kCountThreshold = 0.25;
inline constexpr double kColorThreshold = 0.5;
inline constexpr double kRelationThreshold = 0.75;

// Throws InvalidInputError when the prompt breaks its category shape or uses
// tokens outside `vocab`.
void validate_prompt(const StructuredPrompt& prompt, const Vocabulary& vocab);

// Deterministic template rendering. long_form=true includes every attribute;
// long_form=false drops attributes whose threshold exceeds the prompt's
// specificity. Object classes are never dropped.
std::string render_prompt_text(const StructuredPrompt& prompt, bool long_form);

// Inverse of render_prompt_text over the closed template grammar. Category is
// inferred from the surface form; specificity of the parsed prompt is 1.0.
// Throws InvalidInputError when `text` is not in the grammar.
StructuredPrompt parse_prompt_text(const std::string& text,
                                   const Vocabulary& vocab);

Json prompt_to_json(const StructuredPrompt& prompt);
StructuredPrompt prompt_from_json(const Json& j, const std::string& path);

// Deterministic synthetic prompt corpus, cycling through the six categories.
struct PromptGenOptions {
  double min_specificity = 0.2;
  double max_specificity = 0.9;
};
std::vector<StructuredPrompt> make_random_prompts(int n, std::uint64_t seed,
                                                  const Vocabulary& vocab,
                                                  const PromptGenOptions& opts = {});

// English helpers shared by the renderer and the reflection templates.
std::string indefinite_article(const std::string& noun);
std::string pluralize(const std::string& noun);
std::string count_word(int n);
std::string relation_phrase(Relation r);

}  // namespace rflow
