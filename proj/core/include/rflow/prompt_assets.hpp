// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "rflow/prompt.hpp"

namespace rflow {

// Text templates shipped under assets/prompts/, sent verbatim to remote
// model backends. One verifier template per category plus the reflection,
// prompt-refinement and pair-annotation templates.
struct PromptTemplates {
  std::string verifier[6];  // indexed by Category
  std::string reflection;
  std::string refine_prompt;
  std::string cot_annotation;

  const std::string& verifier_for(Category c) const {
    return verifier[static_cast<std::size_t>(c)];
  }

  // Loads every template from `<assets_dir>/prompts/`. Throws IoError when a
  // file is missing or unreadable.
  static PromptTemplates load(const std::string& assets_dir);
};

// Default assets directory baked in at build time; overridable through
// AppConfig.assets_dir.
std::string default_assets_dir();

}  // namespace rflow
