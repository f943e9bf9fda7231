// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/prompt_assets.hpp"

#include <fstream>
#include <sstream>

#include "rflow/errors.hpp"

#ifndef RFLOW_DEFAULT_ASSETS_DIR
#define RFLOW_DEFAULT_ASSETS_DIR "assets"
#endif

namespace rflow {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open prompt template: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

PromptTemplates PromptTemplates::load(const std::string& assets_dir) {
  const std::string base = assets_dir + "/prompts/";
  PromptTemplates t;
  for (int c = 0; c < 6; ++c)
    t.verifier[c] = read_file(
        base + "verifier_" + to_string(static_cast<Category>(c)) + ".txt");
  t.reflection = read_file(base + "reflection.txt");
  t.refine_prompt = read_file(base + "refine_prompt.txt");
  t.cot_annotation = read_file(base + "cot_annotation.txt");
  return t;
}

std::string default_assets_dir() { return RFLOW_DEFAULT_ASSETS_DIR; }

}  // namespace rflow
