// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rflow {

// Closed token vocabulary for prompts and scenes. Shipped as a config asset;
// the built-in default is 12 object classes x 8 colors.
//
// `wildcard_colors` are render-only adjectives ("colored"): they appear in
// prompt text but add no checkable color requirement.
struct Vocabulary {
  std::vector<std::string> classes;
  std::vector<std::string> colors;
  std::vector<std::string> wildcard_colors;

  static Vocabulary defaults();
  static Vocabulary load_file(const std::string& path);

  bool has_class(std::string_view token) const;
  bool has_color(std::string_view token) const;
  bool is_wildcard_color(std::string_view token) const;

  // Index of `token` in `colors`; throws InvalidInputError if absent.
  std::size_t color_index(std::string_view token) const;

  // A color different from `current`, chosen uniformly. Requires >= 2 colors.
  std::string different_color(std::string_view current,
                              std::uint64_t pick) const;
};

}  // namespace rflow
