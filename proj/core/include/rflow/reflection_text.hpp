// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rflow/rule_verify.hpp"

namespace rflow {

// Imperative instruction templates, one sentence per error fact. Every
// sentence begins with one of the action verbs Add, Remove, Replace,
// Reposition, Adjust. The grammar is closed: render_instruction and
// parse_instructions are inverses over facts produced by verify_rule.
//
//   missing_object  -> "Add a cube."
//   extra_object    -> "Remove the ball."
//   wrong_color     -> "Replace the blue spoon's color with red."
//                      ("Replace the spoon's color with red." when absent)
//   wrong_count     -> "Adjust the pencil count to 4."
//   wrong_position  -> "Reposition the cube to the left of the ball."
std::string render_instruction(const ErrorFact& fact);

// Joins one instruction per fact with single spaces; empty input renders the
// fixed sentence "No changes required."
std::string render_instructions(const std::vector<ErrorFact>& facts);

inline constexpr const char* kNoChangesText = "No changes required.";

// Parses text back into facts. Returns nullopt when any sentence falls
// outside the grammar (callers treat that as "no structured facts").
// kNoChangesText parses to an empty fact list.
std::optional<std::vector<ErrorFact>> parse_instructions(
    const std::string& text, const Vocabulary& vocab);

}  // namespace rflow
