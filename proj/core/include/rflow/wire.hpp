// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rflow/backend.hpp"

namespace rflow::wire {

// Wire protocol for remote backends. Five HTTP-style endpoints with JSON
// bodies. Requests carry a schema version "v"; decoding is strict on
// required fields, ignores unknown fields, and reports the dotted field path
// of the first violation. Encoding is canonical (fixed field order, reals
// quantized, integral reals as integers, 64-bit seeds as decimal strings),
// so encode(decode(x)) == x byte-for-byte on canonical payloads.
inline constexpr int kProtocolVersion = 1;

inline constexpr const char* kGeneratePath = "/generate";
inline constexpr const char* kCorrectPath = "/correct";
inline constexpr const char* kReflectPath = "/reflect";
inline constexpr const char* kVerifyPath = "/verify";
inline constexpr const char* kRefinePromptPath = "/refine_prompt";

struct GenerateRequest {
  std::string prompt_text;
  StructuredPrompt structured_prompt;
  std::uint64_t seed = 0;
  // Opaque sampler parameters forwarded verbatim (steps, guidance, ...).
  Json params = Json::object();
};

struct CorrectRequest {
  std::string original_prompt;
  std::string refined_prompt;
  Reflection reflection;
  SceneGraph flawed_scene;
  std::uint64_t seed = 0;
  Json params = Json::object();
};

struct ReflectRequest {
  std::string prompt_text;
  StructuredPrompt structured_prompt;
  SceneGraph scene;
  // Full verifier report, serialized as-is, is the score context handed to
  // the reflector.
  VerifierReport report;
};

struct VerifyRequest {
  std::string prompt_text;
  StructuredPrompt structured_prompt;
  SceneGraph scene;
  // The category's verifier prompt template travels with the request.
  std::string template_text;
};

struct RefinePromptRequest {
  std::string original_prompt;
  std::string current_prompt;
  std::optional<StructuredPrompt> structured_prompt;
  std::vector<SceneGraph> scenes;    // non-empty, same length as reports
  std::vector<VerifierReport> reports;
  Reflection reflection;
  std::string template_text;
};

std::string encode_generate_request(const GenerateRequest&);
GenerateRequest decode_generate_request(const std::string& body);
std::string encode_generate_response(const SceneGraph& scene);
SceneGraph decode_generate_response(const std::string& body);

std::string encode_correct_request(const CorrectRequest&);
CorrectRequest decode_correct_request(const std::string& body);
std::string encode_correct_response(const SceneGraph& scene);
SceneGraph decode_correct_response(const std::string& body);

std::string encode_reflect_request(const ReflectRequest&);
ReflectRequest decode_reflect_request(const std::string& body);
std::string encode_reflect_response(const Reflection& reflection);
Reflection decode_reflect_response(const std::string& body);

std::string encode_verify_request(const VerifyRequest&);
VerifyRequest decode_verify_request(const std::string& body);
// The verify response mirrors raw model output: a flat JSON object holding
// exactly the category's aspect keys plus "overall_score" and an optional
// "rationale". A missing or out-of-range score raises SchemaError carrying
// the raw payload.
std::string encode_verify_response(const VerifierReport& report,
                                   Category category);
VerifierReport decode_verify_response(const std::string& body,
                                      Category category);

std::string encode_refine_prompt_request(const RefinePromptRequest&);
RefinePromptRequest decode_refine_prompt_request(const std::string& body);
std::string encode_refine_prompt_response(const std::string& refined_prompt);
// Surrounding whitespace is stripped; an empty result raises SchemaError.
std::string decode_refine_prompt_response(const std::string& body);

}  // namespace rflow::wire
