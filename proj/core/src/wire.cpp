// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/wire.hpp"

#include <algorithm>

#include "rflow/errors.hpp"

namespace rflow::wire {

namespace {

void check_version(const Json& j, const std::string& path) {
  const auto v = require_int(j, "v", path);
  if (v != kProtocolVersion)
    throw SchemaError(join_path(path, "v"),
                      "unsupported protocol version " + std::to_string(v),
                      j.dump());
}

Json scene_field(const SceneGraph& scene) { return scene_to_json(scene); }

std::string strip(const std::string& s) {
  const auto from = s.find_first_not_of(" \t\r\n");
  if (from == std::string::npos) return "";
  const auto to = s.find_last_not_of(" \t\r\n");
  return s.substr(from, to - from + 1);
}

}  // namespace

std::string encode_generate_request(const GenerateRequest& r) {
  Json j;
  j["v"] = kProtocolVersion;
  j["prompt_text"] = r.prompt_text;
  j["structured_prompt"] = prompt_to_json(r.structured_prompt);
  j["seed"] = u64_to_string(r.seed);
  j["params"] = r.params;
  return j.dump();
}

GenerateRequest decode_generate_request(const std::string& body) {
  const Json j = parse_json(body, "generate_request");
  check_version(j, "generate_request");
  GenerateRequest r;
  r.prompt_text = require_string(j, "prompt_text", "generate_request");
  r.structured_prompt =
      prompt_from_json(require_object(j, "structured_prompt", "generate_request"),
                       "generate_request.structured_prompt");
  r.seed = u64_from_string(require_string(j, "seed", "generate_request"),
                           "generate_request.seed");
  if (j.contains("params")) r.params = j["params"];
  return r;
}

std::string encode_generate_response(const SceneGraph& scene) {
  Json j;
  j["v"] = kProtocolVersion;
  j["scene"] = scene_field(scene);
  return j.dump();
}

SceneGraph decode_generate_response(const std::string& body) {
  const Json j = parse_json(body, "generate_response");
  check_version(j, "generate_response");
  return scene_from_json(require_object(j, "scene", "generate_response"),
                         "generate_response.scene");
}

std::string encode_correct_request(const CorrectRequest& r) {
  Json j;
  j["v"] = kProtocolVersion;
  j["original_prompt"] = r.original_prompt;
  j["refined_prompt"] = r.refined_prompt;
  j["reflection"] = reflection_to_json(r.reflection);
  j["flawed_scene"] = scene_field(r.flawed_scene);
  j["seed"] = u64_to_string(r.seed);
  j["params"] = r.params;
  return j.dump();
}

CorrectRequest decode_correct_request(const std::string& body) {
  const Json j = parse_json(body, "correct_request");
  check_version(j, "correct_request");
  CorrectRequest r;
  r.original_prompt = require_string(j, "original_prompt", "correct_request");
  r.refined_prompt = require_string(j, "refined_prompt", "correct_request");
  r.reflection =
      reflection_from_json(require_object(j, "reflection", "correct_request"),
                           "correct_request.reflection");
  r.flawed_scene =
      scene_from_json(require_object(j, "flawed_scene", "correct_request"),
                      "correct_request.flawed_scene");
  r.seed = u64_from_string(require_string(j, "seed", "correct_request"),
                           "correct_request.seed");
  if (j.contains("params")) r.params = j["params"];
  return r;
}

std::string encode_correct_response(const SceneGraph& scene) {
  Json j;
  j["v"] = kProtocolVersion;
  j["scene"] = scene_field(scene);
  return j.dump();
}

SceneGraph decode_correct_response(const std::string& body) {
  const Json j = parse_json(body, "correct_response");
  check_version(j, "correct_response");
  return scene_from_json(require_object(j, "scene", "correct_response"),
                         "correct_response.scene");
}

std::string encode_reflect_request(const ReflectRequest& r) {
  Json j;
  j["v"] = kProtocolVersion;
  j["prompt_text"] = r.prompt_text;
  j["structured_prompt"] = prompt_to_json(r.structured_prompt);
  j["scene"] = scene_field(r.scene);
  j["report"] = report_to_json(r.report);
  return j.dump();
}

ReflectRequest decode_reflect_request(const std::string& body) {
  const Json j = parse_json(body, "reflect_request");
  check_version(j, "reflect_request");
  ReflectRequest r;
  r.prompt_text = require_string(j, "prompt_text", "reflect_request");
  r.structured_prompt =
      prompt_from_json(require_object(j, "structured_prompt", "reflect_request"),
                       "reflect_request.structured_prompt");
  r.scene = scene_from_json(require_object(j, "scene", "reflect_request"),
                            "reflect_request.scene");
  r.report = report_from_json(require_object(j, "report", "reflect_request"),
                              "reflect_request.report");
  validate_report(r.report, r.structured_prompt.category);
  return r;
}

std::string encode_reflect_response(const Reflection& reflection) {
  Json j;
  j["v"] = kProtocolVersion;
  j["reflection"] = reflection_to_json(reflection);
  return j.dump();
}

Reflection decode_reflect_response(const std::string& body) {
  const Json j = parse_json(body, "reflect_response");
  check_version(j, "reflect_response");
  return reflection_from_json(
      require_object(j, "reflection", "reflect_response"),
      "reflect_response.reflection");
}

std::string encode_verify_request(const VerifyRequest& r) {
  Json j;
  j["v"] = kProtocolVersion;
  j["prompt_text"] = r.prompt_text;
  j["structured_prompt"] = prompt_to_json(r.structured_prompt);
  j["scene"] = scene_field(r.scene);
  j["template"] = r.template_text;
  return j.dump();
}

VerifyRequest decode_verify_request(const std::string& body) {
  const Json j = parse_json(body, "verify_request");
  check_version(j, "verify_request");
  VerifyRequest r;
  r.prompt_text = require_string(j, "prompt_text", "verify_request");
  r.structured_prompt =
      prompt_from_json(require_object(j, "structured_prompt", "verify_request"),
                       "verify_request.structured_prompt");
  r.scene = scene_from_json(require_object(j, "scene", "verify_request"),
                            "verify_request.scene");
  r.template_text = require_string(j, "template", "verify_request");
  return r;
}

std::string encode_verify_response(const VerifierReport& report,
                                   Category category) {
  validate_report(report, category);
  Json j;
  for (const std::string& key : aspect_keys(category))
    j[key] = jnum(q6(report.aspect_scores.at(key)));
  j[kOverallScoreKey] = jnum(q6(report.overall_score));
  if (!report.rationale.empty()) j["rationale"] = report.rationale;
  return j.dump();
}

VerifierReport decode_verify_response(const std::string& body,
                                      Category category) {
  const Json j = parse_json(body, "verify_response");
  VerifierReport report;
  for (const std::string& key : aspect_keys(category)) {
    const double v = require_number(j, key, "verify_response");
    if (!(v >= 0.0 && v <= 10.0))
      throw SchemaError(key, "aspect score outside [0,10]", body);
    report.aspect_scores[key] = v;
  }
  report.overall_score =
      require_number(j, kOverallScoreKey, "verify_response");
  if (!(report.overall_score >= 0.0 && report.overall_score <= 10.0))
    throw SchemaError(kOverallScoreKey, "overall score outside [0,10]", body);
  if (j.contains("rationale") && j["rationale"].is_string())
    report.rationale = j["rationale"].get<std::string>();
  return report;
}

std::string encode_refine_prompt_request(const RefinePromptRequest& r) {
  if (r.scenes.empty() || r.scenes.size() != r.reports.size())
    throw InvalidInputError(
        "refine_prompt needs non-empty scene and report lists of equal "
        "length");
  Json j;
  j["v"] = kProtocolVersion;
  j["original_prompt"] = r.original_prompt;
  j["current_prompt"] = r.current_prompt;
  if (r.structured_prompt)
    j["structured_prompt"] = prompt_to_json(*r.structured_prompt);
  Json scenes = Json::array();
  for (const SceneGraph& s : r.scenes) scenes.push_back(scene_field(s));
  j["scenes"] = std::move(scenes);
  Json reports = Json::array();
  for (const VerifierReport& rep : r.reports)
    reports.push_back(report_to_json(rep));
  j["reports"] = std::move(reports);
  j["reflection"] = reflection_to_json(r.reflection);
  j["template"] = r.template_text;
  return j.dump();
}

RefinePromptRequest decode_refine_prompt_request(const std::string& body) {
  const Json j = parse_json(body, "refine_prompt_request");
  check_version(j, "refine_prompt_request");
  RefinePromptRequest r;
  r.original_prompt =
      require_string(j, "original_prompt", "refine_prompt_request");
  r.current_prompt =
      require_string(j, "current_prompt", "refine_prompt_request");
  if (j.contains("structured_prompt"))
    r.structured_prompt =
        prompt_from_json(j["structured_prompt"],
                         "refine_prompt_request.structured_prompt");
  const Json& scenes = require_array(j, "scenes", "refine_prompt_request");
  for (std::size_t i = 0; i < scenes.size(); ++i)
    r.scenes.push_back(scene_from_json(
        scenes[i], "refine_prompt_request.scenes[" + std::to_string(i) + "]"));
  const Json& reports = require_array(j, "reports", "refine_prompt_request");
  for (std::size_t i = 0; i < reports.size(); ++i)
    r.reports.push_back(report_from_json(
        reports[i],
        "refine_prompt_request.reports[" + std::to_string(i) + "]"));
  if (r.scenes.empty() || r.scenes.size() != r.reports.size())
    throw SchemaError("refine_prompt_request.scenes",
                      "scenes and reports must be non-empty and equal length",
                      body);
  r.reflection = reflection_from_json(
      require_object(j, "reflection", "refine_prompt_request"),
      "refine_prompt_request.reflection");
  r.template_text = require_string(j, "template", "refine_prompt_request");
  return r;
}

std::string encode_refine_prompt_response(const std::string& refined_prompt) {
  Json j;
  j["v"] = kProtocolVersion;
  j["refined_prompt"] = refined_prompt;
  return j.dump();
}

std::string decode_refine_prompt_response(const std::string& body) {
  const Json j = parse_json(body, "refine_prompt_response");
  check_version(j, "refine_prompt_response");
  const std::string text =
      strip(require_string(j, "refined_prompt", "refine_prompt_response"));
  if (text.empty())
    throw SchemaError("refine_prompt_response.refined_prompt",
                      "empty refined prompt", body);
  return text;
}

}  // namespace rflow::wire
