// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/remote_backend.hpp"

#include <chrono>
#include <thread>

#include <httplib.h>

#include "rflow/errors.hpp"
#include "rflow/log.hpp"
#include "rflow/wire.hpp"

namespace rflow {

std::string remote_post(const RemoteConfig& cfg, const std::string& path,
                        const std::string& body) {
  std::string last_error;
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    httplib::Client client(cfg.base_url);
    client.set_connection_timeout(0, cfg.timeout_ms * 1000);
    client.set_read_timeout(cfg.timeout_ms / 1000,
                            (cfg.timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!cfg.bearer_token.empty())
      headers.emplace("Authorization", "Bearer " + cfg.bearer_token);

    auto res = client.Post(path, headers, body, "application/json");
    if (res && res->status == 200) return res->body;

    if (res && res->status >= 400 && res->status < 500) {
      // Client errors will not improve with retries.
      throw BackendError("remote backend rejected " + path + " with status " +
                             std::to_string(res->status) + ": " + res->body,
                         attempt, /*retryable=*/false);
    }
    last_error = res ? "status " + std::to_string(res->status)
                     : "transport error " + httplib::to_string(res.error());
    if (attempt < cfg.max_attempts) {
      const int sleep_ms = cfg.backoff_base_ms * (1 << (attempt - 1));
      log::warn("remote " + path + " attempt " + std::to_string(attempt) +
                " failed (" + last_error + "); retrying in " +
                std::to_string(sleep_ms) + " ms");
      std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
    }
  }
  throw BackendError("remote backend " + cfg.base_url + path +
                         " failed after " + std::to_string(cfg.max_attempts) +
                         " attempts: " + last_error,
                     cfg.max_attempts, /*retryable=*/true);
}

SceneGraph RemoteGenerator::generate(const std::string& prompt_text,
                                     const StructuredPrompt& prompt,
                                     std::uint64_t seed) {
  wire::GenerateRequest req;
  req.prompt_text = prompt_text;
  req.structured_prompt = prompt;
  req.seed = seed;
  req.params = params_;
  return wire::decode_generate_response(remote_post(
      cfg_, wire::kGeneratePath, wire::encode_generate_request(req)));
}

SceneGraph RemoteCorrector::correct(const std::string& original_prompt,
                                    const std::string& refined_prompt,
                                    const Reflection& reflection,
                                    const SceneGraph& flawed,
                                    std::uint64_t seed) {
  wire::CorrectRequest req;
  req.original_prompt = original_prompt;
  req.refined_prompt = refined_prompt;
  req.reflection = reflection;
  req.flawed_scene = flawed;
  req.seed = seed;
  req.params = params_;
  return wire::decode_correct_response(
      remote_post(cfg_, wire::kCorrectPath, wire::encode_correct_request(req)));
}

Reflection RemoteReflector::reflect(const StructuredPrompt& prompt,
                                    const SceneGraph& scene,
                                    const VerifierReport& report) {
  wire::ReflectRequest req;
  req.prompt_text = render_prompt_text(prompt, /*long_form=*/false);
  req.structured_prompt = prompt;
  req.scene = scene;
  req.report = report;
  return wire::decode_reflect_response(
      remote_post(cfg_, wire::kReflectPath, wire::encode_reflect_request(req)));
}

VerifierReport RemoteVerifier::verify(const StructuredPrompt& prompt,
                                      const SceneGraph& scene) {
  wire::VerifyRequest req;
  req.prompt_text = render_prompt_text(prompt, /*long_form=*/false);
  req.structured_prompt = prompt;
  req.scene = scene;
  req.template_text = templates_.verifier_for(prompt.category);
  return wire::decode_verify_response(
      remote_post(cfg_, wire::kVerifyPath, wire::encode_verify_request(req)),
      prompt.category);
}

RefineResult RemotePromptRefiner::refine(const RefineContext& ctx) {
  wire::RefinePromptRequest req;
  req.original_prompt = ctx.original_prompt;
  req.current_prompt = ctx.current_prompt;
  req.structured_prompt = ctx.structured;
  req.scenes = ctx.scenes;
  req.reports = ctx.reports;
  req.reflection = ctx.reflection;
  req.template_text = templates_.refine_prompt;
  RefineResult out;
  out.text = wire::decode_refine_prompt_response(remote_post(
      cfg_, wire::kRefinePromptPath, wire::encode_refine_prompt_request(req)));
  return out;
}

}  // namespace rflow
