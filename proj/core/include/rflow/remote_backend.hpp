// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "rflow/backend.hpp"
#include "rflow/prompt_assets.hpp"

namespace rflow {

// Transport settings for remote adapters. Retries apply to connection
// failures and 5xx responses with bounded exponential backoff; malformed
// payloads are SchemaErrors and are not retried. Seeds travel on the wire,
// so retried calls are idempotent.
struct RemoteConfig {
  std::string base_url;        // e.g. "http://127.0.0.1:8750"
  std::string bearer_token;    // forwarded as "Authorization: Bearer ..."
  int timeout_ms = 30000;
  int max_attempts = 3;
  int backoff_base_ms = 100;   // sleeps base, 2*base, 4*base, ...
};

// POSTs `body` to base_url+path, handling retries. Returns the response
// body; throws BackendError after exhausting attempts.
std::string remote_post(const RemoteConfig& cfg, const std::string& path,
                        const std::string& body);

class RemoteGenerator final : public Generator {
 public:
  explicit RemoteGenerator(RemoteConfig cfg, Json params = Json::object())
      : cfg_(std::move(cfg)), params_(std::move(params)) {}
  BackendKind kind() const override { return BackendKind::remote; }
  SceneGraph generate(const std::string& prompt_text,
                      const StructuredPrompt& prompt,
                      std::uint64_t seed) override;

 private:
  RemoteConfig cfg_;
  Json params_;
};

class RemoteCorrector final : public Corrector {
 public:
  explicit RemoteCorrector(RemoteConfig cfg, Json params = Json::object())
      : cfg_(std::move(cfg)), params_(std::move(params)) {}
  BackendKind kind() const override { return BackendKind::remote; }
  SceneGraph correct(const std::string& original_prompt,
                     const std::string& refined_prompt,
                     const Reflection& reflection, const SceneGraph& flawed,
                     std::uint64_t seed) override;

 private:
  RemoteConfig cfg_;
  Json params_;
};

class RemoteReflector final : public Reflector {
 public:
  explicit RemoteReflector(RemoteConfig cfg) : cfg_(std::move(cfg)) {}
  BackendKind kind() const override { return BackendKind::remote; }
  Reflection reflect(const StructuredPrompt& prompt, const SceneGraph& scene,
                     const VerifierReport& report) override;

 private:
  RemoteConfig cfg_;
};

// Sends the category's verifier prompt template along with the scene and
// parses the strict flat JSON score object coming back.
class RemoteVerifier final : public Verifier {
 public:
  RemoteVerifier(RemoteConfig cfg, PromptTemplates templates)
      : cfg_(std::move(cfg)), templates_(std::move(templates)) {}
  BackendKind kind() const override { return BackendKind::remote; }
  VerifierReport verify(const StructuredPrompt& prompt,
                        const SceneGraph& scene) override;

 private:
  RemoteConfig cfg_;
  PromptTemplates templates_;
};

// Returns the remote model's text verbatim, stripped of surrounding
// whitespace; an empty response is a SchemaError.
class RemotePromptRefiner final : public PromptRefiner {
 public:
  RemotePromptRefiner(RemoteConfig cfg, PromptTemplates templates)
      : cfg_(std::move(cfg)), templates_(std::move(templates)) {}
  BackendKind kind() const override { return BackendKind::remote; }
  RefineResult refine(const RefineContext& ctx) override;

 private:
  RemoteConfig cfg_;
  PromptTemplates templates_;
};

}  // namespace rflow
