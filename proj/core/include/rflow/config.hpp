// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>

#include "rflow/curation.hpp"
#include "rflow/engine.hpp"
#include "rflow/remote_backend.hpp"
#include "rflow/sim_backend.hpp"

namespace rflow {

// Which verifier drives in-loop guidance and selection.
enum class VerifierChoice { oracle, noisy, bt, remote };
const char* to_string(VerifierChoice v);
VerifierChoice verifier_choice_from_string(const std::string& s);

struct BackendChoice {
  BackendKind kind = BackendKind::simulated;
  std::string url;  // required when remote
};

// Operator-facing configuration. Loaded from a JSON file, then overridden by
// environment variables (endpoints and tokens) and finally by CLI flags.
// Every simulated run requires a seed.
struct AppConfig {
  std::uint64_t seed = 0;
  std::string assets_dir;  // empty = build-time default
  ErrorModel error_model = ErrorModel::defaults();
  std::map<std::string, BackendChoice> backends;  // per role name
  VerifierChoice verifier = VerifierChoice::oracle;
  std::string bt_checkpoint;  // required when verifier == bt
  std::string bearer_token;
  RunConfig run;
  CurationConfig curation;
  std::string suite_path;   // empty = built-in default suite
  std::string corpus_path;  // empty = built-in default corpus
  std::string out_dir = ".";
  int jobs = 1;
  double refine_delta = 0.25;
  int remote_timeout_ms = 30000;

  static AppConfig load_file(const std::string& path);
  // REFLECTIONFLOW_TOKEN and REFLECTIONFLOW_URL_<ROLE> overrides.
  void apply_env();
  void validate() const;

  // Materializes the backend bundle this config describes. The vocabulary is
  // shared by all simulated roles.
  BackendBundle make_backends(const Vocabulary& vocab) const;
};

// Verifier backed by a trained reward model: overall = 10 * sigmoid(r);
// aspect scores reuse the rubric-derived oracle mapping.
class BtVerifier final : public Verifier {
 public:
  BtVerifier(RewardModel model, Vocabulary vocab)
      : model_(std::move(model)), vocab_(std::move(vocab)) {}
  BackendKind kind() const override { return BackendKind::simulated; }
  VerifierReport verify(const StructuredPrompt& prompt,
                        const SceneGraph& scene) override;

 private:
  RewardModel model_;
  Vocabulary vocab_;
};

}  // namespace rflow
