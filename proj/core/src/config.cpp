// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/config.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include "rflow/errors.hpp"

namespace rflow {

namespace {

constexpr std::array<const char*, 5> kRoleNames = {
    "generator", "corrector", "reflector", "verifier", "refiner"};

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(c));
  return s;
}

}  // namespace

const char* to_string(VerifierChoice v) {
  switch (v) {
    case VerifierChoice::oracle: return "oracle";
    case VerifierChoice::noisy: return "noisy";
    case VerifierChoice::bt: return "bt";
    case VerifierChoice::remote: return "remote";
  }
  return "?";
}

VerifierChoice verifier_choice_from_string(const std::string& s) {
  if (s == "oracle") return VerifierChoice::oracle;
  if (s == "noisy") return VerifierChoice::noisy;
  if (s == "bt") return VerifierChoice::bt;
  if (s == "remote") return VerifierChoice::remote;
  throw InvalidInputError("unknown verifier choice: " + s);
}

AppConfig AppConfig::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const Json j = parse_json(text, "config");

  AppConfig cfg;
  if (j.contains("seed"))
    cfg.seed = u64_from_string(j["seed"].get<std::string>(), "config.seed");
  if (j.contains("assets_dir")) cfg.assets_dir = j["assets_dir"];
  if (j.contains("error_model"))
    cfg.error_model =
        error_model_from_json(j["error_model"], "config.error_model");
  if (j.contains("backends")) {
    for (const auto& [role, spec] : j["backends"].items()) {
      BackendChoice choice;
      const std::string kind = require_string(spec, "kind", "config.backends");
      if (kind == "simulated") choice.kind = BackendKind::simulated;
      else if (kind == "remote") choice.kind = BackendKind::remote;
      else
        throw SchemaError("config.backends." + role + ".kind",
                          "expected \"simulated\" or \"remote\"");
      if (spec.contains("url")) choice.url = spec["url"];
      cfg.backends[role] = choice;
    }
  }
  if (j.contains("verifier"))
    cfg.verifier = verifier_choice_from_string(j["verifier"]);
  if (j.contains("bt_checkpoint")) cfg.bt_checkpoint = j["bt_checkpoint"];
  if (j.contains("run")) {
    const Json& r = j["run"];
    if (r.contains("width")) cfg.run.width = r["width"];
    if (r.contains("depth")) cfg.run.depth = r["depth"];
    if (r.contains("enable_reflection"))
      cfg.run.enable_reflection = r["enable_reflection"];
    if (r.contains("enable_prompt_scaling"))
      cfg.run.enable_prompt_scaling = r["enable_prompt_scaling"];
    if (r.contains("budget_mode"))
      cfg.run.budget_mode = budget_mode_from_string(r["budget_mode"]);
  }
  if (j.contains("curation")) {
    const Json& c = j["curation"];
    CurationConfig& cur = cfg.curation;
    if (c.contains("rollout_n")) cur.rollout_n = c["rollout_n"];
    if (c.contains("top_bottom_k")) cur.top_bottom_k = c["top_bottom_k"];
    if (c.contains("pairs_per_prompt"))
      cur.pairs_per_prompt = c["pairs_per_prompt"];
    if (c.contains("longshort_n")) cur.longshort_n = c["longshort_n"];
    if (c.contains("longshort_max_pairs"))
      cur.longshort_max_pairs = c["longshort_max_pairs"];
    if (c.contains("post_filter_margin"))
      cur.post_filter_margin = c["post_filter_margin"];
    if (c.contains("longshort_margin"))
      cur.longshort_margin = c["longshort_margin"];
    if (c.contains("difficulty_mode")) {
      const std::string mode = c["difficulty_mode"];
      if (mode == "strict_quantile")
        cur.difficulty_mode = DifficultyMode::strict_quantile;
      else if (mode == "fixed_bins")
        cur.difficulty_mode = DifficultyMode::fixed_bins;
      else
        throw SchemaError("config.curation.difficulty_mode",
                          "expected strict_quantile or fixed_bins");
    }
    if (c.contains("cot_flip_rate")) cur.cot_flip_rate = c["cot_flip_rate"];
    if (c.contains("sources")) {
      cur.sources.clear();
      for (const auto& s : c["sources"]) {
        if (!is_triplet_source(s.get<std::string>()))
          throw SchemaError("config.curation.sources",
                            "unknown source " + s.get<std::string>());
        cur.sources.insert(s.get<std::string>());
      }
    }
    if (c.contains("edit_records_path"))
      cur.edit_records_path = c["edit_records_path"];
    if (c.contains("train")) {
      const Json& t = c["train"];
      if (t.contains("lr")) cur.train.lr = t["lr"];
      if (t.contains("epochs")) cur.train.epochs = t["epochs"];
      if (t.contains("batch")) cur.train.batch = t["batch"];
      if (t.contains("l2")) cur.train.l2 = t["l2"];
    }
  }
  if (j.contains("suite_path")) cfg.suite_path = j["suite_path"];
  if (j.contains("corpus_path")) cfg.corpus_path = j["corpus_path"];
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"];
  if (j.contains("jobs")) cfg.jobs = j["jobs"];
  if (j.contains("refine_delta")) cfg.refine_delta = j["refine_delta"];
  if (j.contains("remote_timeout_ms"))
    cfg.remote_timeout_ms = j["remote_timeout_ms"];
  if (j.contains("token")) cfg.bearer_token = j["token"];
  return cfg;
}

void AppConfig::apply_env() {
  if (const char* token = std::getenv("REFLECTIONFLOW_TOKEN"))
    bearer_token = token;
  for (const char* role : kRoleNames) {
    const std::string var = "REFLECTIONFLOW_URL_" + upper(role);
    if (const char* url = std::getenv(var.c_str())) {
      backends[role].kind = BackendKind::remote;
      backends[role].url = url;
    }
  }
}

void AppConfig::validate() const {
  error_model.validate();
  run.validate();
  if (jobs < 1) throw InvalidInputError("config jobs must be >= 1");
  for (const auto& [role, choice] : backends) {
    bool known = false;
    for (const char* r : kRoleNames) known = known || role == r;
    if (!known) throw InvalidInputError("unknown backend role: " + role);
    if (choice.kind == BackendKind::remote && choice.url.empty())
      throw InvalidInputError("remote backend for role '" + role +
                              "' needs a url");
  }
  if (verifier == VerifierChoice::bt && bt_checkpoint.empty())
    throw InvalidInputError("bt verifier needs bt_checkpoint");
  if (!(refine_delta >= 0.0 && refine_delta <= 1.0))
    throw InvalidInputError("refine_delta must lie in [0,1]");
}

VerifierReport BtVerifier::verify(const StructuredPrompt& prompt,
                                  const SceneGraph& scene) {
  VerifierReport report = oracle_report(prompt, scene, vocab_);
  const double r = reward_score(model_, prompt, scene, vocab_);
  report.overall_score = q6(10.0 / (1.0 + std::exp(-r)));
  return report;
}

BackendBundle AppConfig::make_backends(const Vocabulary& vocab) const {
  validate();

  SimConfig sim;
  sim.error_model = error_model;
  sim.vocab = vocab;
  sim.model_seed = derive_seed(seed, {0x6d6f64656cULL});
  sim.refine_delta = refine_delta;

  const auto choice_for = [&](const char* role) {
    const auto it = backends.find(role);
    return it == backends.end() ? BackendChoice{} : it->second;
  };
  const auto remote_cfg = [&](const BackendChoice& choice) {
    RemoteConfig rc;
    rc.base_url = choice.url;
    rc.bearer_token = bearer_token;
    rc.timeout_ms = remote_timeout_ms;
    return rc;
  };

  const std::string assets =
      assets_dir.empty() ? default_assets_dir() : assets_dir;

  BackendBundle bundle;

  const BackendChoice gen = choice_for("generator");
  bundle.generator = gen.kind == BackendKind::remote
                         ? std::shared_ptr<Generator>(
                               std::make_shared<RemoteGenerator>(remote_cfg(gen)))
                         : std::make_shared<SimGenerator>(sim);

  const BackendChoice cor = choice_for("corrector");
  bundle.corrector = cor.kind == BackendKind::remote
                         ? std::shared_ptr<Corrector>(
                               std::make_shared<RemoteCorrector>(remote_cfg(cor)))
                         : std::make_shared<SimCorrector>(sim);

  const BackendChoice ref = choice_for("reflector");
  bundle.reflector = ref.kind == BackendKind::remote
                         ? std::shared_ptr<Reflector>(
                               std::make_shared<RemoteReflector>(remote_cfg(ref)))
                         : std::make_shared<SimReflector>(sim);

  const BackendChoice rfn = choice_for("refiner");
  if (rfn.kind == BackendKind::remote) {
    bundle.prompt_refiner = std::make_shared<RemotePromptRefiner>(
        remote_cfg(rfn), PromptTemplates::load(assets));
  } else {
    bundle.prompt_refiner = std::make_shared<SimPromptRefiner>(sim);
  }

  const BackendChoice ver = choice_for("verifier");
  switch (verifier) {
    case VerifierChoice::oracle: {
      SimConfig oracle = sim;
      oracle.error_model.verifier_noise = 0.0;
      bundle.verifier = std::make_shared<SimVerifier>(oracle);
      break;
    }
    case VerifierChoice::noisy:
      bundle.verifier = std::make_shared<SimVerifier>(sim);
      break;
    case VerifierChoice::bt:
      bundle.verifier = std::make_shared<BtVerifier>(
          load_checkpoint(bt_checkpoint), vocab);
      break;
    case VerifierChoice::remote:
      if (ver.kind != BackendKind::remote || ver.url.empty())
        throw InvalidInputError(
            "verifier=remote needs a remote verifier backend url");
      bundle.verifier = std::make_shared<RemoteVerifier>(
          remote_cfg(ver), PromptTemplates::load(assets));
      break;
  }

  bundle.validate();
  return bundle;
}

}  // namespace rflow
