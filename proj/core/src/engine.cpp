// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/engine.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "rflow/errors.hpp"
#include "rflow/parallel.hpp"
#include "rflow/rng.hpp"

namespace rflow {

namespace {

constexpr std::uint64_t role_label(BackendRole r) {
  return 0x726f6c65ULL * 31 + static_cast<std::uint64_t>(r);
}

int rounds_for(const RunConfig& c) {
  return c.budget_mode == BudgetMode::total_images ? c.depth : c.depth + 1;
}

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start)
      .count();
}

}  // namespace

const char* to_string(BudgetMode m) {
  return m == BudgetMode::total_images ? "total_images" : "literal_rounds";
}

BudgetMode budget_mode_from_string(const std::string& s) {
  if (s == "total_images") return BudgetMode::total_images;
  if (s == "literal_rounds") return BudgetMode::literal_rounds;
  throw InvalidInputError("unknown budget mode: " + s);
}

void RunConfig::validate() const {
  if (width < 1 || depth < 1)
    throw InvalidInputError("run config needs width >= 1 and depth >= 1");
  if (jobs < 1) throw InvalidInputError("run config needs jobs >= 1");
}

std::uint64_t RunConfig::budget() const {
  const std::uint64_t n = static_cast<std::uint64_t>(width);
  const std::uint64_t m = static_cast<std::uint64_t>(depth);
  return budget_mode == BudgetMode::total_images ? n * m : n * (m + 1);
}

const Step& Trace::selected_step() const {
  return chains.at(static_cast<std::size_t>(selected.chain))
      .history.at(static_cast<std::size_t>(selected.iteration));
}

namespace {

struct ChainScratch {
  std::map<std::string, std::uint64_t> calls;
  std::map<std::string, double> phase_millis;
};

void record_step(ChainState& state, const RunConfig& config,
                 const BackendBundle& backends, ChainScratch& scratch) {
  const int iter = static_cast<int>(state.history.size());
  Reflection reflection;
  bool have_reflection = false;
  std::string refined_text;

  if (iter == 0) {
    const std::uint64_t seed = derive_seed(
        config.seed, {static_cast<std::uint64_t>(state.chain_id), 0,
                      role_label(BackendRole::generator)});
    const auto t0 = Clock::now();
    SceneGraph scene = backends.generator->generate(
        state.current_prompt, state.current_structured, seed);
    scratch.phase_millis["generate"] += ms_since(t0);
    ++scratch.calls["generator"];
    scene.seed_provenance.chain = state.chain_id;
    scene.seed_provenance.iteration = iter;

    const auto t1 = Clock::now();
    VerifierReport report =
        backends.verifier->verify(state.current_structured, scene);
    scratch.phase_millis["verify"] += ms_since(t1);
    ++scratch.calls["verifier"];

    state.history.push_back({std::move(scene), std::move(report), std::nullopt,
                             "", seed, "generator"});
    return;
  }

  const Step& prev = state.history.back();

  if (config.enable_reflection) {
    const auto t0 = Clock::now();
    reflection = backends.reflector->reflect(state.current_structured,
                                             prev.scene, prev.report);
    scratch.phase_millis["reflect"] += ms_since(t0);
    ++scratch.calls["reflector"];
    have_reflection = true;
  }

  if (config.enable_prompt_scaling) {
    RefineContext ctx;
    ctx.original_prompt = state.original_prompt;
    ctx.current_prompt = state.current_prompt;
    ctx.structured = state.current_structured;
    ctx.scenes = {prev.scene};
    ctx.reports = {prev.report};
    ctx.reflection =
        have_reflection ? reflection : Reflection{kNoChangesText, {}};
    const auto t0 = Clock::now();
    RefineResult refined = backends.prompt_refiner->refine(ctx);
    scratch.phase_millis["refine"] += ms_since(t0);
    ++scratch.calls["refiner"];
    refined_text = refined.text;
    state.current_prompt = refined.text;
    if (refined.structured)
      state.current_structured = std::move(*refined.structured);
  }

  SceneGraph scene;
  std::uint64_t seed = 0;
  std::string role;
  if (config.enable_reflection) {
    seed = derive_seed(config.seed,
                       {static_cast<std::uint64_t>(state.chain_id),
                        static_cast<std::uint64_t>(iter),
                        role_label(BackendRole::corrector)});
    const auto t0 = Clock::now();
    scene = backends.corrector->correct(state.original_prompt,
                                        state.current_prompt, reflection,
                                        prev.scene, seed);
    scratch.phase_millis["correct"] += ms_since(t0);
    ++scratch.calls["corrector"];
    role = "corrector";
  } else {
    // Reflection disabled: the round degrades to a fresh generation from a
    // new seed.
    seed = derive_seed(config.seed,
                       {static_cast<std::uint64_t>(state.chain_id),
                        static_cast<std::uint64_t>(iter),
                        role_label(BackendRole::generator)});
    const auto t0 = Clock::now();
    scene = backends.generator->generate(state.current_prompt,
                                         state.current_structured, seed);
    scratch.phase_millis["generate"] += ms_since(t0);
    ++scratch.calls["generator"];
    role = "generator";
  }
  scene.seed_provenance.chain = state.chain_id;
  scene.seed_provenance.iteration = iter;

  const auto t1 = Clock::now();
  VerifierReport report =
      backends.verifier->verify(state.current_structured, scene);
  scratch.phase_millis["verify"] += ms_since(t1);
  ++scratch.calls["verifier"];

  Step step;
  step.scene = std::move(scene);
  step.report = std::move(report);
  if (have_reflection) step.reflection = std::move(reflection);
  step.refined_prompt = std::move(refined_text);
  step.seed_used = seed;
  step.produced_by = std::move(role);
  state.history.push_back(std::move(step));
}

}  // namespace

void step_chain(ChainState& state, const RunConfig& config,
                const BackendBundle& backends,
                std::map<std::string, std::uint64_t>& backend_calls) {
  if (state.dead)
    throw InvalidInputError("step_chain called on a dead chain");
  if (state.history.empty())
    throw InvalidInputError("step_chain needs a non-empty history");
  ChainScratch scratch;
  record_step(state, config, backends, scratch);
  for (const auto& [k, v] : scratch.calls) backend_calls[k] += v;
}

RunOutput run(const StructuredPrompt& prompt, const RunConfig& config,
              const BackendBundle& backends) {
  config.validate();
  backends.validate();

  const std::string original_text =
      render_prompt_text(prompt, /*long_form=*/false);
  const int total_rounds = rounds_for(config);

  std::vector<ChainState> chains(static_cast<std::size_t>(config.width));
  std::vector<ChainScratch> scratch(chains.size());

  parallel_for(chains.size(), config.jobs, [&](std::size_t c) {
    ChainState& state = chains[c];
    state.chain_id = static_cast<int>(c);
    state.original_prompt = original_text;
    state.current_prompt = original_text;
    state.current_structured = prompt;
    for (int iter = 0; iter < total_rounds; ++iter) {
      try {
        record_step(state, config, backends, scratch[c]);
      } catch (const BackendError& e) {
        state.dead = true;
        state.death_reason = e.what();
        break;
      } catch (const SchemaError& e) {
        state.dead = true;
        state.death_reason = e.what();
        break;
      }
    }
  });

  Trace trace;
  trace.config = config;
  trace.prompt = prompt;
  trace.chains = std::move(chains);
  for (const ChainScratch& s : scratch) {
    for (const auto& [k, v] : s.calls) trace.backend_calls[k] += v;
    for (const auto& [k, v] : s.phase_millis) trace.phase_millis[k] += v;
  }
  for (const ChainState& chain : trace.chains)
    trace.images_generated += chain.history.size();

  std::vector<SelectionCandidate> candidates;
  for (const ChainState& chain : trace.chains)
    for (std::size_t i = 0; i < chain.history.size(); ++i)
      candidates.push_back({chain.history[i].report.overall_score,
                            chain.chain_id, static_cast<int>(i)});
  if (candidates.empty())
    throw RunError("all chains died before producing a scene",
                   std::move(trace));

  const SelectionCandidate& chosen = candidates[select_best(candidates)];
  trace.selected = {chosen.chain, chosen.iteration};

  RunOutput out;
  out.best = trace.selected_step().scene;
  out.trace = std::move(trace);
  return out;
}

std::size_t select_best(std::span<const SelectionCandidate> candidates) {
  if (candidates.empty())
    throw InvalidInputError("select_best needs a non-empty candidate list");

  // Total order: higher score, then lower iteration, then lower chain id.
  const auto better = [](const SelectionCandidate& a,
                         const SelectionCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.iteration != b.iteration) return a.iteration < b.iteration;
    return a.chain < b.chain;
  };

  // Stage 1: champion per chain.
  std::map<int, std::size_t> champion;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto [it, inserted] = champion.try_emplace(candidates[i].chain, i);
    if (!inserted && better(candidates[i], candidates[it->second]))
      it->second = i;
  }
  // Stage 2: best chain champion.
  std::size_t best = champion.begin()->second;
  for (const auto& [chain, idx] : champion)
    if (better(candidates[idx], candidates[best])) best = idx;
  return best;
}

RunOutput noise_only(const StructuredPrompt& prompt, int budget,
                     std::uint64_t seed, const BackendBundle& backends) {
  if (budget < 1) throw InvalidInputError("noise_only needs budget >= 1");
  RunConfig config;
  config.width = budget;
  config.depth = 1;
  config.enable_reflection = false;
  config.enable_prompt_scaling = false;
  config.seed = seed;
  return run(prompt, config, backends);
}

RunOutput noise_prompt(const StructuredPrompt& prompt, int budget,
                       std::uint64_t seed, const BackendBundle& backends) {
  if (budget < 1) throw InvalidInputError("noise_prompt needs budget >= 1");
  RunConfig config;
  config.width = 1;
  config.depth = budget;
  config.enable_reflection = false;
  config.enable_prompt_scaling = true;
  config.seed = seed;
  return run(prompt, config, backends);
}

namespace {

Json config_to_json(const RunConfig& c) {
  Json j;
  j["width"] = c.width;
  j["depth"] = c.depth;
  j["enable_reflection"] = c.enable_reflection;
  j["enable_prompt_scaling"] = c.enable_prompt_scaling;
  j["seed"] = u64_to_string(c.seed);
  j["budget_mode"] = to_string(c.budget_mode);
  return j;
}

RunConfig config_from_json(const Json& j, const std::string& path) {
  RunConfig c;
  c.width = static_cast<int>(require_int(j, "width", path));
  c.depth = static_cast<int>(require_int(j, "depth", path));
  c.enable_reflection = require_field(j, "enable_reflection", path).get<bool>();
  c.enable_prompt_scaling =
      require_field(j, "enable_prompt_scaling", path).get<bool>();
  c.seed = u64_from_string(require_string(j, "seed", path), path + ".seed");
  c.budget_mode =
      budget_mode_from_string(require_string(j, "budget_mode", path));
  return c;
}

Json step_to_json(const Step& s) {
  Json j;
  j["scene"] = scene_to_json(s.scene);
  j["report"] = report_to_json(s.report);
  if (s.reflection) j["reflection"] = reflection_to_json(*s.reflection);
  j["refined_prompt"] = s.refined_prompt;
  j["seed_used"] = u64_to_string(s.seed_used);
  j["produced_by"] = s.produced_by;
  return j;
}

Step step_from_json(const Json& j, const std::string& path) {
  Step s;
  s.scene = scene_from_json(require_object(j, "scene", path), path + ".scene");
  s.report =
      report_from_json(require_object(j, "report", path), path + ".report");
  if (j.contains("reflection"))
    s.reflection =
        reflection_from_json(j["reflection"], path + ".reflection");
  s.refined_prompt = require_string(j, "refined_prompt", path);
  s.seed_used =
      u64_from_string(require_string(j, "seed_used", path), path + ".seed_used");
  s.produced_by = require_string(j, "produced_by", path);
  return s;
}

}  // namespace

Json trace_to_json(const Trace& trace, bool include_timings) {
  Json j;
  j["v"] = trace.version;
  j["config"] = config_to_json(trace.config);
  j["prompt"] = prompt_to_json(trace.prompt);
  Json chains = Json::array();
  for (const ChainState& chain : trace.chains) {
    Json cj;
    cj["chain_id"] = chain.chain_id;
    cj["original_prompt"] = chain.original_prompt;
    cj["current_prompt"] = chain.current_prompt;
    cj["current_structured"] = prompt_to_json(chain.current_structured);
    cj["dead"] = chain.dead;
    cj["death_reason"] = chain.death_reason;
    Json steps = Json::array();
    for (const Step& s : chain.history) steps.push_back(step_to_json(s));
    cj["history"] = std::move(steps);
    chains.push_back(std::move(cj));
  }
  j["chains"] = std::move(chains);
  j["images_generated"] = trace.images_generated;
  Json calls;
  for (const auto& [k, v] : trace.backend_calls) calls[k] = v;
  j["backend_calls"] = std::move(calls);
  Json sel;
  sel["chain"] = trace.selected.chain;
  sel["iteration"] = trace.selected.iteration;
  j["selected"] = std::move(sel);
  if (include_timings) {
    Json timings;
    for (const auto& [k, v] : trace.phase_millis) timings[k] = q6(v);
    j["phase_millis"] = std::move(timings);
  }
  return j;
}

Trace trace_from_json(const Json& j) {
  Trace t;
  t.version = static_cast<int>(require_int(j, "v", "trace"));
  t.config = config_from_json(require_object(j, "config", "trace"),
                              "trace.config");
  t.prompt =
      prompt_from_json(require_object(j, "prompt", "trace"), "trace.prompt");
  const Json& chains = require_array(j, "chains", "trace");
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const std::string path = "trace.chains[" + std::to_string(c) + "]";
    const Json& cj = chains[c];
    ChainState chain;
    chain.chain_id = static_cast<int>(require_int(cj, "chain_id", path));
    chain.original_prompt = require_string(cj, "original_prompt", path);
    chain.current_prompt = require_string(cj, "current_prompt", path);
    chain.current_structured = prompt_from_json(
        require_object(cj, "current_structured", path),
        path + ".current_structured");
    chain.dead = require_field(cj, "dead", path).get<bool>();
    chain.death_reason = require_string(cj, "death_reason", path);
    const Json& steps = require_array(cj, "history", path);
    for (std::size_t i = 0; i < steps.size(); ++i)
      chain.history.push_back(step_from_json(
          steps[i], path + ".history[" + std::to_string(i) + "]"));
    t.chains.push_back(std::move(chain));
  }
  t.images_generated =
      static_cast<std::uint64_t>(require_int(j, "images_generated", "trace"));
  for (const auto& [k, v] :
       require_object(j, "backend_calls", "trace").items())
    t.backend_calls[k] = v.get<std::uint64_t>();
  const Json& sel = require_object(j, "selected", "trace");
  t.selected.chain = static_cast<int>(require_int(sel, "chain", "trace.selected"));
  t.selected.iteration =
      static_cast<int>(require_int(sel, "iteration", "trace.selected"));
  if (j.contains("phase_millis"))
    for (const auto& [k, v] : j["phase_millis"].items())
      t.phase_millis[k] = v.get<double>();
  return t;
}

void save_trace(const Trace& trace, const std::string& path,
                bool include_timings) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write trace: " + path);
  out << trace_to_json(trace, include_timings).dump(2) << "\n";
  if (!out) throw IoError("trace write failed: " + path);
}

Trace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open trace: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return trace_from_json(parse_json(text, "trace"));
}

Digest trace_digest(const Trace& trace) {
  return Digest{fnv1a64(trace_to_json(trace, /*include_timings=*/false).dump())};
}

}  // namespace rflow
