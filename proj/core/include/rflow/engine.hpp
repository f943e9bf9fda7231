// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rflow/backend.hpp"

namespace rflow {

// Budget accounting convention. In total_images mode a run of width N and
// depth M produces exactly N*M images: the initial generation counts as
// round 1 and rounds 2..M refine. literal_rounds produces N*(M+1) images:
// N initial plus M full refinement rounds.
enum class BudgetMode { total_images, literal_rounds };

const char* to_string(BudgetMode m);
BudgetMode budget_mode_from_string(const std::string& s);

struct RunConfig {
  int width = 1;   // N: parallel refinement chains
  int depth = 1;   // M: rounds per chain
  bool enable_reflection = true;
  bool enable_prompt_scaling = true;
  std::uint64_t seed = 0;
  BudgetMode budget_mode = BudgetMode::total_images;
  int jobs = 1;  // chain-level parallelism cap

  void validate() const;
  // Images a run with this config generates.
  std::uint64_t budget() const;
};

// One recorded search step: the scene produced at this iteration, its
// verifier report, and the reflection/refined prompt that produced it
// (absent at iteration 0 or when the corresponding axis is disabled).
struct Step {
  SceneGraph scene;
  VerifierReport report;
  std::optional<Reflection> reflection;
  std::string refined_prompt;
  std::uint64_t seed_used = 0;
  std::string produced_by;  // "generator" | "corrector"
};

struct ChainState {
  int chain_id = 0;
  std::string original_prompt;
  std::string current_prompt;
  StructuredPrompt current_structured;
  bool dead = false;
  std::string death_reason;
  std::vector<Step> history;
};

struct Selection {
  int chain = 0;
  int iteration = 0;
};

// Full search-tree record of one run.
struct Trace {
  int version = 1;
  RunConfig config;
  StructuredPrompt prompt;
  std::vector<ChainState> chains;
  std::uint64_t images_generated = 0;
  std::map<std::string, std::uint64_t> backend_calls;  // per role
  Selection selected;
  std::map<std::string, double> phase_millis;  // wall clock per phase

  const Step& selected_step() const;
};

struct RunOutput {
  SceneGraph best;
  Trace trace;
};

// A run whose chains all died. Carries the partial trace for diagnosis.
class RunError : public Error {
 public:
  RunError(const std::string& what, Trace partial)
      : Error(what), partial_trace(std::move(partial)) {}
  Trace partial_trace;
};

// The iterative generate -> verify -> reflect -> correct search.
//
// Iteration 0 of each chain samples a fresh scene from a derived seed.
// Later iterations score the previous scene, derive a reflection (when
// reflection is enabled), optionally refine the chain's prompt, and either
// correct the previous scene (reflection on) or regenerate from a fresh
// seed (reflection off). Per-call seeds derive from (run seed, chain,
// iteration, role), so results do not depend on the execution schedule.
//
// Backend failures (after client-side retries) kill the failing chain and
// the run continues; when every chain is dead a RunError carrying the
// partial trace is thrown.
RunOutput run(const StructuredPrompt& prompt, const RunConfig& config,
              const BackendBundle& backends);

// Candidate records for final selection, in trace order.
struct SelectionCandidate {
  double score = 0.0;
  int chain = 0;
  int iteration = 0;
};

// Two-stage argmax: best step within each chain, then best chain champion.
// The total order is (higher score, then lower iteration, then lower
// chain id); the result is invariant to input ordering and equals a global
// argmax under the same order. Returns the index into `candidates`. Throws
// InvalidInputError on empty input.
std::size_t select_best(std::span<const SelectionCandidate> candidates);

// Appends exactly one step to the chain (iteration = history size). Exposed
// for tests; `run` is a loop over this.
void step_chain(ChainState& state, const RunConfig& config,
                const BackendBundle& backends,
                std::map<std::string, std::uint64_t>& backend_calls);

// Best-of-B independent generations: run({N=B, M=1}) with both scaling axes
// off.
RunOutput noise_only(const StructuredPrompt& prompt, int budget,
                     std::uint64_t seed, const BackendBundle& backends);

// One chain of B rounds regenerating from fresh seeds with the prompt
// refined between rounds; no reflection or correction.
RunOutput noise_prompt(const StructuredPrompt& prompt, int budget,
                       std::uint64_t seed, const BackendBundle& backends);

// Canonical trace serialization. Wall-clock timings are excluded unless
// include_timings is set, keeping the canonical form byte-reproducible.
Json trace_to_json(const Trace& trace, bool include_timings = false);
Trace trace_from_json(const Json& j);
void save_trace(const Trace& trace, const std::string& path,
                bool include_timings = false);
Trace load_trace(const std::string& path);

// Digest of the canonical (timing-free) trace form.
Digest trace_digest(const Trace& trace);

}  // namespace rflow
