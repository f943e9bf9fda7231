// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "rflow/engine.hpp"

namespace rflow {

// Benchmark suite: prompts balanced across the six categories, each run with
// images_per_prompt independent top-level seeds.
struct BenchmarkSuite {
  std::vector<StructuredPrompt> prompts;
  int images_per_prompt = 4;
  std::uint64_t suite_seed = 0;

  void validate(const Vocabulary& vocab) const;  // every category non-empty
};

Json suite_to_json(const BenchmarkSuite& suite);
BenchmarkSuite suite_from_json(const Json& j);
void save_suite(const BenchmarkSuite& suite, const std::string& path);
BenchmarkSuite load_suite(const std::string& path);

// 60 prompts, 10 per category, deterministic in `seed`.
BenchmarkSuite make_default_suite(std::uint64_t seed, const Vocabulary& vocab);

// One benchmark cell: a prompt evaluated with one top-level seed under one
// config. Suite scoring always uses the exact rule check of the selected
// scene, independent of the in-loop verifier; `pass` means rule score 1.0.
struct CellResult {
  std::string prompt_id;
  Category category = Category::single_object;
  int image_index = 0;
  bool pass = false;
  double rule_score = 0.0;
  bool run_failed = false;  // run error recorded as score 0, never aborts
};

struct ConfigRow {
  std::string label;
  RunConfig config;
  std::map<std::string, double> per_category;  // category name -> pass rate
  double overall = 0.0;  // unweighted mean across category pass rates
  std::uint64_t budget_per_run = 0;
  std::vector<CellResult> cells;
};

struct Report {
  int images_per_prompt = 0;
  std::vector<ConfigRow> rows;
};

Json report_to_json(const Report& report);

// Runs every config over the whole suite. Top-level seeds derive from
// (suite_seed, prompt id, image index); a RunError in a cell records a
// failed cell with score 0. `jobs` caps cell-level parallelism.
Report run_suite(const BenchmarkSuite& suite,
                 std::span<const std::pair<std::string, RunConfig>> configs,
                 const BackendBundle& backends, const Vocabulary& vocab,
                 int jobs = 1);

// Difficulty bins used for stratified reporting: hard [0,0.3],
// medium [0.4,0.7], easy [0.8,1.0]. Difficulties falling between bins go to
// the nearest bin (ties toward the lower bin) and bump `warnings`.
enum class DifficultyBin { hard, medium, easy };
const char* to_string(DifficultyBin b);

struct StratifiedRow {
  DifficultyBin bin = DifficultyBin::hard;
  int prompt_count = 0;
  double before = 0.0;  // mean baseline difficulty of the bin's prompts
  double after = 0.0;   // mean pass rate under the evaluated config
  double delta = 0.0;
};

struct StratifiedTable {
  std::vector<StratifiedRow> rows;  // hard, medium, easy order
  int warnings = 0;                 // out-of-bin difficulties
};

DifficultyBin assign_bin(double difficulty, bool* warned);

// Stratifies one config row of a report by baseline per-prompt difficulty.
StratifiedTable stratify(const std::map<std::string, double>& difficulties,
                         const Report& report, std::size_t row_index = 0);

// One row per (N, M) split with N*M = budget; rows mirror run_suite rows.
// Throws InvalidInputError when a split violates the budget.
Report compare_strategies(int budget,
                          std::span<const std::pair<int, int>> splits,
                          const BenchmarkSuite& suite,
                          const BackendBundle& backends,
                          const Vocabulary& vocab, int jobs = 1);

// Report emission. Formats: "csv" (one row per config x category), "json"
// (full structured report), "plotdata" (score-vs-budget series, one line per
// config label). Returns the written file paths. Write failures abort with
// partial-file cleanup.
std::vector<std::string> emit_reports(const Report& report,
                                      std::span<const std::string> formats,
                                      const std::string& out_dir,
                                      const std::string& basename = "report");

}  // namespace rflow
