// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/evalbench.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rflow/errors.hpp"
#include "rflow/parallel.hpp"
#include "rflow/rng.hpp"
#include "rflow/rule_verify.hpp"

namespace rflow {

namespace {
constexpr std::uint64_t kSuiteStream = 0x7375697465ULL;
}

void BenchmarkSuite::validate(const Vocabulary& vocab) const {
  if (images_per_prompt < 1)
    throw InvalidInputError("suite needs images_per_prompt >= 1");
  std::set<Category> seen;
  for (const StructuredPrompt& p : prompts) {
    validate_prompt(p, vocab);
    seen.insert(p.category);
  }
  if (seen.size() != 6)
    throw InvalidInputError("suite must cover all six categories");
}

Json suite_to_json(const BenchmarkSuite& suite) {
  Json j;
  j["v"] = 1;
  j["images_per_prompt"] = suite.images_per_prompt;
  j["suite_seed"] = u64_to_string(suite.suite_seed);
  Json prompts = Json::array();
  for (const StructuredPrompt& p : suite.prompts)
    prompts.push_back(prompt_to_json(p));
  j["prompts"] = std::move(prompts);
  return j;
}

BenchmarkSuite suite_from_json(const Json& j) {
  BenchmarkSuite suite;
  if (require_int(j, "v", "suite") != 1)
    throw SchemaError("suite.v", "unsupported suite version");
  suite.images_per_prompt =
      static_cast<int>(require_int(j, "images_per_prompt", "suite"));
  suite.suite_seed = u64_from_string(require_string(j, "suite_seed", "suite"),
                                     "suite.suite_seed");
  const Json& prompts = require_array(j, "prompts", "suite");
  for (std::size_t i = 0; i < prompts.size(); ++i)
    suite.prompts.push_back(prompt_from_json(
        prompts[i], "suite.prompts[" + std::to_string(i) + "]"));
  return suite;
}

void save_suite(const BenchmarkSuite& suite, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write suite: " + path);
  out << suite_to_json(suite).dump(2) << "\n";
  if (!out) throw IoError("suite write failed: " + path);
}

BenchmarkSuite load_suite(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open suite: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return suite_from_json(parse_json(text, "suite"));
}

BenchmarkSuite make_default_suite(std::uint64_t seed, const Vocabulary& vocab) {
  BenchmarkSuite suite;
  suite.suite_seed = seed;
  suite.images_per_prompt = 4;
  suite.prompts = make_random_prompts(60, derive_seed(seed, {kSuiteStream}),
                                      vocab);
  suite.validate(vocab);
  return suite;
}

Report run_suite(const BenchmarkSuite& suite,
                 std::span<const std::pair<std::string, RunConfig>> configs,
                 const BackendBundle& backends, const Vocabulary& vocab,
                 int jobs) {
  suite.validate(vocab);
  Report report;
  report.images_per_prompt = suite.images_per_prompt;

  for (const auto& [label, base_config] : configs) {
    base_config.validate();
    ConfigRow row;
    row.label = label;
    row.config = base_config;
    row.budget_per_run = base_config.budget();

    const std::size_t cell_count =
        suite.prompts.size() * static_cast<std::size_t>(suite.images_per_prompt);
    row.cells.resize(cell_count);

    parallel_for(cell_count, jobs, [&](std::size_t cell) {
      const std::size_t prompt_index =
          cell / static_cast<std::size_t>(suite.images_per_prompt);
      const int image_index =
          static_cast<int>(cell % static_cast<std::size_t>(suite.images_per_prompt));
      const StructuredPrompt& prompt = suite.prompts[prompt_index];

      RunConfig config = base_config;
      config.jobs = 1;  // parallelism lives at the cell level here
      config.seed = derive_seed(suite.suite_seed,
                                {kSuiteStream, fnv1a64(prompt.id),
                                 static_cast<std::uint64_t>(image_index)});
      CellResult& out = row.cells[cell];
      out.prompt_id = prompt.id;
      out.category = prompt.category;
      out.image_index = image_index;
      try {
        const RunOutput result = run(prompt, config, backends);
        // Ground truth is always the exact rule check, independent of the
        // in-loop verifier.
        const RuleVerdict verdict = verify_rule(prompt, result.best, vocab);
        out.rule_score = verdict.score;
        out.pass = verdict.pass;
      } catch (const RunError&) {
        out.run_failed = true;
        out.rule_score = 0.0;
        out.pass = false;
      }
    });

    std::map<std::string, double> category_sum;
    std::map<std::string, int> category_count;
    for (const CellResult& cell : row.cells) {
      const std::string name = to_string(cell.category);
      category_sum[name] += cell.pass ? 1.0 : 0.0;
      category_count[name] += 1;
    }
    double total = 0.0;
    for (const auto& [name, sum] : category_sum) {
      row.per_category[name] = sum / category_count[name];
      total += row.per_category[name];
    }
    row.overall = total / static_cast<double>(row.per_category.size());
    report.rows.push_back(std::move(row));
  }
  return report;
}

const char* to_string(DifficultyBin b) {
  switch (b) {
    case DifficultyBin::hard: return "hard";
    case DifficultyBin::medium: return "medium";
    case DifficultyBin::easy: return "easy";
  }
  return "?";
}

DifficultyBin assign_bin(double difficulty, bool* warned) {
  if (warned) *warned = false;
  if (difficulty <= 0.3) return DifficultyBin::hard;
  if (difficulty >= 0.4 && difficulty <= 0.7) return DifficultyBin::medium;
  if (difficulty >= 0.8) return DifficultyBin::easy;
  // Gap values (0.3, 0.4) and (0.7, 0.8): nearest bin, ties toward lower.
  if (warned) *warned = true;
  if (difficulty < 0.4) {
    const double to_hard = difficulty - 0.3;
    const double to_medium = 0.4 - difficulty;
    return to_hard <= to_medium ? DifficultyBin::hard : DifficultyBin::medium;
  }
  const double to_medium = difficulty - 0.7;
  const double to_easy = 0.8 - difficulty;
  return to_medium <= to_easy ? DifficultyBin::medium : DifficultyBin::easy;
}

StratifiedTable stratify(const std::map<std::string, double>& difficulties,
                         const Report& report, std::size_t row_index) {
  if (row_index >= report.rows.size())
    throw InvalidInputError("stratify: row index out of range");
  const ConfigRow& row = report.rows[row_index];

  struct Acc {
    double before_sum = 0.0;
    double after_sum = 0.0;
    int prompts = 0;
    int cells = 0;
    double pass_sum = 0.0;
  };
  std::map<DifficultyBin, Acc> acc;
  StratifiedTable table;

  std::map<std::string, DifficultyBin> bins;
  for (const auto& [prompt_id, difficulty] : difficulties) {
    if (!(difficulty >= 0.0 && difficulty <= 1.0))
      throw InvalidInputError("difficulty for '" + prompt_id +
                              "' outside [0,1]");
    bool warned = false;
    const DifficultyBin bin = assign_bin(difficulty, &warned);
    if (warned) ++table.warnings;
    bins[prompt_id] = bin;
    Acc& a = acc[bin];
    a.before_sum += difficulty;
    a.prompts += 1;
  }

  for (const CellResult& cell : row.cells) {
    const auto it = bins.find(cell.prompt_id);
    if (it == bins.end()) continue;  // prompt without a baseline difficulty
    Acc& a = acc[it->second];
    a.cells += 1;
    a.pass_sum += cell.pass ? 1.0 : 0.0;
  }

  for (const DifficultyBin bin :
       {DifficultyBin::hard, DifficultyBin::medium, DifficultyBin::easy}) {
    const auto it = acc.find(bin);
    if (it == acc.end()) continue;
    StratifiedRow out;
    out.bin = bin;
    out.prompt_count = it->second.prompts;
    out.before = it->second.prompts
                     ? it->second.before_sum / it->second.prompts
                     : 0.0;
    out.after =
        it->second.cells ? it->second.pass_sum / it->second.cells : 0.0;
    out.delta = out.after - out.before;
    table.rows.push_back(out);
  }
  return table;
}

Report compare_strategies(int budget,
                          std::span<const std::pair<int, int>> splits,
                          const BenchmarkSuite& suite,
                          const BackendBundle& backends,
                          const Vocabulary& vocab, int jobs) {
  if (budget < 1) throw InvalidInputError("budget must be >= 1");
  std::vector<std::pair<std::string, RunConfig>> configs;
  for (const auto& [width, depth] : splits) {
    if (width < 1 || depth < 1 || width * depth != budget)
      throw InvalidInputError("split " + std::to_string(width) + "x" +
                              std::to_string(depth) +
                              " violates the budget N*M = " +
                              std::to_string(budget));
    RunConfig config;
    config.width = width;
    config.depth = depth;
    // Depth 1 has no refinement rounds, so the axes are inert by
    // construction; deeper splits run the full loop.
    configs.emplace_back(std::to_string(width) + "x" + std::to_string(depth),
                         config);
  }
  return run_suite(suite, configs, backends, vocab, jobs);
}

Json report_to_json(const Report& report) {
  Json j;
  j["v"] = 1;
  j["images_per_prompt"] = report.images_per_prompt;
  Json rows = Json::array();
  for (const ConfigRow& row : report.rows) {
    Json rj;
    rj["label"] = row.label;
    Json cfg;
    cfg["width"] = row.config.width;
    cfg["depth"] = row.config.depth;
    cfg["enable_reflection"] = row.config.enable_reflection;
    cfg["enable_prompt_scaling"] = row.config.enable_prompt_scaling;
    cfg["budget_mode"] = to_string(row.config.budget_mode);
    rj["config"] = std::move(cfg);
    rj["budget_per_run"] = row.budget_per_run;
    Json cats;
    for (const auto& [name, rate] : row.per_category)
      cats[name] = jnum(q6(rate));
    rj["per_category"] = std::move(cats);
    rj["overall"] = jnum(q6(row.overall));
    Json cells = Json::array();
    for (const CellResult& cell : row.cells) {
      Json cj;
      cj["prompt_id"] = cell.prompt_id;
      cj["category"] = to_string(cell.category);
      cj["image_index"] = cell.image_index;
      cj["pass"] = cell.pass;
      cj["rule_score"] = jnum(q6(cell.rule_score));
      cj["run_failed"] = cell.run_failed;
      cells.push_back(std::move(cj));
    }
    rj["cells"] = std::move(cells);
    rows.push_back(std::move(rj));
  }
  j["rows"] = std::move(rows);
  return j;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

void write_atomically(const std::string& path, const std::string& payload) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write: " + tmp);
    out << payload;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError("write failed: " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move " + tmp + " into place");
  }
}

std::string format_rate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::vector<std::string> emit_reports(const Report& report,
                                      std::span<const std::string> formats,
                                      const std::string& out_dir,
                                      const std::string& basename) {
  std::vector<std::string> written;
  for (const std::string& format : formats) {
    if (format == "csv") {
      // Column order: label,width,depth,budget,category,pass_rate,overall.
      std::ostringstream csv;
      csv << "label,width,depth,budget,category,pass_rate,overall\n";
      for (const ConfigRow& row : report.rows)
        for (const auto& [category, rate] : row.per_category)
          csv << csv_escape(row.label) << "," << row.config.width << ","
              << row.config.depth << "," << row.budget_per_run << ","
              << category << "," << format_rate(rate) << ","
              << format_rate(row.overall) << "\n";
      const std::string path = out_dir + "/" + basename + ".csv";
      write_atomically(path, csv.str());
      written.push_back(path);
    } else if (format == "json") {
      const std::string path = out_dir + "/" + basename + ".json";
      write_atomically(path, report_to_json(report).dump(2) + "\n");
      written.push_back(path);
    } else if (format == "plotdata") {
      // Score-vs-budget series, one row per config label.
      std::ostringstream plot;
      plot << "series,budget,overall\n";
      for (const ConfigRow& row : report.rows)
        plot << csv_escape(row.label) << "," << row.budget_per_run << ","
             << format_rate(row.overall) << "\n";
      const std::string path = out_dir + "/" + basename + "_plotdata.csv";
      write_atomically(path, plot.str());
      written.push_back(path);
    } else {
      throw InvalidInputError("unknown report format: " + format);
    }
  }
  return written;
}

}  // namespace rflow
