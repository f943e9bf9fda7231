// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0
//
// Regenerates the deterministic data assets committed under assets/ and the
// wire-protocol golden fixtures under tests/fixtures/. Run from the repo
// root:
//   build/tools/make_assets [repo_root]

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rflow/curation.hpp"
#include "rflow/evalbench.hpp"
#include "rflow/sim_backend.hpp"
#include "rflow/wire.hpp"

using namespace rflow;

namespace {

constexpr std::uint64_t kCorpusSeed = 20260801;
constexpr std::uint64_t kSuiteSeed = 20260802;
constexpr std::uint64_t kEditSeed = 20260803;

void write_file(const std::string& path, const std::string& payload) {
  std::filesystem::create_directories(
      std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << payload;
  std::cout << "wrote " << path << "\n";
}

void write_corpus(const std::string& root, const Vocabulary& vocab) {
  const auto prompts = make_random_prompts(100, kCorpusSeed, vocab);
  std::string body;
  for (const auto& p : prompts) body += prompt_to_json(p).dump() + "\n";
  write_file(root + "/assets/corpora/default_corpus.jsonl", body);
}

void write_suite(const std::string& root, const Vocabulary& vocab) {
  const BenchmarkSuite suite = make_default_suite(kSuiteSeed, vocab);
  write_file(root + "/assets/suites/default_suite.json",
             suite_to_json(suite).dump(2) + "\n");
}

// 50 synthetic editing records: a corrupted source scene, the repaired
// edited scene, the repair instruction, and the caption of the edited scene.
void write_edit_fixture(const std::string& root, const Vocabulary& vocab) {
  SimConfig flawed_cfg;
  flawed_cfg.error_model = ErrorModel::perfect();
  flawed_cfg.error_model.eps_attr = 0.75;
  flawed_cfg.vocab = vocab;
  SimGenerator flawed_gen(flawed_cfg);

  SimConfig fix_cfg;
  fix_cfg.error_model = ErrorModel::perfect();  // p_fix = 1, p_regress = 0
  fix_cfg.vocab = vocab;
  SimCorrector corrector(fix_cfg);
  SimReflector reflector(fix_cfg);

  const auto prompts = make_random_prompts(80, kEditSeed, vocab);
  std::string body;
  int emitted = 0;
  Rng rng(kEditSeed);
  for (const auto& prompt : prompts) {
    if (emitted >= 50) break;
    const std::string text = render_prompt_text(prompt, true);
    const SceneGraph source = flawed_gen.generate(text, prompt, rng.next_u64());
    if (verify_rule(prompt, source, vocab).pass) continue;
    const Reflection refl =
        reflector.reflect(prompt, source, oracle_report(prompt, source, vocab));
    SceneGraph edited =
        corrector.correct(text, text, refl, source, rng.next_u64());
    if (!verify_rule(prompt, edited, vocab).pass) continue;
    edited.quality = q6(std::min(1.0, source.quality + 0.2));

    Json record;
    record["source_scene"] = scene_to_json(source);
    record["edited_scene"] = scene_to_json(edited);
    record["instruction"] = refl.text;
    record["edited_caption"] = text;
    record["structured_prompt"] = prompt_to_json(prompt);
    body += record.dump() + "\n";
    ++emitted;
  }
  if (emitted < 50)
    throw InternalError("edit fixture generation produced only " +
                        std::to_string(emitted) + " records");
  write_file(root + "/assets/fixtures/edit_records.jsonl", body);
}

void write_wire_fixtures(const std::string& root, const Vocabulary& vocab) {
  SimConfig cfg;
  cfg.error_model = ErrorModel::defaults();
  cfg.vocab = vocab;
  SimGenerator gen(cfg);

  const auto prompts = make_random_prompts(6, 7, vocab);
  const StructuredPrompt single = prompts[0];  // categories cycle from 0
  const StructuredPrompt position = prompts[4];
  const std::string text = render_prompt_text(position, false);
  const SceneGraph scene = gen.generate(text, position, 11);
  const VerifierReport report = oracle_report(position, scene, vocab);
  const Reflection reflection = [&] {
    SimReflector r(cfg);
    return r.reflect(position, scene, report);
  }();

  const std::string dir = root + "/tests/fixtures/wire/";

  wire::GenerateRequest greq;
  greq.prompt_text = text;
  greq.structured_prompt = position;
  greq.seed = 11;
  greq.params = Json::object({{"steps", 30}, {"guidance", 3.5}});
  write_file(dir + "generate_request.json", wire::encode_generate_request(greq));

  wire::CorrectRequest creq;
  creq.original_prompt = text;
  creq.refined_prompt = render_prompt_text(position, true);
  creq.reflection = reflection;
  creq.flawed_scene = scene;
  creq.seed = 12;
  write_file(dir + "correct_request.json", wire::encode_correct_request(creq));

  wire::ReflectRequest rreq;
  rreq.prompt_text = text;
  rreq.structured_prompt = position;
  rreq.scene = scene;
  rreq.report = report;
  write_file(dir + "reflect_request.json", wire::encode_reflect_request(rreq));

  wire::VerifyRequest vreq;
  vreq.prompt_text = render_prompt_text(single, false);
  vreq.structured_prompt = single;
  vreq.scene = gen.generate(vreq.prompt_text, single, 13);
  vreq.template_text = "<verifier template for single_object>";
  write_file(dir + "verify_request.json", wire::encode_verify_request(vreq));

  wire::RefinePromptRequest preq;
  preq.original_prompt = text;
  preq.current_prompt = text;
  preq.structured_prompt = position;
  preq.scenes = {scene};
  preq.reports = {report};
  preq.reflection = reflection;
  preq.template_text = "<refine template>";
  write_file(dir + "refine_prompt_request.json",
             wire::encode_refine_prompt_request(preq));

  // Golden verifier response carrying the single-object aspect key set.
  write_file(dir + "verify_response_single_object.json",
             R"({"object_completeness":8,"detectability":9,"occlusion_handling":10,"overall_score":9})");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string root = argc > 1 ? argv[1] : ".";
  try {
    const Vocabulary vocab = Vocabulary::defaults();
    write_corpus(root, vocab);
    write_suite(root, vocab);
    write_edit_fixture(root, vocab);
    write_wire_fixtures(root, vocab);
  } catch (const std::exception& e) {
    std::cerr << "make_assets failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
