// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rflow/sim_backend.hpp"
#include "testutil.hpp"

using namespace rflow;

namespace {

const Vocabulary& vocab() {
  static const Vocabulary v = Vocabulary::defaults();
  return v;
}

SimConfig perfect_cfg() {
  SimConfig cfg;
  cfg.error_model = ErrorModel::perfect();
  cfg.vocab = vocab();
  return cfg;
}

StructuredPrompt colors_prompt(const std::string& cls,
                               const std::string& color) {
  StructuredPrompt p;
  p.id = "b-colors-" + cls;
  p.category = Category::colors;
  p.objects = {ObjectSpec{cls, color, 1, std::nullopt}};
  return p;
}

}  // namespace

TEST_CASE("generator: zero corruption realizes the prompt exactly") {
  SimGenerator gen(perfect_cfg());
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const StructuredPrompt p = testutil::random_prompt(rng, vocab());
    const SceneGraph scene =
        gen.generate(render_prompt_text(p, true), p, rng.next_u64());
    CHECK(verify_rule(p, scene, vocab()).score == 1.0);
  }
}

TEST_CASE("generator: deterministic in (prompt, seed)") {
  SimConfig cfg = perfect_cfg();
  cfg.error_model = ErrorModel::defaults();
  SimGenerator gen(cfg);
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const StructuredPrompt p = testutil::random_prompt(rng, vocab());
    const std::uint64_t seed = rng.next_u64();
    const std::string text = render_prompt_text(p, false);
    CHECK(content_hash(gen.generate(text, p, seed)) ==
          content_hash(gen.generate(text, p, seed)));
  }
}

TEST_CASE("generator: pass rate matches the corruption binomial") {
  // colors prompt: presence + color = exactly 2 corruptible attributes.
  SimConfig cfg = perfect_cfg();
  cfg.error_model.eps_attr = 0.5;
  cfg.error_model.specificity_gain = 0.0;
  SimGenerator gen(cfg);
  const StructuredPrompt p = colors_prompt("cube", "red");
  const std::string text = render_prompt_text(p, true);

  int passes = 0;
  constexpr int kTrials = 10'000;
  for (int i = 0; i < kTrials; ++i)
    if (verify_rule(p, gen.generate(text, p, static_cast<std::uint64_t>(i)),
                    vocab())
            .pass)
      ++passes;
  const double rate = static_cast<double>(passes) / kTrials;
  CHECK(rate == doctest::Approx(0.25).epsilon(0.08));  // 0.25 +/- 0.02
  CHECK(std::abs(rate - 0.25) < 0.02);
}

TEST_CASE("corrector: perfect fix repairs an oracle-reflected scene") {
  SimConfig noisy = perfect_cfg();
  noisy.error_model.eps_attr = 0.6;
  SimGenerator gen(noisy);
  SimConfig fix = perfect_cfg();  // p_fix=1, p_regress=0
  SimCorrector corrector(fix);
  SimReflector reflector(fix);

  Rng rng(11);
  int flawed_seen = 0;
  for (int i = 0; i < 1'000; ++i) {
    const StructuredPrompt p = testutil::random_prompt(rng, vocab());
    const std::string text = render_prompt_text(p, false);
    const SceneGraph scene = gen.generate(text, p, rng.next_u64());
    if (verify_rule(p, scene, vocab()).pass) continue;
    ++flawed_seen;
    const Reflection refl =
        reflector.reflect(p, scene, oracle_report(p, scene, vocab()));
    const SceneGraph fixed =
        corrector.correct(text, text, refl, scene, rng.next_u64());
    CHECK(verify_rule(p, fixed, vocab()).pass);
  }
  CHECK(flawed_seen > 300);
}

TEST_CASE("corrector: empty reflection with p_regress=0 is a no-op") {
  SimCorrector corrector(perfect_cfg());
  Rng rng(13);
  const SceneGraph scene = testutil::random_scene(rng, vocab());
  Reflection none;
  none.text = kNoChangesText;
  none.structured = std::vector<ErrorFact>{};
  const SceneGraph out = corrector.correct("p", "p", none, scene, 99);
  SceneGraph expected = scene;
  canonicalize(expected);
  expected.seed_provenance = out.seed_provenance;
  CHECK(canonical_serialize(out) == canonical_serialize(expected));
}

TEST_CASE("corrector: unparsable reflection text falls back to no-op") {
  SimCorrector corrector(perfect_cfg());
  Rng rng(15);
  const SceneGraph scene = testutil::random_scene(rng, vocab());
  Reflection garbled;
  garbled.text = "Make everything more cinematic and moody.";
  const SceneGraph out = corrector.correct("p", "p", garbled, scene, 1);
  SceneGraph expected = scene;
  canonicalize(expected);
  expected.seed_provenance = out.seed_provenance;
  CHECK(canonical_serialize(out) == canonical_serialize(expected));
}

TEST_CASE("corrector: single error fixed at the configured rate") {
  SimConfig cfg = perfect_cfg();
  cfg.error_model.p_fix = 0.5;
  SimCorrector corrector(cfg);

  // One wrong-color error on an otherwise exact scene.
  const StructuredPrompt p = colors_prompt("cube", "red");
  SceneGraph flawed;
  SceneObject o;
  o.cls = "cube";
  o.color = "blue";
  o.bbox = {0.3, 0.3, 0.5, 0.5};
  flawed.objects = {o};

  Reflection refl;
  refl.structured = verify_rule(p, flawed, vocab()).errors;
  refl.text = render_instructions(*refl.structured);

  int fixed = 0;
  constexpr int kTrials = 10'000;
  for (int i = 0; i < kTrials; ++i) {
    const SceneGraph out = corrector.correct(
        "p", "p", refl, flawed, static_cast<std::uint64_t>(i));
    if (verify_rule(p, out, vocab()).pass) ++fixed;
  }
  const double rate = static_cast<double>(fixed) / kTrials;
  CHECK(std::abs(rate - 0.5) < 0.02);
}

TEST_CASE("oracle closure: one perfect correction repairs any flawed scene") {
  SimConfig gen_cfg = perfect_cfg();
  gen_cfg.error_model.eps_attr = 0.5;
  gen_cfg.error_model.specificity_gain = 0.4;
  SimGenerator gen(gen_cfg);
  SimConfig oracle = perfect_cfg();
  SimReflector reflector(oracle);
  SimCorrector corrector(oracle);
  SimVerifier verifier(oracle);

  Rng rng(21);
  for (int i = 0; i < 1'000; ++i) {
    const StructuredPrompt p = testutil::random_prompt(rng, vocab());
    const std::string text = render_prompt_text(p, false);
    const SceneGraph scene = gen.generate(text, p, rng.next_u64());
    const VerifierReport report = verifier.verify(p, scene);
    const Reflection refl = reflector.reflect(p, scene, report);
    const SceneGraph fixed =
        corrector.correct(text, text, refl, scene, rng.next_u64());
    REQUIRE(verify_rule(p, fixed, vocab()).pass);
  }
}

TEST_CASE("reflector: oracle reflection lists verify_rule errors exactly") {
  SimConfig gen_cfg = perfect_cfg();
  gen_cfg.error_model.eps_attr = 0.5;
  SimGenerator gen(gen_cfg);
  SimReflector reflector(perfect_cfg());

  Rng rng(23);
  for (int i = 0; i < 500; ++i) {
    const StructuredPrompt p = testutil::random_prompt(rng, vocab());
    const SceneGraph scene =
        gen.generate(render_prompt_text(p, false), p, rng.next_u64());
    const RuleVerdict v = verify_rule(p, scene, vocab());
    const Reflection refl =
        reflector.reflect(p, scene, oracle_report(p, scene, vocab()));
    REQUIRE(refl.structured.has_value());
    CHECK(*refl.structured == v.errors);
    if (v.errors.empty()) CHECK(refl.text == kNoChangesText);
  }
}

TEST_CASE("reflector: wrong color renders the pinned Replace sentence") {
  const StructuredPrompt p = colors_prompt("spoon", "red");
  SceneGraph scene;
  SceneObject o;
  o.cls = "spoon";
  o.color = "blue";
  o.bbox = {0.4, 0.4, 0.6, 0.6};
  scene.objects = {o};
  SimReflector reflector(perfect_cfg());
  const Reflection refl =
      reflector.reflect(p, scene, oracle_report(p, scene, vocab()));
  CHECK(refl.text == "Replace the blue spoon's color with red.");
}

TEST_CASE("verifier: oracle maps the rule score to overall 10*s") {
  SimVerifier verifier(perfect_cfg());

  // Passing scene -> 10.0.
  const StructuredPrompt p = colors_prompt("cube", "red");
  SceneGraph pass_scene;
  SceneObject o;
  o.cls = "cube";
  o.color = "red";
  o.bbox = {0.3, 0.3, 0.5, 0.5};
  pass_scene.objects = {o};
  CHECK(verifier.verify(p, pass_scene).overall_score == doctest::Approx(10.0));

  // The 0.75-rubric example maps to 7.5.
  StructuredPrompt two;
  two.id = "b-two";
  two.category = Category::two_objects;
  two.objects = {ObjectSpec{"blanket", "white", 1, std::nullopt},
                 ObjectSpec{"spoon", "red", 1, std::nullopt}};
  SceneGraph scene;
  SceneObject blanket;
  blanket.cls = "blanket";
  blanket.color = "white";
  blanket.bbox = {0.1, 0.1, 0.3, 0.3};
  SceneObject spoon;
  spoon.cls = "spoon";
  spoon.color = "blue";
  spoon.bbox = {0.6, 0.6, 0.8, 0.8};
  spoon.z = 1;
  scene.objects = {blanket, spoon};
  const VerifierReport report = verifier.verify(two, scene);
  CHECK(report.overall_score == doctest::Approx(7.5));
  validate_report(report, Category::two_objects);
}

TEST_CASE("verifier: aspect keys match the category schema") {
  SimConfig cfg = perfect_cfg();
  cfg.error_model = ErrorModel::defaults();
  SimVerifier verifier(cfg);
  SimGenerator gen(cfg);
  Rng rng(29);
  for (int i = 0; i < 200; ++i) {
    const StructuredPrompt p = testutil::random_prompt(rng, vocab());
    const SceneGraph scene =
        gen.generate(render_prompt_text(p, false), p, rng.next_u64());
    const VerifierReport report = verifier.verify(p, scene);
    validate_report(report, p.category);  // throws on mismatch
    for (const std::string& key : aspect_keys(p.category))
      CHECK(report.aspect_scores.count(key) == 1);
  }
}

TEST_CASE("verifier: noise stays in bounds and matches sigma") {
  SimConfig oracle = perfect_cfg();
  SimConfig noisy = perfect_cfg();
  noisy.error_model.verifier_noise = 0.5;
  SimVerifier oracle_verifier(oracle);
  SimVerifier noisy_verifier(noisy);

  // Mid-range oracle scores keep clamping inactive: a half-failed rubric.
  StructuredPrompt two;
  two.id = "b-noise";
  two.category = Category::two_objects;
  two.objects = {ObjectSpec{"cube", "red", 1, std::nullopt},
                 ObjectSpec{"ball", "blue", 1, std::nullopt}};

  Rng rng(31);
  double sum = 0.0, sum_sq = 0.0;
  constexpr int kDraws = 10'000;
  for (int i = 0; i < kDraws; ++i) {
    SceneGraph scene;
    SceneObject cube;
    cube.cls = "cube";
    cube.color = "green";  // wrong color: score 0.5, overall 5.0
    const double cx = q6(rng.uniform(0.2, 0.4));
    cube.bbox = {cx - 0.1, 0.3, cx + 0.1, 0.5};
    SceneObject ball;
    ball.cls = "ball";
    ball.color = "blue";
    ball.bbox = {0.6, 0.3, 0.8, 0.5};
    ball.z = 1;
    scene.objects = {cube, ball};
    scene.quality = 0.8;

    const double oracle_score = oracle_verifier.verify(two, scene).overall_score;
    const double noisy_score = noisy_verifier.verify(two, scene).overall_score;
    CHECK(noisy_score >= 0.0);
    CHECK(noisy_score <= 10.0);
    const double delta = noisy_score - oracle_score;
    sum += delta;
    sum_sq += delta * delta;
  }
  const double mean = sum / kDraws;
  const double stddev = std::sqrt(sum_sq / kDraws - mean * mean);
  CHECK(std::abs(stddev - 0.5) < 0.05);  // within 10% of sigma
}

TEST_CASE("verifier: repeated calls are deterministic even with noise") {
  SimConfig noisy = perfect_cfg();
  noisy.error_model.verifier_noise = 1.0;
  SimVerifier verifier(noisy);
  Rng rng(37);
  const StructuredPrompt p = testutil::random_prompt(rng, vocab());
  const SceneGraph scene = testutil::random_scene(rng, vocab());
  const VerifierReport a = verifier.verify(p, scene);
  const VerifierReport b = verifier.verify(p, scene);
  CHECK(a.overall_score == b.overall_score);
  CHECK(a.aspect_scores == b.aspect_scores);
}

TEST_CASE("refiner: raises specificity and re-reveals dropped attributes") {
  SimConfig cfg = perfect_cfg();
  cfg.refine_delta = 0.5;
  SimPromptRefiner refiner(cfg);

  StructuredPrompt p;
  p.id = "b-refine";
  p.category = Category::colors;
  p.objects = {ObjectSpec{"cube", "red", 1, std::nullopt}};
  p.specificity = 0.0;

  RefineContext ctx;
  ctx.original_prompt = render_prompt_text(p, false);
  ctx.current_prompt = ctx.original_prompt;
  ctx.structured = p;
  ctx.scenes = {SceneGraph{}};
  ctx.reports = {oracle_report(p, SceneGraph{}, vocab())};
  ctx.reflection = Reflection{kNoChangesText, {}};

  CHECK(ctx.current_prompt == "a photo of a cube");
  const RefineResult once = refiner.refine(ctx);
  CHECK(once.text == "a photo of a red cube");  // color threshold 0.5 reached
  REQUIRE(once.structured.has_value());
  CHECK(once.structured->specificity == doctest::Approx(0.5));

  // Second refinement reaches the ceiling exactly.
  ctx.structured = once.structured;
  ctx.current_prompt = once.text;
  const RefineResult twice = refiner.refine(ctx);
  REQUIRE(twice.structured.has_value());
  CHECK(twice.structured->specificity == doctest::Approx(1.0));

  // Idempotent at the ceiling.
  ctx.structured = twice.structured;
  ctx.current_prompt = twice.text;
  const RefineResult thrice = refiner.refine(ctx);
  CHECK(thrice.text == twice.text);
}

TEST_CASE("error model: effective eps scales with missing specificity") {
  ErrorModel m;
  m.eps_attr = 0.4;
  m.specificity_gain = 0.5;
  CHECK(m.effective_eps(1.0) == doctest::Approx(0.4));
  CHECK(m.effective_eps(0.0) == doctest::Approx(0.6));
  m.eps_attr = 0.9;
  m.specificity_gain = 2.0;
  CHECK(m.effective_eps(0.0) == 1.0);  // clamped
}
