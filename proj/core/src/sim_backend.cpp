// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/sim_backend.hpp"

#include <algorithm>
#include <cmath>

#include "rflow/errors.hpp"
#include "rflow/log.hpp"
#include "rflow/rng.hpp"

namespace rflow {

namespace {

// Stream salts; changing one reshuffles that backend's randomness without
// touching the others.
constexpr std::uint64_t kGenerateStream = 0x67656e6572617465ULL;
constexpr std::uint64_t kCorrectStream = 0x636f727265637421ULL;
constexpr std::uint64_t kReflectStream = 0x7265666c65637421ULL;
constexpr std::uint64_t kVerifyStream = 0x7665726966792121ULL;

constexpr double kHalfSize = 0.1;  // object half extent in scene units

std::array<double, 4> bbox_at(double cx, double cy) {
  cx = std::clamp(cx, kHalfSize, 1.0 - kHalfSize);
  cy = std::clamp(cy, kHalfSize, 1.0 - kHalfSize);
  return {cx - kHalfSize, cy - kHalfSize, cx + kHalfSize, cy + kHalfSize};
}

// Deterministic 3x3 grid slot with a small jitter that cannot flip any
// relation the layout establishes.
std::array<double, 4> grid_bbox(int slot, Rng& rng) {
  const int s = slot % 9;
  const double cx = 0.17 + 0.33 * (s % 3) + rng.uniform(-0.03, 0.03);
  const double cy = 0.17 + 0.33 * (s / 3) + rng.uniform(-0.03, 0.03);
  return bbox_at(cx, cy);
}

std::string pick_color(const Vocabulary& vocab, Rng& rng) {
  return vocab.colors[rng.next_below(vocab.colors.size())];
}

int max_z(const SceneGraph& scene) {
  int z = -1;
  for (const SceneObject& o : scene.objects) z = std::max(z, o.z);
  return z;
}

// The corruptible attributes of a prompt are exactly its rubric units, in
// spec order: presence, color, count, relation per object spec.
enum class FactKind { presence, color, count, relation };
struct Fact {
  FactKind kind;
  int spec_index;
};

std::vector<Fact> corruptible_facts(const StructuredPrompt& prompt,
                                    const Vocabulary& vocab) {
  std::vector<Fact> facts;
  for (std::size_t i = 0; i < prompt.objects.size(); ++i) {
    const ObjectSpec& s = prompt.objects[i];
    const int idx = static_cast<int>(i);
    facts.push_back({FactKind::presence, idx});
    if (s.color && vocab.has_color(*s.color))
      facts.push_back({FactKind::color, idx});
    if (prompt.category == Category::counting)
      facts.push_back({FactKind::count, idx});
    if (s.relation) facts.push_back({FactKind::relation, idx});
  }
  return facts;
}

void erase_class(SceneGraph& scene, const std::string& cls) {
  std::erase_if(scene.objects,
                [&](const SceneObject& o) { return o.cls == cls; });
}

std::vector<std::size_t> indices_of(const SceneGraph& scene,
                                    const std::string& cls) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scene.objects.size(); ++i)
    if (scene.objects[i].cls == cls) out.push_back(i);
  return out;
}

}  // namespace

SceneGraph SimGenerator::generate(const std::string& /*prompt_text*/,
                                  const StructuredPrompt& prompt,
                                  std::uint64_t seed) {
  validate_prompt(prompt, cfg_.vocab);
  Rng rng(derive_seed(seed, {kGenerateStream, cfg_.model_seed}));

  // Exact realization.
  SceneGraph scene;
  int slot = 0;
  for (std::size_t i = 0; i < prompt.objects.size(); ++i) {
    const ObjectSpec& spec = prompt.objects[i];
    const std::string color = (spec.color && cfg_.vocab.has_color(*spec.color))
                                  ? *spec.color
                                  : pick_color(cfg_.vocab, rng);
    for (int k = 0; k < spec.count; ++k) {
      SceneObject o;
      o.cls = spec.cls;
      o.color = color;
      o.z = slot;
      if (prompt.category == Category::position) {
        // Subject and reference sit on opposite sides of the constrained
        // axis so the declared relation holds with margin.
        const bool is_subject = prompt.objects[i].relation.has_value();
        const Relation rel = is_subject
                                 ? prompt.objects[i].relation->relation
                                 : prompt.objects[1 - i].relation->relation;
        double cx = 0.5, cy = 0.5;
        const double lo = 0.3, hi = 0.7;
        const bool subject_low =
            rel == Relation::left_of || rel == Relation::above;
        const double coord = (is_subject == subject_low) ? lo : hi;
        if (rel == Relation::left_of || rel == Relation::right_of)
          cx = coord;
        else
          cy = coord;
        o.bbox = bbox_at(cx + rng.uniform(-0.03, 0.03),
                         cy + rng.uniform(-0.03, 0.03));
      } else {
        o.bbox = grid_bbox(slot, rng);
      }
      ++slot;
      scene.objects.push_back(std::move(o));
    }
  }
  scene.quality = rng.uniform(0.55, 0.95);

  // Independent corruption of each rubric attribute.
  const double eps = cfg_.error_model.effective_eps(prompt.specificity);
  for (const Fact& fact : corruptible_facts(prompt, cfg_.vocab)) {
    if (!rng.bernoulli(eps)) continue;
    const ObjectSpec& spec = prompt.objects[fact.spec_index];
    switch (fact.kind) {
      case FactKind::presence:
        erase_class(scene, spec.cls);
        break;
      case FactKind::color: {
        const std::string wrong =
            cfg_.vocab.different_color(*spec.color, rng.next_u64());
        for (SceneObject& o : scene.objects)
          if (o.cls == spec.cls) o.color = wrong;
        break;
      }
      case FactKind::count: {
        // Shift to a definitely-wrong count in [1, count+2].
        std::vector<int> options;
        for (const int delta : {-2, -1, 1, 2}) {
          const int m = spec.count + delta;
          if (m >= 1 && m != spec.count) options.push_back(m);
        }
        const int target =
            options[rng.next_below(options.size())];
        auto idx = indices_of(scene, spec.cls);
        while (static_cast<int>(idx.size()) > target && !idx.empty()) {
          scene.objects.erase(scene.objects.begin() +
                              static_cast<std::ptrdiff_t>(idx.back()));
          idx = indices_of(scene, spec.cls);
        }
        while (static_cast<int>(idx.size()) < target) {
          SceneObject extra;
          if (!idx.empty()) {
            extra = scene.objects[idx.front()];
          } else {
            // Presence corruption may have emptied the class already.
            extra.cls = spec.cls;
            extra.color = (spec.color && cfg_.vocab.has_color(*spec.color))
                              ? *spec.color
                              : pick_color(cfg_.vocab, rng);
          }
          extra.bbox = grid_bbox(slot++, rng);
          extra.z = max_z(scene) + 1;
          scene.objects.push_back(std::move(extra));
          idx = indices_of(scene, spec.cls);
        }
        break;
      }
      case FactKind::relation: {
        // Park every subject object on the wrong side of the reference.
        const ObjectSpec& other = prompt.objects[spec.relation->other_index];
        const auto refs = indices_of(scene, other.cls);
        if (refs.empty()) break;
        const auto ref_center = bbox_center(scene.objects[refs[0]].bbox);
        for (const std::size_t si : indices_of(scene, spec.cls)) {
          auto center = bbox_center(scene.objects[si].bbox);
          switch (spec.relation->relation) {
            case Relation::left_of: center[0] = ref_center[0] + 0.25; break;
            case Relation::right_of: center[0] = ref_center[0] - 0.25; break;
            case Relation::above: center[1] = ref_center[1] + 0.25; break;
            case Relation::below: center[1] = ref_center[1] - 0.25; break;
          }
          scene.objects[si].bbox = bbox_at(center[0], center[1]);
        }
        break;
      }
    }
  }

  scene.seed_provenance = {seed, -1, -1, "generator"};
  canonicalize(scene);
  validate_scene(scene);
  return scene;
}

namespace {

void apply_fix(SceneGraph& scene, const ErrorFact& fact,
               const Vocabulary& vocab, Rng& rng) {
  if (!vocab.has_class(fact.subject)) return;
  switch (fact.kind) {
    case ErrorKind::missing_object: {
      SceneObject o;
      o.cls = fact.subject;
      o.color = pick_color(vocab, rng);
      o.z = max_z(scene) + 1;
      o.bbox = grid_bbox(static_cast<int>(scene.objects.size()), rng);
      scene.objects.push_back(std::move(o));
      break;
    }
    case ErrorKind::extra_object:
      erase_class(scene, fact.subject);
      break;
    case ErrorKind::wrong_color:
      if (!vocab.has_color(fact.expected)) return;
      for (SceneObject& o : scene.objects)
        if (o.cls == fact.subject) o.color = fact.expected;
      break;
    case ErrorKind::wrong_count: {
      int target = 0;
      for (const char c : fact.expected) {
        if (c < '0' || c > '9') return;
        target = target * 10 + (c - '0');
      }
      if (target < 1) return;
      auto idx = indices_of(scene, fact.subject);
      while (static_cast<int>(idx.size()) > target && !idx.empty()) {
        scene.objects.erase(scene.objects.begin() +
                            static_cast<std::ptrdiff_t>(idx.back()));
        idx = indices_of(scene, fact.subject);
      }
      while (static_cast<int>(idx.size()) < target) {
        SceneObject o;
        if (!idx.empty()) {
          o = scene.objects[idx.front()];
        } else {
          o.cls = fact.subject;
          o.color = pick_color(vocab, rng);
        }
        o.z = max_z(scene) + 1;
        o.bbox = grid_bbox(static_cast<int>(scene.objects.size()), rng);
        scene.objects.push_back(std::move(o));
        idx = indices_of(scene, fact.subject);
      }
      break;
    }
    case ErrorKind::wrong_position: {
      const auto space = fact.expected.find(' ');
      if (space == std::string::npos) return;
      Relation rel;
      try {
        rel = relation_from_string(fact.expected.substr(0, space));
      } catch (const InvalidInputError&) {
        return;
      }
      const std::string other = fact.expected.substr(space + 1);
      const auto refs = indices_of(scene, other);
      if (refs.empty()) return;
      const auto ref_center = bbox_center(scene.objects[refs[0]].bbox);
      for (const std::size_t si : indices_of(scene, fact.subject)) {
        auto center = bbox_center(scene.objects[si].bbox);
        switch (rel) {
          case Relation::left_of: center[0] = ref_center[0] - 0.25; break;
          case Relation::right_of: center[0] = ref_center[0] + 0.25; break;
          case Relation::above: center[1] = ref_center[1] - 0.25; break;
          case Relation::below: center[1] = ref_center[1] + 0.25; break;
        }
        scene.objects[si].bbox = bbox_at(center[0], center[1]);
      }
      break;
    }
  }
}

void corrupt_random_attribute(SceneGraph& scene, const Vocabulary& vocab,
                              Rng& rng) {
  if (scene.objects.empty()) return;
  const std::size_t i = rng.next_below(scene.objects.size());
  switch (rng.next_below(3)) {
    case 0:
      scene.objects[i].color =
          vocab.different_color(scene.objects[i].color, rng.next_u64());
      break;
    case 1:
      scene.objects.erase(scene.objects.begin() +
                          static_cast<std::ptrdiff_t>(i));
      break;
    default:
      scene.objects[i].bbox =
          bbox_at(rng.uniform(kHalfSize, 1.0 - kHalfSize),
                  rng.uniform(kHalfSize, 1.0 - kHalfSize));
      break;
  }
}

}  // namespace

SceneGraph SimCorrector::correct(const std::string& /*original_prompt*/,
                                 const std::string& /*refined_prompt*/,
                                 const Reflection& reflection,
                                 const SceneGraph& flawed,
                                 std::uint64_t seed) {
  validate_scene(flawed);
  Rng rng(derive_seed(seed, {kCorrectStream, cfg_.model_seed}));

  std::vector<ErrorFact> facts;
  if (reflection.structured) {
    facts = *reflection.structured;
  } else {
    auto parsed = parse_instructions(reflection.text, cfg_.vocab);
    if (!parsed) {
      log::warn("corrector: reflection text outside the instruction grammar; "
                "applying no-op correction: \"" +
                reflection.text + "\"");
    } else {
      facts = std::move(*parsed);
    }
  }

  SceneGraph scene = flawed;
  canonicalize(scene);  // fix object indexing before seeded edits

  // Relation fixes run after everything else so repositions see objects that
  // other fixes (re)introduce.
  std::stable_partition(facts.begin(), facts.end(), [](const ErrorFact& f) {
    return f.kind != ErrorKind::wrong_position;
  });
  for (const ErrorFact& fact : facts)
    if (rng.bernoulli(cfg_.error_model.p_fix))
      apply_fix(scene, fact, cfg_.vocab, rng);

  if (rng.bernoulli(cfg_.error_model.p_regress))
    corrupt_random_attribute(scene, cfg_.vocab, rng);

  scene.seed_provenance = {seed, -1, -1, "corrector"};
  canonicalize(scene);
  validate_scene(scene);
  return scene;
}

Reflection SimReflector::reflect(const StructuredPrompt& prompt,
                                 const SceneGraph& scene,
                                 const VerifierReport& /*report*/) {
  const RuleVerdict verdict = verify_rule(prompt, scene, cfg_.vocab);
  std::vector<ErrorFact> facts = verdict.errors;

  const ErrorModel& em = cfg_.error_model;
  if (em.reflector_recall < 1.0 || em.reflector_hallucination > 0.0) {
    Rng rng(derive_seed(cfg_.model_seed,
                        {kReflectStream, fnv1a64(prompt.id),
                         content_hash(scene).value}));
    std::vector<ErrorFact> kept;
    for (ErrorFact& f : facts)
      if (rng.bernoulli(em.reflector_recall)) kept.push_back(std::move(f));
    if (rng.bernoulli(em.reflector_hallucination) && !scene.objects.empty()) {
      SceneGraph canon = scene;
      canonicalize(canon);
      const SceneObject& o =
          canon.objects[rng.next_below(canon.objects.size())];
      kept.push_back({ErrorKind::wrong_color, o.cls,
                      cfg_.vocab.different_color(o.color, rng.next_u64()),
                      o.color});
    }
    facts = std::move(kept);
  }

  Reflection r;
  r.text = render_instructions(facts);
  r.structured = std::move(facts);
  return r;
}

VerifierReport oracle_report(const StructuredPrompt& prompt,
                             const SceneGraph& scene,
                             const Vocabulary& vocab) {
  const RuleVerdict verdict = verify_rule(prompt, scene, vocab);
  const RubricBreakdown bd = rubric_breakdown(prompt, scene, verdict, vocab);
  const double q = scene.quality;

  const auto fill = [&](double a, double b, double c) {
    VerifierReport r;
    const std::vector<std::string>& keys = aspect_keys(prompt.category);
    r.aspect_scores[keys[0]] = q6(10.0 * a);
    r.aspect_scores[keys[1]] = q6(10.0 * b);
    r.aspect_scores[keys[2]] = q6(10.0 * c);
    return r;
  };

  VerifierReport report;
  switch (prompt.category) {
    case Category::single_object:
      report = fill(bd.presence_subscore(), q, verdict.score);
      break;
    case Category::two_objects:
      report = fill(q, bd.presence_subscore(), verdict.score);
      break;
    case Category::counting:
      report = fill(bd.count_subscore(), bd.color_subscore(), q);
      break;
    case Category::colors:
      report = fill(bd.color_subscore(), q, bd.presence_subscore());
      break;
    case Category::position:
      report = fill(bd.relation_subscore(), q, bd.presence_subscore());
      break;
    case Category::color_attribution:
      report = fill(bd.color_subscore(), q, bd.presence_subscore());
      break;
  }
  report.overall_score = q6(10.0 * verdict.score);
  report.rationale = render_instructions(verdict.errors);
  validate_report(report, prompt.category);
  return report;
}

VerifierReport SimVerifier::verify(const StructuredPrompt& prompt,
                                   const SceneGraph& scene) {
  VerifierReport report = oracle_report(prompt, scene, cfg_.vocab);
  const double sigma = cfg_.error_model.verifier_noise;
  if (sigma > 0.0) {
    Rng rng(derive_seed(cfg_.model_seed,
                        {kVerifyStream, fnv1a64(prompt.id),
                         content_hash(scene).value}));
    for (auto& [key, value] : report.aspect_scores)
      value = q6(std::clamp(value + sigma * rng.gaussian(), 0.0, 10.0));
    report.overall_score =
        q6(std::clamp(report.overall_score + sigma * rng.gaussian(), 0.0,
                      10.0));
  }
  return report;
}

RefineResult SimPromptRefiner::refine(const RefineContext& ctx) {
  if (!ctx.structured)
    throw InvalidInputError(
        "simulated prompt refiner needs the structured prompt in the refine "
        "context");
  StructuredPrompt p = *ctx.structured;
  p.specificity = q6(std::min(1.0, p.specificity + cfg_.refine_delta));
  RefineResult out;
  out.text = render_prompt_text(p, /*long_form=*/false);
  out.structured = std::move(p);
  return out;
}

BackendBundle make_simulated_bundle(const SimConfig& cfg) {
  BackendBundle b;
  b.generator = std::make_shared<SimGenerator>(cfg);
  b.corrector = std::make_shared<SimCorrector>(cfg);
  b.reflector = std::make_shared<SimReflector>(cfg);
  b.verifier = std::make_shared<SimVerifier>(cfg);
  b.prompt_refiner = std::make_shared<SimPromptRefiner>(cfg);
  return b;
}

}  // namespace rflow
