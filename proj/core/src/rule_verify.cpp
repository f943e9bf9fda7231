// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/rule_verify.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "rflow/errors.hpp"

namespace rflow {

namespace {

constexpr std::array<const char*, 5> kErrorKindNames = {
    "missing_object", "extra_object", "wrong_color", "wrong_count",
    "wrong_position"};

bool relation_holds(Relation rel, const std::array<double, 2>& subject,
                    const std::array<double, 2>& reference) {
  switch (rel) {
    case Relation::left_of: return subject[0] < reference[0];
    case Relation::right_of: return subject[0] > reference[0];
    case Relation::above: return subject[1] < reference[1];
    case Relation::below: return subject[1] > reference[1];
  }
  return false;
}

// Human-readable description of how `subject` actually sits relative to
// `reference` on the axis the expected relation cares about.
std::string observed_relation(Relation expected,
                              const std::array<double, 2>& subject,
                              const std::array<double, 2>& reference) {
  const bool horizontal =
      expected == Relation::left_of || expected == Relation::right_of;
  const double a = horizontal ? subject[0] : subject[1];
  const double b = horizontal ? reference[0] : reference[1];
  if (a == b) return "tie";
  if (horizontal) return a < b ? "left_of" : "right_of";
  return a < b ? "above" : "below";
}

}  // namespace

const char* to_string(ErrorKind k) {
  return kErrorKindNames[static_cast<std::size_t>(k)];
}

ErrorKind error_kind_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kErrorKindNames.size(); ++i)
    if (s == kErrorKindNames[i]) return static_cast<ErrorKind>(i);
  throw InvalidInputError("unknown error kind: " + s);
}

RuleVerdict verify_rule(const StructuredPrompt& prompt, const SceneGraph& scene,
                        const Vocabulary& vocab) {
  validate_prompt(prompt, vocab);
  validate_scene(scene);

  // Evaluate against the canonical object order so the verdict is invariant
  // to the scene's storage order.
  SceneGraph canon = scene;
  canonicalize(canon);

  const auto objects_of = [&](const std::string& cls) {
    std::vector<const SceneObject*> out;
    for (const SceneObject& o : canon.objects)
      if (o.cls == cls) out.push_back(&o);
    return out;
  };

  RuleVerdict verdict;
  int units = 0;

  for (const ObjectSpec& spec : prompt.objects) {
    const auto objs = objects_of(spec.cls);
    const bool present = !objs.empty();

    ++units;
    if (!present)
      verdict.errors.push_back(
          {ErrorKind::missing_object, spec.cls, "present", "absent"});

    if (spec.color && vocab.has_color(*spec.color)) {
      ++units;
      if (!present) {
        verdict.errors.push_back(
            {ErrorKind::wrong_color, spec.cls, *spec.color, "absent"});
      } else {
        const auto bad = std::find_if(
            objs.begin(), objs.end(),
            [&](const SceneObject* o) { return o->color != *spec.color; });
        if (bad != objs.end())
          verdict.errors.push_back(
              {ErrorKind::wrong_color, spec.cls, *spec.color, (*bad)->color});
      }
    }

    if (prompt.category == Category::counting) {
      ++units;
      const int n = static_cast<int>(objs.size());
      if (n != spec.count)
        verdict.errors.push_back({ErrorKind::wrong_count, spec.cls,
                                  std::to_string(spec.count),
                                  std::to_string(n)});
    }

    if (spec.relation) {
      ++units;
      const ObjectSpec& other = prompt.objects[spec.relation->other_index];
      const auto refs = objects_of(other.cls);
      const std::string expected =
          std::string(to_string(spec.relation->relation)) + " " + other.cls;
      if (!present || refs.empty()) {
        verdict.errors.push_back(
            {ErrorKind::wrong_position, spec.cls, expected, "missing"});
      } else {
        bool satisfied = false;
        for (const SceneObject* a : objs)
          for (const SceneObject* b : refs)
            satisfied = satisfied ||
                        relation_holds(spec.relation->relation,
                                       bbox_center(a->bbox),
                                       bbox_center(b->bbox));
        if (!satisfied) {
          std::string obs = observed_relation(spec.relation->relation,
                                              bbox_center(objs.front()->bbox),
                                              bbox_center(refs.front()->bbox));
          if (obs != "tie") obs += " " + other.cls;
          verdict.errors.push_back(
              {ErrorKind::wrong_position, spec.cls, expected, std::move(obs)});
        }
      }
    }
  }

  // Only these categories constrain the scene's complement.
  if (prompt.category == Category::single_object ||
      prompt.category == Category::counting) {
    std::set<std::string> required;
    for (const ObjectSpec& spec : prompt.objects) required.insert(spec.cls);
    std::set<std::string> flagged;
    for (const SceneObject& o : canon.objects)
      if (!required.count(o.cls) && flagged.insert(o.cls).second)
        verdict.errors.push_back(
            {ErrorKind::extra_object, o.cls, "absent", "present"});
  }

  const double mass = static_cast<double>(verdict.errors.size());
  verdict.score =
      std::clamp(1.0 - mass / static_cast<double>(units), 0.0, 1.0);
  verdict.pass = verdict.errors.empty();
  return verdict;
}

double prompt_difficulty(std::span<const RuleVerdict> verdicts) {
  if (verdicts.empty())
    throw InvalidInputError("prompt_difficulty needs a non-empty verdict list");
  std::size_t passed = 0;
  for (const RuleVerdict& v : verdicts)
    if (v.pass) ++passed;
  return static_cast<double>(passed) / static_cast<double>(verdicts.size());
}

namespace {
double subscore(int required, int failed) {
  if (required == 0) return 1.0;
  return 1.0 - static_cast<double>(failed) / static_cast<double>(required);
}
}  // namespace

double RubricBreakdown::presence_subscore() const {
  return subscore(presence_required, presence_failed);
}
double RubricBreakdown::color_subscore() const {
  return subscore(color_required, color_failed);
}
double RubricBreakdown::count_subscore() const {
  return subscore(count_required, count_failed);
}
double RubricBreakdown::relation_subscore() const {
  return subscore(relation_required, relation_failed);
}

RubricBreakdown rubric_breakdown(const StructuredPrompt& prompt,
                                 const SceneGraph& scene,
                                 const RuleVerdict& verdict,
                                 const Vocabulary& vocab) {
  RubricBreakdown b;
  for (const ObjectSpec& spec : prompt.objects) {
    ++b.presence_required;
    // Wildcard color adjectives are render-only and add no rubric unit.
    if (spec.color && vocab.has_color(*spec.color)) ++b.color_required;
    b.expected_objects += spec.count;
    if (spec.relation) ++b.relation_required;
  }
  if (prompt.category == Category::counting)
    b.count_required = static_cast<int>(prompt.objects.size());
  b.observed_objects = static_cast<int>(scene.objects.size());

  for (const ErrorFact& e : verdict.errors) {
    switch (e.kind) {
      case ErrorKind::missing_object: ++b.presence_failed; break;
      case ErrorKind::wrong_color: ++b.color_failed; break;
      case ErrorKind::wrong_count: ++b.count_failed; break;
      case ErrorKind::wrong_position: ++b.relation_failed; break;
      case ErrorKind::extra_object: ++b.extra_errors; break;
    }
  }
  return b;
}

Json error_fact_to_json(const ErrorFact& f) {
  Json j;
  j["kind"] = to_string(f.kind);
  j["subject"] = f.subject;
  j["expected"] = f.expected;
  j["observed"] = f.observed;
  return j;
}

ErrorFact error_fact_from_json(const Json& j, const std::string& path) {
  ErrorFact f;
  f.kind = error_kind_from_string(require_string(j, "kind", path));
  f.subject = require_string(j, "subject", path);
  f.expected = require_string(j, "expected", path);
  f.observed = require_string(j, "observed", path);
  return f;
}

Json verdict_to_json(const RuleVerdict& v) {
  Json j;
  j["score"] = jnum(q6(v.score));
  j["pass"] = v.pass;
  Json errors = Json::array();
  for (const ErrorFact& e : v.errors) errors.push_back(error_fact_to_json(e));
  j["errors"] = std::move(errors);
  return j;
}

}  // namespace rflow
