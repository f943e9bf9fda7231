// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracles and generators. The evaluators here are deliberately
// written from the rubric definition, independent of the library code they
// check.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rflow/reward.hpp"
#include "rflow/rng.hpp"
#include "rflow/rule_verify.hpp"

namespace rflow::testutil {

// ---------------------------------------------------------------------------
// Brute-force rubric evaluator: straight-line scans, no shared helpers with
// verify_rule. Returns (score, pass, multiset of (kind, subject)).

struct OracleVerdict {
  double score = 0.0;
  bool pass = false;
  std::multiset<std::pair<std::string, std::string>> errors;
};

inline OracleVerdict brute_force_rubric(const StructuredPrompt& prompt,
                                        const SceneGraph& scene,
                                        const Vocabulary& vocab) {
  OracleVerdict out;
  int units = 0;
  int failures = 0;

  const auto note = [&](const char* kind, const std::string& subject) {
    out.errors.emplace(kind, subject);
    ++failures;
  };

  for (const ObjectSpec& spec : prompt.objects) {
    int present = 0;
    for (const SceneObject& o : scene.objects)
      if (o.cls == spec.cls) ++present;

    ++units;
    if (present == 0) note("missing_object", spec.cls);

    const bool concrete_color = spec.color && vocab.has_color(*spec.color);
    if (concrete_color) {
      ++units;
      if (present == 0) {
        note("wrong_color", spec.cls);
      } else {
        bool all_match = true;
        for (const SceneObject& o : scene.objects)
          if (o.cls == spec.cls && o.color != *spec.color) all_match = false;
        if (!all_match) note("wrong_color", spec.cls);
      }
    }

    if (prompt.category == Category::counting) {
      ++units;
      if (present != spec.count) note("wrong_count", spec.cls);
    }

    if (spec.relation) {
      ++units;
      const std::string& other = prompt.objects[spec.relation->other_index].cls;
      bool satisfied = false;
      bool any_pair = false;
      for (const SceneObject& a : scene.objects) {
        if (a.cls != spec.cls) continue;
        for (const SceneObject& b : scene.objects) {
          if (b.cls != other) continue;
          any_pair = true;
          const double ax = (a.bbox[0] + a.bbox[2]) / 2;
          const double ay = (a.bbox[1] + a.bbox[3]) / 2;
          const double bx = (b.bbox[0] + b.bbox[2]) / 2;
          const double by = (b.bbox[1] + b.bbox[3]) / 2;
          switch (spec.relation->relation) {
            case Relation::left_of: satisfied |= ax < bx; break;
            case Relation::right_of: satisfied |= ax > bx; break;
            case Relation::above: satisfied |= ay < by; break;
            case Relation::below: satisfied |= ay > by; break;
          }
        }
      }
      if (!any_pair || !satisfied) note("wrong_position", spec.cls);
    }
  }

  if (prompt.category == Category::single_object ||
      prompt.category == Category::counting) {
    std::set<std::string> required, seen;
    for (const ObjectSpec& spec : prompt.objects) required.insert(spec.cls);
    for (const SceneObject& o : scene.objects)
      if (!required.count(o.cls) && seen.insert(o.cls).second)
        note("extra_object", o.cls);
  }

  out.score = std::clamp(
      1.0 - static_cast<double>(failures) / static_cast<double>(units), 0.0,
      1.0);
  out.pass = out.errors.empty();
  return out;
}

inline std::multiset<std::pair<std::string, std::string>> error_multiset(
    const RuleVerdict& v) {
  std::multiset<std::pair<std::string, std::string>> out;
  for (const ErrorFact& e : v.errors) out.emplace(to_string(e.kind), e.subject);
  return out;
}

// ---------------------------------------------------------------------------
// Naive summation BT loss: independent of the library's stable form.

inline double naive_bt_loss(const RewardModel& model,
                            const std::vector<PreferencePair>& pairs,
                            const Vocabulary& vocab) {
  double total = 0.0;
  for (const PreferencePair& p : pairs) {
    const auto fw = featurize(p.prompt, p.winner, vocab);
    const auto fl = featurize(p.prompt, p.loser, vocab);
    double rw = model.bias, rl = model.bias;
    for (std::size_t i = 0; i < fw.size(); ++i) {
      rw += model.weights[i] * fw[i];
      rl += model.weights[i] * fl[i];
    }
    const double sig = 1.0 / (1.0 + std::exp(-(rw - rl)));
    total += -std::log(sig);
  }
  return total / static_cast<double>(pairs.size());
}

// Central finite differences of bt_loss with respect to (weights, bias).
inline std::vector<double> finite_diff_grad(const RewardModel& model,
                                            const std::vector<PreferencePair>& pairs,
                                            const Vocabulary& vocab,
                                            double h = 1e-5) {
  std::vector<double> grad(model.weights.size() + 1, 0.0);
  for (std::size_t k = 0; k < model.weights.size(); ++k) {
    RewardModel up = model, down = model;
    up.weights[k] += h;
    down.weights[k] -= h;
    grad[k] = (bt_loss(up, pairs, vocab) - bt_loss(down, pairs, vocab)) /
              (2.0 * h);
  }
  RewardModel up = model, down = model;
  up.bias += h;
  down.bias -= h;
  grad[model.weights.size()] =
      (bt_loss(up, pairs, vocab) - bt_loss(down, pairs, vocab)) / (2.0 * h);
  return grad;
}

// ---------------------------------------------------------------------------
// Random structure generators for property tests.

inline SceneGraph random_scene(Rng& rng, const Vocabulary& vocab,
                               int max_objects = 5) {
  SceneGraph scene;
  const std::uint64_t count = rng.next_below(max_objects + 1);
  for (std::uint64_t i = 0; i < count; ++i) {
    SceneObject o;
    o.cls = vocab.classes[rng.next_below(vocab.classes.size())];
    o.color = vocab.colors[rng.next_below(vocab.colors.size())];
    const double cx = rng.uniform(0.1, 0.9);
    const double cy = rng.uniform(0.1, 0.9);
    o.bbox = {cx - 0.1, cy - 0.1, cx + 0.1, cy + 0.1};
    o.z = static_cast<int>(i);
    scene.objects.push_back(std::move(o));
  }
  scene.quality = q6(rng.uniform(0.0, 1.0));
  canonicalize(scene);
  return scene;
}

inline StructuredPrompt random_prompt(Rng& rng, const Vocabulary& vocab) {
  const auto prompts = make_random_prompts(1, rng.next_u64(), vocab);
  return prompts.front();
}

}  // namespace rflow::testutil
