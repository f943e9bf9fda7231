// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/backend.hpp"

#include <algorithm>

#include "rflow/errors.hpp"

namespace rflow {

const char* to_string(BackendRole r) {
  switch (r) {
    case BackendRole::generator: return "generator";
    case BackendRole::corrector: return "corrector";
    case BackendRole::reflector: return "reflector";
    case BackendRole::verifier: return "verifier";
    case BackendRole::refiner: return "refiner";
  }
  return "?";
}

const std::vector<std::string>& aspect_keys(Category category) {
  static const std::vector<std::string> single = {
      "object_completeness", "detectability", "occlusion_handling"};
  static const std::vector<std::string> two = {
      "separation_clarity", "individual_completeness", "relationship_accuracy"};
  static const std::vector<std::string> counting = {
      "count_accuracy", "object_uniformity", "spatial_legibility"};
  static const std::vector<std::string> colors = {
      "color_fidelity", "contrast_effectiveness", "multi_object_consistency"};
  static const std::vector<std::string> position = {
      "position_accuracy", "occlusion_management", "perspective_consistency"};
  static const std::vector<std::string> attribution = {
      "attribute_binding", "contrast_effectiveness", "material_consistency"};
  switch (category) {
    case Category::single_object: return single;
    case Category::two_objects: return two;
    case Category::counting: return counting;
    case Category::colors: return colors;
    case Category::position: return position;
    case Category::color_attribution: return attribution;
  }
  return single;
}

void validate_report(const VerifierReport& report, Category category) {
  const std::vector<std::string>& keys = aspect_keys(category);
  if (report.aspect_scores.size() != keys.size())
    throw SchemaError("aspect_scores",
                      "expected exactly " + std::to_string(keys.size()) +
                          " aspect keys for category " + to_string(category));
  for (const std::string& k : keys) {
    const auto it = report.aspect_scores.find(k);
    if (it == report.aspect_scores.end())
      throw SchemaError(k, "missing aspect key for category " +
                               std::string(to_string(category)));
    if (!(it->second >= 0.0 && it->second <= 10.0))
      throw SchemaError(k, "aspect score outside [0,10]");
  }
  if (!(report.overall_score >= 0.0 && report.overall_score <= 10.0))
    throw SchemaError(kOverallScoreKey, "overall score outside [0,10]");
}

Json report_to_json(const VerifierReport& report) {
  Json j;
  Json aspects;
  for (const auto& [k, v] : report.aspect_scores) aspects[k] = jnum(q6(v));
  j["aspect_scores"] = std::move(aspects);
  j[kOverallScoreKey] = jnum(q6(report.overall_score));
  if (!report.rationale.empty()) j["rationale"] = report.rationale;
  return j;
}

VerifierReport report_from_json(const Json& j, const std::string& path) {
  VerifierReport r;
  const Json& aspects = require_object(j, "aspect_scores", path);
  for (const auto& [k, v] : aspects.items()) {
    if (!v.is_number())
      throw SchemaError(join_path(path, "aspect_scores." + k),
                        "expected a number", j.dump());
    r.aspect_scores[k] = v.get<double>();
  }
  r.overall_score = require_number(j, kOverallScoreKey, path);
  if (j.contains("rationale")) r.rationale = j["rationale"].get<std::string>();
  return r;
}

Json reflection_to_json(const Reflection& r) {
  Json j;
  j["text"] = r.text;
  if (r.structured) {
    Json facts = Json::array();
    for (const ErrorFact& f : *r.structured)
      facts.push_back(error_fact_to_json(f));
    j["structured"] = std::move(facts);
  }
  return j;
}

Reflection reflection_from_json(const Json& j, const std::string& path) {
  Reflection r;
  r.text = require_string(j, "text", path);
  if (r.text.empty())
    throw SchemaError(join_path(path, "text"), "reflection text is empty");
  if (j.contains("structured")) {
    if (!j["structured"].is_array())
      throw SchemaError(join_path(path, "structured"), "expected an array",
                        j.dump());
    std::vector<ErrorFact> facts;
    for (std::size_t i = 0; i < j["structured"].size(); ++i)
      facts.push_back(error_fact_from_json(
          j["structured"][i],
          path + ".structured[" + std::to_string(i) + "]"));
    r.structured = std::move(facts);
  }
  return r;
}

ErrorModel ErrorModel::defaults() {
  ErrorModel m;
  m.eps_attr = 0.4;
  m.specificity_gain = 0.5;
  m.p_fix = 0.75;
  m.p_regress = 0.05;
  m.reflector_recall = 0.9;
  m.reflector_hallucination = 0.05;
  m.verifier_noise = 0.5;
  return m;
}

ErrorModel ErrorModel::perfect() { return ErrorModel{}; }

void ErrorModel::validate() const {
  const auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
      throw InvalidInputError(std::string("ErrorModel.") + name +
                              " must lie in [0,1]");
  };
  prob(eps_attr, "eps_attr");
  prob(p_fix, "p_fix");
  prob(p_regress, "p_regress");
  prob(reflector_recall, "reflector_recall");
  prob(reflector_hallucination, "reflector_hallucination");
  if (!(specificity_gain >= 0.0))
    throw InvalidInputError("ErrorModel.specificity_gain must be >= 0");
  if (!(verifier_noise >= 0.0))
    throw InvalidInputError("ErrorModel.verifier_noise must be >= 0");
}

double ErrorModel::effective_eps(double specificity) const {
  const double scaled =
      eps_attr * (1.0 + specificity_gain * (1.0 - specificity));
  return std::clamp(scaled, 0.0, 1.0);
}

Json error_model_to_json(const ErrorModel& m) {
  Json j;
  j["eps_attr"] = jnum(q6(m.eps_attr));
  j["specificity_gain"] = jnum(q6(m.specificity_gain));
  j["p_fix"] = jnum(q6(m.p_fix));
  j["p_regress"] = jnum(q6(m.p_regress));
  j["reflector_recall"] = jnum(q6(m.reflector_recall));
  j["reflector_hallucination"] = jnum(q6(m.reflector_hallucination));
  j["verifier_noise"] = jnum(q6(m.verifier_noise));
  return j;
}

ErrorModel error_model_from_json(const Json& j, const std::string& path) {
  ErrorModel m;
  m.eps_attr = require_number(j, "eps_attr", path);
  m.specificity_gain = require_number(j, "specificity_gain", path);
  m.p_fix = require_number(j, "p_fix", path);
  m.p_regress = require_number(j, "p_regress", path);
  m.reflector_recall = require_number(j, "reflector_recall", path);
  m.reflector_hallucination = require_number(j, "reflector_hallucination", path);
  m.verifier_noise = require_number(j, "verifier_noise", path);
  m.validate();
  return m;
}

void BackendBundle::validate() const {
  if (!generator || !corrector || !reflector || !verifier || !prompt_refiner)
    throw InvalidInputError("BackendBundle must carry all five backends");
}

}  // namespace rflow
