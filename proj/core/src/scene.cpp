// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/scene.hpp"

#include <algorithm>
#include <cstdio>
#include <tuple>

#include "rflow/errors.hpp"
#include "rflow/rng.hpp"

namespace rflow {

std::string Digest::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return std::string(buf);
}

void validate_scene(const SceneGraph& scene) {
  for (const SceneObject& o : scene.objects) {
    const auto& b = o.bbox;
    for (const double v : b)
      if (!(v >= 0.0 && v <= 1.0))
        throw InvalidInputError("scene bbox leaves the unit square");
    if (b[0] > b[2] || b[1] > b[3])
      throw InvalidInputError("scene bbox is inverted");
    if (o.cls.empty()) throw InvalidInputError("scene object class is empty");
  }
  if (!(scene.quality >= 0.0 && scene.quality <= 1.0))
    throw InvalidInputError("scene quality must lie in [0,1]");
}

void canonicalize(SceneGraph& scene) {
  for (SceneObject& o : scene.objects)
    for (double& v : o.bbox) v = q6(v);
  scene.quality = q6(scene.quality);
  std::sort(scene.objects.begin(), scene.objects.end(),
            [](const SceneObject& a, const SceneObject& b) {
              return std::tie(a.z, a.cls, a.color, a.bbox) <
                     std::tie(b.z, b.cls, b.color, b.bbox);
            });
}

Json scene_to_json(const SceneGraph& scene) {
  SceneGraph c = scene;
  canonicalize(c);
  Json j;
  j["objects"] = Json::array();
  for (const SceneObject& o : c.objects) {
    Json obj;
    obj["class"] = o.cls;
    obj["color"] = o.color;
    Json bbox = Json::array();
    for (const double v : o.bbox) bbox.push_back(jnum(v));
    obj["bbox"] = std::move(bbox);
    obj["z"] = o.z;
    j["objects"].push_back(std::move(obj));
  }
  j["quality"] = jnum(c.quality);
  Json prov;
  prov["run_seed"] = u64_to_string(c.seed_provenance.run_seed);
  prov["chain"] = c.seed_provenance.chain;
  prov["iteration"] = c.seed_provenance.iteration;
  prov["role"] = c.seed_provenance.role;
  j["seed_provenance"] = std::move(prov);
  return j;
}

SceneGraph scene_from_json(const Json& j, const std::string& path) {
  SceneGraph scene;
  const Json& objs = require_array(j, "objects", path);
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string opath = path + ".objects[" + std::to_string(i) + "]";
    const Json& o = objs[i];
    SceneObject obj;
    obj.cls = require_string(o, "class", opath);
    obj.color = require_string(o, "color", opath);
    const Json& bbox = require_array(o, "bbox", opath);
    if (bbox.size() != 4)
      throw SchemaError(opath + ".bbox", "expected 4 numbers", o.dump());
    for (std::size_t k = 0; k < 4; ++k) {
      if (!bbox[k].is_number())
        throw SchemaError(opath + ".bbox", "expected a number", o.dump());
      obj.bbox[k] = bbox[k].get<double>();
    }
    obj.z = static_cast<int>(require_int(o, "z", opath));
    scene.objects.push_back(std::move(obj));
  }
  scene.quality = require_number(j, "quality", path);
  const Json& prov = require_object(j, "seed_provenance", path);
  scene.seed_provenance.run_seed = u64_from_string(
      require_string(prov, "run_seed", path + ".seed_provenance"),
      path + ".seed_provenance.run_seed");
  scene.seed_provenance.chain =
      static_cast<int>(require_int(prov, "chain", path + ".seed_provenance"));
  scene.seed_provenance.iteration = static_cast<int>(
      require_int(prov, "iteration", path + ".seed_provenance"));
  scene.seed_provenance.role =
      require_string(prov, "role", path + ".seed_provenance");
  validate_scene(scene);
  return scene;
}

std::string canonical_serialize(const SceneGraph& scene) {
  return scene_to_json(scene).dump();
}

SceneGraph scene_from_text(const std::string& text) {
  return scene_from_json(parse_json(text, "scene"), "scene");
}

Digest content_hash(const SceneGraph& scene) {
  return Digest{fnv1a64(canonical_serialize(scene))};
}

std::array<double, 2> bbox_center(const std::array<double, 4>& bbox) {
  return {(bbox[0] + bbox[2]) / 2.0, (bbox[1] + bbox[3]) / 2.0};
}

}  // namespace rflow
