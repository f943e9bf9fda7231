// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rflow/jsonutil.hpp"

namespace rflow {

// Axis convention: bbox = [x0, y0, x1, y1] in the unit square with y growing
// downward (image coordinates), x0 <= x1 and y0 <= y1. "above" therefore
// means a smaller center y.
struct SceneObject {
  std::string cls;
  std::string color;
  std::array<double, 4> bbox{0.0, 0.0, 0.0, 0.0};
  int z = 0;
};

struct SeedProvenance {
  std::uint64_t run_seed = 0;
  int chain = -1;
  int iteration = -1;
  std::string role;  // backend role that produced the scene
};

// The synthetic stand-in for a generated image: a typed object list plus an
// aesthetic-quality scalar. An empty object list is legal (a degenerate but
// possible generation).
struct SceneGraph {
  std::vector<SceneObject> objects;
  double quality = 1.0;
  SeedProvenance seed_provenance;
};

struct Digest {
  std::uint64_t value = 0;
  std::string hex() const;
  friend bool operator==(const Digest&, const Digest&) = default;
  friend auto operator<=>(const Digest&, const Digest&) = default;
};

// Throws InvalidInputError when a bbox leaves the unit square, a bbox is
// inverted, or quality falls outside [0,1].
void validate_scene(const SceneGraph& scene);

// Sorts objects into canonical order (z, class, color, bbox) and quantizes
// all reals to 1e-6 so equal scenes serialize to equal bytes.
void canonicalize(SceneGraph& scene);

Json scene_to_json(const SceneGraph& scene);
SceneGraph scene_from_json(const Json& j, const std::string& path);

// Canonical single-line serialization of the canonicalized scene.
std::string canonical_serialize(const SceneGraph& scene);
SceneGraph scene_from_text(const std::string& text);

Digest content_hash(const SceneGraph& scene);

std::array<double, 2> bbox_center(const std::array<double, 4>& bbox);

}  // namespace rflow
