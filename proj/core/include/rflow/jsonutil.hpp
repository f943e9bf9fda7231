// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "rflow/errors.hpp"

namespace rflow {

// All canonical serialization in this project uses ordered_json with fields
// inserted in schema order, reals quantized to 1e-6 and 64-bit seeds carried
// as decimal strings. That makes dumps byte-stable across runs and platforms.
using Json = nlohmann::ordered_json;

// Quantize a real to 6 decimal places before it enters a canonical document.
inline double q6(double x) {
  return std::round(x * 1e6) / 1e6;
}

// Canonical JSON number: integral values are stored as integers ("8", not
// "8.0") so encode(decode(x)) == x holds byte-for-byte on golden payloads.
inline Json jnum(double x) {
  if (std::floor(x) == x && std::abs(x) < 9.007199254740992e15)
    return Json(static_cast<std::int64_t>(x));
  return Json(x);
}

inline std::string u64_to_string(std::uint64_t v) { return std::to_string(v); }

std::uint64_t u64_from_string(const std::string& s, const std::string& path);

Json parse_json(const std::string& text, const std::string& what);

// Field accessors that raise SchemaError with a dotted field path on
// missing or mistyped members. `path` is the path of `obj` itself.
const Json& require_field(const Json& obj, const std::string& key,
                          const std::string& path);
std::string require_string(const Json& obj, const std::string& key,
                           const std::string& path);
double require_number(const Json& obj, const std::string& key,
                      const std::string& path);
std::int64_t require_int(const Json& obj, const std::string& key,
                         const std::string& path);
const Json& require_array(const Json& obj, const std::string& key,
                          const std::string& path);
const Json& require_object(const Json& obj, const std::string& key,
                           const std::string& path);

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

}  // namespace rflow
