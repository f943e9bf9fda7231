// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/jsonutil.hpp"

namespace rflow {

std::uint64_t u64_from_string(const std::string& s, const std::string& path) {
  if (s.empty()) throw SchemaError(path, "empty 64-bit integer string");
  std::uint64_t value = 0;
  for (const char c : s) {
    if (c < '0' || c > '9')
      throw SchemaError(path, "malformed 64-bit integer string '" + s + "'");
    const std::uint64_t digit = static_cast<std::uint64_t>(c - '0');
    if (value > (UINT64_MAX - digit) / 10)
      throw SchemaError(path, "64-bit integer overflow in '" + s + "'");
    value = value * 10 + digit;
  }
  return value;
}

Json parse_json(const std::string& text, const std::string& what) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw SchemaError(what, "malformed JSON", text);
  return j;
}

const Json& require_field(const Json& obj, const std::string& key,
                          const std::string& path) {
  if (!obj.is_object())
    throw SchemaError(path, "expected a JSON object", obj.dump());
  const auto it = obj.find(key);
  if (it == obj.end())
    throw SchemaError(join_path(path, key), "missing required field",
                      obj.dump());
  return *it;
}

std::string require_string(const Json& obj, const std::string& key,
                           const std::string& path) {
  const Json& f = require_field(obj, key, path);
  if (!f.is_string())
    throw SchemaError(join_path(path, key), "expected a string", obj.dump());
  return f.get<std::string>();
}

double require_number(const Json& obj, const std::string& key,
                      const std::string& path) {
  const Json& f = require_field(obj, key, path);
  if (!f.is_number())
    throw SchemaError(join_path(path, key), "expected a number", obj.dump());
  return f.get<double>();
}

std::int64_t require_int(const Json& obj, const std::string& key,
                         const std::string& path) {
  const Json& f = require_field(obj, key, path);
  if (!f.is_number_integer())
    throw SchemaError(join_path(path, key), "expected an integer", obj.dump());
  return f.get<std::int64_t>();
}

const Json& require_array(const Json& obj, const std::string& key,
                          const std::string& path) {
  const Json& f = require_field(obj, key, path);
  if (!f.is_array())
    throw SchemaError(join_path(path, key), "expected an array", obj.dump());
  return f;
}

const Json& require_object(const Json& obj, const std::string& key,
                           const std::string& path) {
  const Json& f = require_field(obj, key, path);
  if (!f.is_object())
    throw SchemaError(join_path(path, key), "expected an object", obj.dump());
  return f;
}

}  // namespace rflow
