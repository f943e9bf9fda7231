// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rflow/errors.hpp"
#include "rflow/jsonutil.hpp"

namespace rflow {

Vocabulary Vocabulary::defaults() {
  Vocabulary v;
  v.classes = {"cube", "ball",  "pencil", "spoon", "blanket", "cup",
               "chair", "dog",  "cat",    "car",   "book",    "bottle"};
  v.colors = {"red",   "blue",  "green",  "yellow",
              "white", "black", "orange", "purple"};
  v.wildcard_colors = {"colored"};
  return v;
}

Vocabulary Vocabulary::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const Json j = parse_json(buf.str(), "vocabulary");
  Vocabulary v;
  for (const auto& c : require_array(j, "classes", "vocabulary"))
    v.classes.push_back(c.get<std::string>());
  for (const auto& c : require_array(j, "colors", "vocabulary"))
    v.colors.push_back(c.get<std::string>());
  if (j.contains("wildcard_colors"))
    for (const auto& c : j["wildcard_colors"])
      v.wildcard_colors.push_back(c.get<std::string>());
  if (v.classes.empty() || v.colors.size() < 2)
    throw InvalidInputError("vocabulary needs >= 1 class and >= 2 colors");
  return v;
}

bool Vocabulary::has_class(std::string_view token) const {
  return std::find(classes.begin(), classes.end(), token) != classes.end();
}

bool Vocabulary::has_color(std::string_view token) const {
  return std::find(colors.begin(), colors.end(), token) != colors.end();
}

bool Vocabulary::is_wildcard_color(std::string_view token) const {
  return std::find(wildcard_colors.begin(), wildcard_colors.end(), token) !=
         wildcard_colors.end();
}

std::size_t Vocabulary::color_index(std::string_view token) const {
  const auto it = std::find(colors.begin(), colors.end(), token);
  if (it == colors.end())
    throw InvalidInputError("unknown color token: " + std::string(token));
  return static_cast<std::size_t>(it - colors.begin());
}

std::string Vocabulary::different_color(std::string_view current,
                                        std::uint64_t pick) const {
  if (colors.size() < 2)
    throw InvalidInputError("need >= 2 colors to recolor");
  std::vector<std::string> pool;
  pool.reserve(colors.size());
  for (const auto& c : colors)
    if (c != current) pool.push_back(c);
  return pool[pick % pool.size()];
}

}  // namespace rflow
