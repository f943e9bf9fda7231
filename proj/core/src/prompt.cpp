// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/prompt.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "rflow/errors.hpp"
#include "rflow/rng.hpp"

namespace rflow {

namespace {

constexpr std::array<const char*, 6> kCategoryNames = {
    "single_object", "two_objects",   "counting",
    "colors",        "position",      "color_attribution"};

constexpr std::array<const char*, 4> kRelationNames = {"left_of", "right_of",
                                                       "above", "below"};

bool starts_with_vowel(const std::string& w) {
  if (w.empty()) return false;
  switch (w[0]) {
    case 'a': case 'e': case 'i': case 'o': case 'u':
    case 'A': case 'E': case 'I': case 'O': case 'U':
      return true;
    default:
      return false;
  }
}

}  // namespace

const char* to_string(Category c) {
  return kCategoryNames[static_cast<std::size_t>(c)];
}

const char* to_string(Relation r) {
  return kRelationNames[static_cast<std::size_t>(r)];
}

Category category_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
    if (s == kCategoryNames[i]) return static_cast<Category>(i);
  throw InvalidInputError("unknown category: " + s);
}

Relation relation_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kRelationNames.size(); ++i)
    if (s == kRelationNames[i]) return static_cast<Relation>(i);
  throw InvalidInputError("unknown relation: " + s);
}

std::string indefinite_article(const std::string& noun) {
  return starts_with_vowel(noun) ? "an" : "a";
}

std::string pluralize(const std::string& noun) {
  if (noun.empty()) return noun;
  const auto ends_with = [&](const char* suffix) {
    const std::size_t n = std::string_view(suffix).size();
    return noun.size() >= n && noun.compare(noun.size() - n, n, suffix) == 0;
  };
  if (ends_with("s") || ends_with("x") || ends_with("ch") || ends_with("sh"))
    return noun + "es";
  if (noun.size() >= 2 && noun.back() == 'y' &&
      !starts_with_vowel(noun.substr(noun.size() - 2, 1)))
    return noun.substr(0, noun.size() - 1) + "ies";
  return noun + "s";
}

std::string count_word(int n) {
  static const std::array<const char*, 11> words = {
      "zero", "one", "two",   "three", "four", "five",
      "six",  "seven", "eight", "nine",  "ten"};
  if (n >= 0 && n < static_cast<int>(words.size())) return words[n];
  return std::to_string(n);
}

std::string relation_phrase(Relation r) {
  switch (r) {
    case Relation::left_of: return "to the left of";
    case Relation::right_of: return "to the right of";
    case Relation::above: return "above";
    case Relation::below: return "below";
  }
  return "";
}

void validate_prompt(const StructuredPrompt& p, const Vocabulary& vocab) {
  if (p.id.empty()) throw InvalidInputError("prompt id must be non-empty");
  if (!(p.specificity >= 0.0 && p.specificity <= 1.0))
    throw InvalidInputError("prompt specificity must lie in [0,1]");
  if (p.objects.empty())
    throw InvalidInputError("prompt must declare at least one object");

  int relations = 0;
  for (std::size_t i = 0; i < p.objects.size(); ++i) {
    const ObjectSpec& s = p.objects[i];
    if (!vocab.has_class(s.cls))
      throw InvalidInputError("class token outside vocabulary: " + s.cls);
    if (s.color && !vocab.has_color(*s.color) &&
        !vocab.is_wildcard_color(*s.color))
      throw InvalidInputError("color token outside vocabulary: " + *s.color);
    if (s.count < 1) throw InvalidInputError("object count must be >= 1");
    if (s.relation) {
      ++relations;
      const int other = s.relation->other_index;
      if (other < 0 || other >= static_cast<int>(p.objects.size()) ||
          other == static_cast<int>(i))
        throw InvalidInputError("relation other_index out of range");
    }
  }
  for (std::size_t i = 0; i < p.objects.size(); ++i)
    for (std::size_t j = i + 1; j < p.objects.size(); ++j)
      if (p.objects[i].cls == p.objects[j].cls)
        throw InvalidInputError("prompt object classes must be distinct");

  const auto require = [&](bool ok, const char* what) {
    if (!ok)
      throw InvalidInputError(std::string("category ") +
                              to_string(p.category) + ": " + what);
  };
  const auto all_colored = [&] {
    return std::all_of(p.objects.begin(), p.objects.end(), [&](const auto& s) {
      return s.color && vocab.has_color(*s.color);
    });
  };
  switch (p.category) {
    case Category::single_object:
      require(p.objects.size() == 1 && p.objects[0].count == 1,
              "needs exactly 1 object with count 1");
      require(relations == 0, "must not carry a relation");
      break;
    case Category::two_objects:
      require(p.objects.size() == 2, "needs exactly 2 objects");
      require(p.objects[0].count == 1 && p.objects[1].count == 1,
              "needs counts of 1");
      require(relations == 0, "must not carry a relation");
      break;
    case Category::counting:
      require(p.objects.size() == 1, "needs exactly 1 object");
      require(p.objects[0].count >= 2 && p.objects[0].count <= 6,
              "needs count in [2,6]");
      require(relations == 0, "must not carry a relation");
      break;
    case Category::colors:
      require(p.objects.size() == 1 && p.objects[0].count == 1,
              "needs exactly 1 object with count 1");
      require(all_colored(), "every object needs a concrete color");
      require(relations == 0, "must not carry a relation");
      break;
    case Category::position:
      require(p.objects.size() == 2, "needs exactly 2 objects");
      require(p.objects[0].count == 1 && p.objects[1].count == 1,
              "needs counts of 1");
      require(relations == 1, "needs exactly one relation");
      break;
    case Category::color_attribution:
      require(p.objects.size() == 2, "needs exactly 2 objects");
      require(p.objects[0].count == 1 && p.objects[1].count == 1,
              "needs counts of 1");
      require(all_colored(), "every object needs a concrete color");
      require(relations == 0, "must not carry a relation");
      break;
  }
}

namespace {

std::string noun_phrase(const ObjectSpec& s, bool with_color) {
  std::string head;
  if (with_color && s.color) head = *s.color + " " + s.cls;
  else head = s.cls;
  return indefinite_article(head) + " " + head;
}

}  // namespace

std::string render_prompt_text(const StructuredPrompt& p, bool long_form) {
  const auto included = [&](double threshold) {
    return long_form || threshold <= p.specificity;
  };
  const bool with_color = included(kColorThreshold);
  const bool with_count = included(kCountThreshold);
  const bool with_relation = included(kRelationThreshold);

  std::ostringstream out;
  out << "a photo of ";
  if (p.category == Category::counting) {
    const ObjectSpec& s = p.objects[0];
    if (with_count) out << count_word(s.count) << " ";
    if (with_color && s.color) out << *s.color << " ";
    out << pluralize(s.cls);
    return out.str();
  }
  if (p.objects.size() == 1) {
    out << noun_phrase(p.objects[0], with_color);
    return out.str();
  }
  // Two objects; a relation (when present and included) orders the sentence
  // as "<subject> <relation> <reference>".
  int subject = 0;
  const RelationSpec* rel = nullptr;
  for (std::size_t i = 0; i < p.objects.size(); ++i) {
    if (p.objects[i].relation) {
      subject = static_cast<int>(i);
      rel = &*p.objects[i].relation;
    }
  }
  if (rel && with_relation) {
    const ObjectSpec& a = p.objects[subject];
    const ObjectSpec& b = p.objects[rel->other_index];
    out << noun_phrase(a, with_color) << " " << relation_phrase(rel->relation)
        << " " << noun_phrase(b, with_color);
  } else {
    out << noun_phrase(p.objects[0], with_color) << " and "
        << noun_phrase(p.objects[1], with_color);
  }
  return out.str();
}

namespace {

// Splits "a red cube" / "an orange ball" / "a cube" into (color?, class).
struct ParsedNoun {
  std::optional<std::string> color;
  std::string cls;
};

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

ParsedNoun parse_noun_phrase(std::vector<std::string> words,
                             const Vocabulary& vocab) {
  if (!words.empty() && (words[0] == "a" || words[0] == "an"))
    words.erase(words.begin());
  ParsedNoun out;
  if (words.size() == 2 &&
      (vocab.has_color(words[0]) || vocab.is_wildcard_color(words[0]))) {
    out.color = words[0];
    out.cls = words[1];
  } else if (words.size() == 1) {
    out.cls = words[0];
  } else {
    throw InvalidInputError("unparsable noun phrase");
  }
  if (!vocab.has_class(out.cls))
    throw InvalidInputError("unknown object class: " + out.cls);
  return out;
}

int count_from_word(const std::string& w) {
  for (int n = 0; n <= 10; ++n)
    if (count_word(n) == w) return n;
  return -1;
}

std::string singularize(const std::string& plural, const Vocabulary& vocab) {
  for (const auto& cls : vocab.classes)
    if (pluralize(cls) == plural) return cls;
  throw InvalidInputError("unknown plural class: " + plural);
}

}  // namespace

StructuredPrompt parse_prompt_text(const std::string& text,
                                   const Vocabulary& vocab) {
  constexpr std::string_view prefix = "a photo of ";
  if (text.rfind(prefix, 0) != 0)
    throw InvalidInputError("prompt text must start with 'a photo of'");
  const std::string body = text.substr(prefix.size());

  StructuredPrompt p;
  p.id = "text-" + std::to_string(fnv1a64(text));
  p.specificity = 1.0;

  // Relation form: "<np> to the left of <np>" etc.
  for (std::size_t r = 0; r < 4; ++r) {
    const Relation rel = static_cast<Relation>(r);
    const std::string needle = " " + relation_phrase(rel) + " ";
    const auto pos = body.find(needle);
    if (pos == std::string::npos) continue;
    ParsedNoun a = parse_noun_phrase(split_words(body.substr(0, pos)), vocab);
    ParsedNoun b =
        parse_noun_phrase(split_words(body.substr(pos + needle.size())), vocab);
    p.category = Category::position;
    p.objects = {ObjectSpec{a.cls, a.color, 1,
                            RelationSpec{1, rel}},
                 ObjectSpec{b.cls, b.color, 1, std::nullopt}};
    validate_prompt(p, vocab);
    return p;
  }

  // Two-object form: "<np> and <np>".
  const auto and_pos = body.find(" and ");
  if (and_pos != std::string::npos) {
    ParsedNoun a =
        parse_noun_phrase(split_words(body.substr(0, and_pos)), vocab);
    ParsedNoun b =
        parse_noun_phrase(split_words(body.substr(and_pos + 5)), vocab);
    const bool both_colored = a.color && vocab.has_color(*a.color) &&
                              b.color && vocab.has_color(*b.color);
    p.category =
        both_colored ? Category::color_attribution : Category::two_objects;
    p.objects = {ObjectSpec{a.cls, a.color, 1, std::nullopt},
                 ObjectSpec{b.cls, b.color, 1, std::nullopt}};
    validate_prompt(p, vocab);
    return p;
  }

  // Counting form: "<count-word> [color] <plural>".
  std::vector<std::string> words = split_words(body);
  if (!words.empty()) {
    const int n = count_from_word(words[0]);
    if (n >= 2) {
      words.erase(words.begin());
      std::optional<std::string> color;
      if (words.size() == 2 &&
          (vocab.has_color(words[0]) || vocab.is_wildcard_color(words[0]))) {
        color = words[0];
        words.erase(words.begin());
      }
      if (words.size() != 1)
        throw InvalidInputError("unparsable counting prompt: " + text);
      p.category = Category::counting;
      p.objects = {ObjectSpec{singularize(words[0], vocab), color, n,
                              std::nullopt}};
      validate_prompt(p, vocab);
      return p;
    }
  }

  // Single noun phrase: colors when a concrete color is present.
  ParsedNoun a = parse_noun_phrase(words, vocab);
  p.category = (a.color && vocab.has_color(*a.color)) ? Category::colors
                                                      : Category::single_object;
  p.objects = {ObjectSpec{a.cls, a.color, 1, std::nullopt}};
  validate_prompt(p, vocab);
  return p;
}

Json prompt_to_json(const StructuredPrompt& p) {
  Json j;
  j["id"] = p.id;
  j["category"] = to_string(p.category);
  Json objs = Json::array();
  for (const ObjectSpec& s : p.objects) {
    Json o;
    o["class"] = s.cls;
    if (s.color) o["color"] = *s.color;
    o["count"] = s.count;
    if (s.relation) {
      Json r;
      r["other_index"] = s.relation->other_index;
      r["relation"] = to_string(s.relation->relation);
      o["relation"] = std::move(r);
    }
    objs.push_back(std::move(o));
  }
  j["objects"] = std::move(objs);
  j["specificity"] = jnum(q6(p.specificity));
  return j;
}

StructuredPrompt prompt_from_json(const Json& j, const std::string& path) {
  StructuredPrompt p;
  p.id = require_string(j, "id", path);
  p.category = category_from_string(require_string(j, "category", path));
  const Json& objs = require_array(j, "objects", path);
  for (std::size_t i = 0; i < objs.size(); ++i) {
    const std::string opath = path + ".objects[" + std::to_string(i) + "]";
    const Json& o = objs[i];
    ObjectSpec s;
    s.cls = require_string(o, "class", opath);
    if (o.contains("color")) s.color = o["color"].get<std::string>();
    s.count = static_cast<int>(require_int(o, "count", opath));
    if (o.contains("relation")) {
      const Json& r = o["relation"];
      RelationSpec rel;
      rel.other_index =
          static_cast<int>(require_int(r, "other_index", opath + ".relation"));
      rel.relation = relation_from_string(
          require_string(r, "relation", opath + ".relation"));
      s.relation = rel;
    }
    p.objects.push_back(std::move(s));
  }
  p.specificity = require_number(j, "specificity", path);
  return p;
}

std::vector<StructuredPrompt> make_random_prompts(int n, std::uint64_t seed,
                                                  const Vocabulary& vocab,
                                                  const PromptGenOptions& opts) {
  if (n < 0) throw InvalidInputError("prompt count must be >= 0");
  std::vector<StructuredPrompt> prompts;
  prompts.reserve(static_cast<std::size_t>(n));
  Rng rng(derive_seed(seed, {0x70726f6d70747320ULL}));

  const auto pick_class = [&] {
    return vocab.classes[rng.next_below(vocab.classes.size())];
  };
  const auto pick_distinct_class = [&](const std::string& other) {
    std::string c = pick_class();
    while (c == other) c = pick_class();
    return c;
  };
  const auto pick_color = [&] {
    return vocab.colors[rng.next_below(vocab.colors.size())];
  };

  for (int i = 0; i < n; ++i) {
    StructuredPrompt p;
    p.id = "p" + std::to_string(i);
    p.category = static_cast<Category>(i % 6);
    p.specificity =
        q6(rng.uniform(opts.min_specificity, opts.max_specificity));
    switch (p.category) {
      case Category::single_object:
        p.objects = {ObjectSpec{pick_class(), std::nullopt, 1, std::nullopt}};
        break;
      case Category::two_objects: {
        const std::string a = pick_class();
        const std::string b = pick_distinct_class(a);
        std::optional<std::string> ca, cb;
        if (rng.bernoulli(0.5)) ca = pick_color();
        if (rng.bernoulli(0.5)) cb = pick_color();
        p.objects = {ObjectSpec{a, ca, 1, std::nullopt},
                     ObjectSpec{b, cb, 1, std::nullopt}};
        break;
      }
      case Category::counting: {
        std::optional<std::string> color;
        const double roll = rng.next_double();
        if (roll < 0.25 && !vocab.wildcard_colors.empty())
          color = vocab.wildcard_colors[0];
        else if (roll < 0.5)
          color = pick_color();
        p.objects = {ObjectSpec{pick_class(), color,
                                static_cast<int>(2 + rng.next_below(5)),
                                std::nullopt}};
        break;
      }
      case Category::colors:
        p.objects = {ObjectSpec{pick_class(), pick_color(), 1, std::nullopt}};
        break;
      case Category::position: {
        const std::string a = pick_class();
        const std::string b = pick_distinct_class(a);
        std::optional<std::string> ca, cb;
        if (rng.bernoulli(0.5)) ca = pick_color();
        if (rng.bernoulli(0.5)) cb = pick_color();
        const Relation rel = static_cast<Relation>(rng.next_below(4));
        p.objects = {ObjectSpec{a, ca, 1, RelationSpec{1, rel}},
                     ObjectSpec{b, cb, 1, std::nullopt}};
        break;
      }
      case Category::color_attribution: {
        const std::string a = pick_class();
        const std::string b = pick_distinct_class(a);
        p.objects = {ObjectSpec{a, pick_color(), 1, std::nullopt},
                     ObjectSpec{b, pick_color(), 1, std::nullopt}};
        break;
      }
    }
    validate_prompt(p, vocab);
    prompts.push_back(std::move(p));
  }
  return prompts;
}

}  // namespace rflow
