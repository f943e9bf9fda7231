// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#include "rflow/reflection_text.hpp"

#include <sstream>

#include "rflow/errors.hpp"

namespace rflow {

std::string render_instruction(const ErrorFact& fact) {
  switch (fact.kind) {
    case ErrorKind::missing_object:
      return "Add " + indefinite_article(fact.subject) + " " + fact.subject +
             ".";
    case ErrorKind::extra_object:
      return "Remove the " + fact.subject + ".";
    case ErrorKind::wrong_color:
      if (fact.observed == "absent" || fact.observed.empty())
        return "Replace the " + fact.subject + "'s color with " +
               fact.expected + ".";
      return "Replace the " + fact.observed + " " + fact.subject +
             "'s color with " + fact.expected + ".";
    case ErrorKind::wrong_count:
      return "Adjust the " + fact.subject + " count to " + fact.expected + ".";
    case ErrorKind::wrong_position: {
      // expected is "<relation> <reference-class>".
      const auto space = fact.expected.find(' ');
      const Relation rel =
          relation_from_string(fact.expected.substr(0, space));
      const std::string other = fact.expected.substr(space + 1);
      return "Reposition the " + fact.subject + " " + relation_phrase(rel) +
             " the " + other + ".";
    }
  }
  return "";
}

std::string render_instructions(const std::vector<ErrorFact>& facts) {
  if (facts.empty()) return kNoChangesText;
  std::string out;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (i) out += " ";
    out += render_instruction(facts[i]);
  }
  return out;
}

namespace {

std::vector<std::string> split_sentences(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (std::size_t i = 0; i < text.size(); ++i) {
    current += text[i];
    if (text[i] == '.' && (i + 1 == text.size() || text[i + 1] == ' ')) {
      out.push_back(current);
      current.clear();
      if (i + 1 < text.size()) ++i;  // skip the separating space
    }
  }
  if (!current.empty()) out.push_back(current);  // missing final period
  return out;
}

std::vector<std::string> words_of(std::string sentence) {
  if (!sentence.empty() && sentence.back() == '.') sentence.pop_back();
  std::vector<std::string> words;
  std::istringstream in(sentence);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::optional<ErrorFact> parse_sentence(const std::string& sentence,
                                        const Vocabulary& vocab) {
  const std::vector<std::string> w = words_of(sentence);
  if (w.empty()) return std::nullopt;

  if (w[0] == "Add" && w.size() == 3 && (w[1] == "a" || w[1] == "an") &&
      vocab.has_class(w[2]))
    return ErrorFact{ErrorKind::missing_object, w[2], "present", "absent"};

  if (w[0] == "Remove" && w.size() == 3 && w[1] == "the" &&
      vocab.has_class(w[2]))
    return ErrorFact{ErrorKind::extra_object, w[2], "absent", "present"};

  // "Replace the [observed] <class>'s color with <expected>"
  if (w[0] == "Replace" && w.size() >= 6 && w[1] == "the") {
    const std::size_t n = w.size();
    if (w[n - 2] != "with" || w[n - 3] != "color") return std::nullopt;
    const std::string expected = w[n - 1];
    if (!vocab.has_color(expected)) return std::nullopt;
    std::string possessive;  // "<class>'s"
    std::string observed = "absent";
    if (n == 6) {
      possessive = w[2];
    } else if (n == 7 && vocab.has_color(w[2])) {
      observed = w[2];
      possessive = w[3];
    } else {
      return std::nullopt;
    }
    if (possessive.size() < 3 ||
        possessive.compare(possessive.size() - 2, 2, "'s") != 0)
      return std::nullopt;
    const std::string cls = possessive.substr(0, possessive.size() - 2);
    if (!vocab.has_class(cls)) return std::nullopt;
    return ErrorFact{ErrorKind::wrong_color, cls, expected, observed};
  }

  // "Adjust the <class> count to <n>"
  if (w[0] == "Adjust" && w.size() == 6 && w[1] == "the" && w[3] == "count" &&
      w[4] == "to" && vocab.has_class(w[2])) {
    for (const char c : w[5])
      if (c < '0' || c > '9') return std::nullopt;
    return ErrorFact{ErrorKind::wrong_count, w[2], w[5], "unspecified"};
  }

  // "Reposition the <class> <relation phrase> the <class>"
  if (w[0] == "Reposition" && w.size() >= 5 && w[1] == "the" &&
      vocab.has_class(w[2])) {
    std::string tail;
    for (std::size_t i = 3; i < w.size(); ++i) {
      if (i > 3) tail += " ";
      tail += w[i];
    }
    for (int r = 0; r < 4; ++r) {
      const Relation rel = static_cast<Relation>(r);
      const std::string want = relation_phrase(rel) + " the ";
      if (tail.rfind(want, 0) == 0) {
        const std::string other = tail.substr(want.size());
        if (!vocab.has_class(other)) return std::nullopt;
        return ErrorFact{ErrorKind::wrong_position, w[2],
                         std::string(to_string(rel)) + " " + other,
                         "unspecified"};
      }
    }
    return std::nullopt;
  }

  return std::nullopt;
}

}  // namespace

std::optional<std::vector<ErrorFact>> parse_instructions(
    const std::string& text, const Vocabulary& vocab) {
  if (text == kNoChangesText) return std::vector<ErrorFact>{};
  std::vector<ErrorFact> facts;
  for (const std::string& sentence : split_sentences(text)) {
    auto fact = parse_sentence(sentence, vocab);
    if (!fact) return std::nullopt;
    facts.push_back(std::move(*fact));
  }
  if (facts.empty()) return std::nullopt;
  return facts;
}

}  // namespace rflow
