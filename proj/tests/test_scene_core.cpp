// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rflow/reflection_text.hpp"
#include "rflow/rule_verify.hpp"
#include "testutil.hpp"

using namespace rflow;

namespace {

const Vocabulary& vocab() {
  static const Vocabulary v = Vocabulary::defaults();
  return v;
}

SceneObject obj(const std::string& cls, const std::string& color, double cx,
                double cy, int z = 0) {
  SceneObject o;
  o.cls = cls;
  o.color = color;
  o.bbox = {cx - 0.1, cy - 0.1, cx + 0.1, cy + 0.1};
  o.z = z;
  return o;
}

StructuredPrompt counting_prompt(const std::string& cls, int count,
                                 std::optional<std::string> color = {}) {
  StructuredPrompt p;
  p.id = "t-counting";
  p.category = Category::counting;
  p.objects = {ObjectSpec{cls, std::move(color), count, std::nullopt}};
  return p;
}

}  // namespace

TEST_CASE("verify_rule: wrong count is flagged, over- and under-count alike") {
  const StructuredPrompt p = counting_prompt("pencil", 4);
  SceneGraph scene;
  for (int i = 0; i < 6; ++i)
    scene.objects.push_back(obj("pencil", "red", 0.1 + 0.12 * i, 0.5, i));

  const RuleVerdict v = verify_rule(p, scene, vocab());
  REQUIRE(v.errors.size() == 1);
  CHECK(v.errors[0].kind == ErrorKind::wrong_count);
  CHECK(v.errors[0].subject == "pencil");
  CHECK(v.errors[0].expected == "4");
  CHECK(v.errors[0].observed == "6");
  CHECK_FALSE(v.pass);

  // Under-count fails the same unit.
  SceneGraph two;
  two.objects = {obj("pencil", "red", 0.2, 0.5, 0),
                 obj("pencil", "red", 0.5, 0.5, 1)};
  const RuleVerdict v2 = verify_rule(p, two, vocab());
  REQUIRE(v2.errors.size() == 1);
  CHECK(v2.errors[0].kind == ErrorKind::wrong_count);
}

TEST_CASE("verify_rule: exact realization scores 1.0 with no errors") {
  StructuredPrompt p;
  p.id = "t-exact";
  p.category = Category::color_attribution;
  p.objects = {ObjectSpec{"cube", "red", 1, std::nullopt},
               ObjectSpec{"ball", "blue", 1, std::nullopt}};
  SceneGraph scene;
  scene.objects = {obj("cube", "red", 0.3, 0.5, 0),
                   obj("ball", "blue", 0.7, 0.5, 1)};
  const RuleVerdict v = verify_rule(p, scene, vocab());
  CHECK(v.score == 1.0);
  CHECK(v.pass);
  CHECK(v.errors.empty());
}

TEST_CASE("verify_rule: wrong color costs exactly its rubric unit") {
  // two objects with colors: 2 presence + 2 color units; one bad color.
  StructuredPrompt p;
  p.id = "t-twocolor";
  p.category = Category::two_objects;
  p.objects = {ObjectSpec{"blanket", "white", 1, std::nullopt},
               ObjectSpec{"spoon", "red", 1, std::nullopt}};
  SceneGraph scene;
  scene.objects = {obj("blanket", "white", 0.3, 0.5, 0),
                   obj("spoon", "blue", 0.7, 0.5, 1)};
  const RuleVerdict v = verify_rule(p, scene, vocab());
  CHECK(v.score == doctest::Approx(0.75));
  REQUIRE(v.errors.size() == 1);
  CHECK(v.errors[0].kind == ErrorKind::wrong_color);
  CHECK(v.errors[0].subject == "spoon");
  CHECK(v.errors[0].expected == "red");
  CHECK(v.errors[0].observed == "blue");
}

TEST_CASE("verify_rule: vocabulary-violating prompt raises, never scores 0") {
  StructuredPrompt p;
  p.id = "t-bad";
  p.category = Category::single_object;
  p.objects = {ObjectSpec{"unicorn", std::nullopt, 1, std::nullopt}};
  SceneGraph scene;
  CHECK_THROWS_AS(verify_rule(p, scene, vocab()), InvalidInputError);
}

TEST_CASE("verify_rule: relation ties are wrong_position") {
  StructuredPrompt p;
  p.id = "t-tie";
  p.category = Category::position;
  p.objects = {ObjectSpec{"cube", std::nullopt, 1, RelationSpec{1, Relation::left_of}},
               ObjectSpec{"ball", std::nullopt, 1, std::nullopt}};
  SceneGraph scene;
  scene.objects = {obj("cube", "red", 0.5, 0.3, 0),
                   obj("ball", "blue", 0.5, 0.7, 1)};
  const RuleVerdict v = verify_rule(p, scene, vocab());
  REQUIRE(v.errors.size() == 1);
  CHECK(v.errors[0].kind == ErrorKind::wrong_position);
  CHECK(v.errors[0].observed == "tie");
}

TEST_CASE("verify_rule: extra objects only constrain single_object/counting") {
  SceneGraph scene;
  scene.objects = {obj("cube", "red", 0.3, 0.5, 0),
                   obj("dog", "white", 0.7, 0.5, 1)};

  StructuredPrompt single;
  single.id = "t-extra";
  single.category = Category::single_object;
  single.objects = {ObjectSpec{"cube", std::nullopt, 1, std::nullopt}};
  const RuleVerdict v = verify_rule(single, scene, vocab());
  REQUIRE(v.errors.size() == 1);
  CHECK(v.errors[0].kind == ErrorKind::extra_object);
  CHECK(v.errors[0].subject == "dog");
  CHECK(v.score == 0.0);  // one extra error against one rubric unit

  StructuredPrompt two;
  two.id = "t-extra2";
  two.category = Category::two_objects;
  two.objects = {ObjectSpec{"cube", std::nullopt, 1, std::nullopt},
                 ObjectSpec{"dog", std::nullopt, 1, std::nullopt}};
  CHECK(verify_rule(two, scene, vocab()).pass);
}

TEST_CASE("prompt_difficulty: pass fraction, exact k/n values") {
  const auto mk = [](bool pass) {
    RuleVerdict v;
    v.pass = pass;
    v.score = pass ? 1.0 : 0.0;
    return v;
  };
  std::vector<RuleVerdict> verdicts;
  for (int i = 0; i < 10; ++i) verdicts.push_back(mk(i < 3));
  CHECK(prompt_difficulty(verdicts) == doctest::Approx(0.3));

  std::vector<RuleVerdict> all_pass(4, mk(true));
  CHECK(prompt_difficulty(all_pass) == 1.0);

  std::vector<RuleVerdict> two_of_ten;
  for (int i = 0; i < 10; ++i) two_of_ten.push_back(mk(i < 2));
  const double d = prompt_difficulty(two_of_ten);
  CHECK(d == doctest::Approx(0.2));
  CHECK(d <= 0.3);  // the hard bin

  CHECK_THROWS_AS(prompt_difficulty(std::vector<RuleVerdict>{}),
                  InvalidInputError);
}

TEST_CASE("render_prompt_text: counting with wildcard color") {
  const StructuredPrompt p = counting_prompt("pencil", 4, "colored");
  CHECK(render_prompt_text(p, true) == "a photo of four colored pencils");
}

TEST_CASE("render_prompt_text: specificity 1.0 renders identically") {
  Rng rng(99);
  for (int i = 0; i < 50; ++i) {
    StructuredPrompt p = testutil::random_prompt(rng, vocab());
    p.specificity = 1.0;
    CHECK(render_prompt_text(p, true) == render_prompt_text(p, false));
  }
}

TEST_CASE("render_prompt_text: zero specificity drops colors and relation") {
  StructuredPrompt p;
  p.id = "t-drop";
  p.category = Category::position;
  p.objects = {ObjectSpec{"cube", "red", 1, RelationSpec{1, Relation::left_of}},
               ObjectSpec{"ball", "blue", 1, std::nullopt}};
  p.specificity = 0.0;
  CHECK(render_prompt_text(p, false) == "a photo of a cube and a ball");
  CHECK(render_prompt_text(p, true) ==
        "a photo of a red cube to the left of a blue ball");
}

TEST_CASE("parse_prompt_text inverts the renderer on full prompts") {
  Rng rng(123);
  for (int i = 0; i < 100; ++i) {
    StructuredPrompt p = testutil::random_prompt(rng, vocab());
    p.specificity = 1.0;
    const std::string text = render_prompt_text(p, true);
    const StructuredPrompt parsed = parse_prompt_text(text, vocab());
    CHECK(parsed.category == p.category);
    REQUIRE(parsed.objects.size() == p.objects.size());
    for (std::size_t k = 0; k < p.objects.size(); ++k) {
      CHECK(parsed.objects[k].cls == p.objects[k].cls);
      CHECK(parsed.objects[k].count == p.objects[k].count);
    }
    CHECK(render_prompt_text(parsed, true) == text);
  }
}

TEST_CASE("canonical serialization: round trip and order-insensitive hash") {
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const SceneGraph scene = testutil::random_scene(rng, vocab());
    const std::string bytes = canonical_serialize(scene);
    const SceneGraph parsed = scene_from_text(bytes);
    CHECK(canonical_serialize(parsed) == bytes);
  }

  SceneGraph a;
  a.objects = {obj("cube", "red", 0.3, 0.5, 0), obj("ball", "blue", 0.7, 0.5, 0)};
  SceneGraph b;
  b.objects = {obj("ball", "blue", 0.7, 0.5, 0), obj("cube", "red", 0.3, 0.5, 0)};
  CHECK(content_hash(a) == content_hash(b));
}

TEST_CASE("content_hash: golden value of the empty scene") {
  const SceneGraph empty;
  // Pinned at first implementation; a change here is a canonical-format
  // break.
  CHECK(canonical_serialize(empty) ==
        R"({"objects":[],"quality":1,"seed_provenance":{"run_seed":"0","chain":-1,"iteration":-1,"role":""}})");
  CHECK(content_hash(empty).hex() == "38979c7a7f5968a5");
}

TEST_CASE("verify_rule is pure: repeated calls agree") {
  Rng rng(17);
  const StructuredPrompt p = testutil::random_prompt(rng, vocab());
  const SceneGraph scene = testutil::random_scene(rng, vocab());
  const RuleVerdict first = verify_rule(p, scene, vocab());
  for (int i = 0; i < 10'000; ++i) {
    const RuleVerdict v = verify_rule(p, scene, vocab());
    REQUIRE(v.score == first.score);
    REQUIRE(v.errors.size() == first.errors.size());
  }
}

TEST_CASE("property: score==1 iff errors empty, and oracle equivalence") {
  Rng rng(31);
  for (int i = 0; i < 2'000; ++i) {
    const StructuredPrompt p = testutil::random_prompt(rng, vocab());
    const SceneGraph scene = testutil::random_scene(rng, vocab());
    const RuleVerdict v = verify_rule(p, scene, vocab());
    CHECK((v.score == 1.0) == v.errors.empty());
    CHECK(v.pass == v.errors.empty());

    const testutil::OracleVerdict o =
        testutil::brute_force_rubric(p, scene, vocab());
    CHECK(v.score == doctest::Approx(o.score).epsilon(1e-12));
    CHECK(v.pass == o.pass);
    CHECK(testutil::error_multiset(v) == o.errors);
  }
}

TEST_CASE("property: fixing one error's cause never decreases the score") {
  Rng rng(47);
  int applied = 0;
  for (int i = 0; i < 2'000; ++i) {
    const StructuredPrompt p = testutil::random_prompt(rng, vocab());
    SceneGraph scene = testutil::random_scene(rng, vocab());
    const RuleVerdict before = verify_rule(p, scene, vocab());
    if (before.errors.empty()) continue;
    const ErrorFact& e =
        before.errors[rng.next_below(before.errors.size())];

    // Independent, minimal cause removal per kind.
    switch (e.kind) {
      case ErrorKind::wrong_color: {
        for (SceneObject& o : scene.objects)
          if (o.cls == e.subject) o.color = e.expected;
        break;
      }
      case ErrorKind::missing_object: {
        SceneObject o;
        o.cls = e.subject;
        o.color = vocab().colors[0];
        o.bbox = {0.4, 0.4, 0.6, 0.6};
        o.z = 99;
        scene.objects.push_back(o);
        break;
      }
      case ErrorKind::extra_object: {
        std::erase_if(scene.objects, [&](const SceneObject& o) {
          return o.cls == e.subject;
        });
        break;
      }
      case ErrorKind::wrong_count: {
        const int target = std::stoi(e.expected);
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < scene.objects.size(); ++k)
          if (scene.objects[k].cls == e.subject) idx.push_back(k);
        while (static_cast<int>(idx.size()) > target) {
          scene.objects.erase(scene.objects.begin() +
                              static_cast<std::ptrdiff_t>(idx.back()));
          idx.pop_back();
        }
        while (static_cast<int>(idx.size()) < target) {
          SceneObject o;
          o.cls = e.subject;
          o.color = idx.empty() ? vocab().colors[0]
                                : scene.objects[idx.front()].color;
          o.bbox = {0.4, 0.4, 0.6, 0.6};
          o.z = 100 + static_cast<int>(idx.size());
          scene.objects.push_back(o);
          idx.push_back(scene.objects.size() - 1);
        }
        break;
      }
      case ErrorKind::wrong_position: {
        const auto space = e.expected.find(' ');
        const Relation rel = relation_from_string(e.expected.substr(0, space));
        const std::string other = e.expected.substr(space + 1);
        const SceneObject* ref = nullptr;
        for (const SceneObject& o : scene.objects)
          if (o.cls == other) ref = &o;
        if (!ref) continue;  // reference missing; a different unit covers it
        const double rx = (ref->bbox[0] + ref->bbox[2]) / 2;
        const double ry = (ref->bbox[1] + ref->bbox[3]) / 2;
        for (SceneObject& o : scene.objects) {
          if (o.cls != e.subject) continue;
          double cx = rx, cy = ry;
          switch (rel) {
            case Relation::left_of: cx = std::max(0.1, rx - 0.25); break;
            case Relation::right_of: cx = std::min(0.9, rx + 0.25); break;
            case Relation::above: cy = std::max(0.1, ry - 0.25); break;
            case Relation::below: cy = std::min(0.9, ry + 0.25); break;
          }
          o.bbox = {cx - 0.1, cy - 0.1, cx + 0.1, cy + 0.1};
        }
        break;
      }
    }
    const RuleVerdict after = verify_rule(p, scene, vocab());
    CHECK(after.score >= before.score - 1e-12);
    ++applied;
  }
  CHECK(applied > 500);  // the property actually exercised
}

TEST_CASE("difficulty binning covers every tenth with no gaps") {
  // All multiples of 0.1 land in [0,0.3], [0.4,0.7] or [0.8,1.0].
  for (int k = 0; k <= 10; ++k) {
    const double d = k / 10.0;
    const bool hard = d <= 0.3;
    const bool medium = d >= 0.4 && d <= 0.7;
    const bool easy = d >= 0.8;
    CHECK((hard || medium || easy));
  }
}

TEST_CASE("instruction grammar: render and parse are inverses") {
  const ErrorFact color{ErrorKind::wrong_color, "spoon", "red", "blue"};
  CHECK(render_instruction(color) ==
        "Replace the blue spoon's color with red.");

  Rng rng(53);
  for (int i = 0; i < 500; ++i) {
    const StructuredPrompt p = testutil::random_prompt(rng, vocab());
    const SceneGraph scene = testutil::random_scene(rng, vocab());
    const RuleVerdict v = verify_rule(p, scene, vocab());
    const std::string text = render_instructions(v.errors);
    const auto parsed = parse_instructions(text, vocab());
    REQUIRE(parsed.has_value());
    CHECK(render_instructions(*parsed) == text);
    REQUIRE(parsed->size() == v.errors.size());
    for (std::size_t k = 0; k < v.errors.size(); ++k) {
      CHECK((*parsed)[k].kind == v.errors[k].kind);
      CHECK((*parsed)[k].subject == v.errors[k].subject);
      CHECK((*parsed)[k].expected == v.errors[k].expected);
    }
  }

  CHECK(parse_instructions("Please make it nicer.", vocab()) == std::nullopt);
  const auto none = parse_instructions(kNoChangesText, vocab());
  REQUIRE(none.has_value());
  CHECK(none->empty());
}
