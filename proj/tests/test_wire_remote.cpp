// Copyright (C) 2026 The reflectionflow authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "rflow/remote_backend.hpp"
#include "rflow/sim_backend.hpp"
#include "rflow/wire.hpp"
#include "testutil.hpp"

using namespace rflow;

#ifndef RFLOW_FIXTURES_DIR
#define RFLOW_FIXTURES_DIR "tests/fixtures"
#endif

namespace {

const Vocabulary& vocab() {
  static const Vocabulary v = Vocabulary::defaults();
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fixture(const std::string& name) {
  return read_file(std::string(RFLOW_FIXTURES_DIR) + "/wire/" + name);
}

// Serves the five endpoints by delegating to simulated backends. Covers the
// full client -> wire -> server -> wire -> client loop on a real socket.
class MockServer {
 public:
  explicit MockServer(const SimConfig& cfg)
      : gen_(cfg), cor_(cfg), refl_(cfg), ver_(cfg), refine_(cfg) {
    server_.Post(wire::kGeneratePath, [this](const httplib::Request& req,
                                             httplib::Response& res) {
      const auto r = wire::decode_generate_request(req.body);
      res.set_content(wire::encode_generate_response(gen_.generate(
                          r.prompt_text, r.structured_prompt, r.seed)),
                      "application/json");
    });
    server_.Post(wire::kCorrectPath, [this](const httplib::Request& req,
                                            httplib::Response& res) {
      const auto r = wire::decode_correct_request(req.body);
      res.set_content(
          wire::encode_correct_response(cor_.correct(
              r.original_prompt, r.refined_prompt, r.reflection,
              r.flawed_scene, r.seed)),
          "application/json");
    });
    server_.Post(wire::kReflectPath, [this](const httplib::Request& req,
                                            httplib::Response& res) {
      const auto r = wire::decode_reflect_request(req.body);
      res.set_content(wire::encode_reflect_response(refl_.reflect(
                          r.structured_prompt, r.scene, r.report)),
                      "application/json");
    });
    server_.Post(wire::kVerifyPath, [this](const httplib::Request& req,
                                           httplib::Response& res) {
      const auto r = wire::decode_verify_request(req.body);
      last_verify_template = r.template_text;
      res.set_content(
          wire::encode_verify_response(
              ver_.verify(r.structured_prompt, r.scene),
              r.structured_prompt.category),
          "application/json");
    });
    server_.Post(wire::kRefinePromptPath, [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      const auto r = wire::decode_refine_prompt_request(req.body);
      SimConfig cfg;
      cfg.vocab = vocab();
      SimPromptRefiner refiner(cfg);
      RefineContext ctx;
      ctx.original_prompt = r.original_prompt;
      ctx.current_prompt = r.current_prompt;
      ctx.structured = r.structured_prompt;
      ctx.scenes = r.scenes;
      ctx.reports = r.reports;
      ctx.reflection = r.reflection;
      res.set_content(
          wire::encode_refine_prompt_response(refiner.refine(ctx).text),
          "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockServer() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::string last_verify_template;

 private:
  SimGenerator gen_;
  SimCorrector cor_;
  SimReflector refl_;
  SimVerifier ver_;
  SimPromptRefiner refine_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

SimConfig sim_cfg() {
  SimConfig cfg;
  cfg.error_model = ErrorModel::defaults();
  cfg.vocab = vocab();
  return cfg;
}

RemoteConfig remote_cfg(const std::string& url) {
  RemoteConfig rc;
  rc.base_url = url;
  rc.timeout_ms = 5000;
  rc.backoff_base_ms = 1;
  return rc;
}

}  // namespace

TEST_CASE("golden fixtures: encode(decode(x)) == x byte-exact, all five") {
  const std::string gen = fixture("generate_request.json");
  CHECK(wire::encode_generate_request(wire::decode_generate_request(gen)) ==
        gen);

  const std::string cor = fixture("correct_request.json");
  CHECK(wire::encode_correct_request(wire::decode_correct_request(cor)) == cor);

  const std::string refl = fixture("reflect_request.json");
  CHECK(wire::encode_reflect_request(wire::decode_reflect_request(refl)) ==
        refl);

  const std::string ver = fixture("verify_request.json");
  CHECK(wire::encode_verify_request(wire::decode_verify_request(ver)) == ver);

  const std::string refine = fixture("refine_prompt_request.json");
  CHECK(wire::encode_refine_prompt_request(
            wire::decode_refine_prompt_request(refine)) == refine);
}

TEST_CASE("golden verifier response: single-object aspect keys round trip") {
  const std::string body = fixture("verify_response_single_object.json");
  const VerifierReport report =
      wire::decode_verify_response(body, Category::single_object);
  CHECK(report.aspect_scores.at("object_completeness") == 8.0);
  CHECK(report.aspect_scores.at("detectability") == 9.0);
  CHECK(report.aspect_scores.at("occlusion_handling") == 10.0);
  CHECK(report.overall_score == 9.0);
  CHECK(wire::encode_verify_response(report, Category::single_object) == body);
}

TEST_CASE("decode ignores unknown fields but is strict on required ones") {
  const std::string gen = fixture("generate_request.json");
  Json j = parse_json(gen, "fixture");
  j["future_extension"] = {{"nested", true}};
  CHECK_NOTHROW(wire::decode_generate_request(j.dump()));

  Json missing = parse_json(gen, "fixture");
  missing.erase("seed");
  CHECK_THROWS_WITH_AS(wire::decode_generate_request(missing.dump()),
                       doctest::Contains("generate_request.seed"),
                       SchemaError);
}

TEST_CASE("verify response missing overall_score names the path") {
  try {
    wire::decode_verify_response(
        R"({"object_completeness":8,"detectability":9,"occlusion_handling":10})",
        Category::single_object);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.field_path() == "verify_response.overall_score");
    CHECK(!e.raw_payload().empty());
  }
}

TEST_CASE("verify response rejects out-of-range scores") {
  CHECK_THROWS_AS(
      wire::decode_verify_response(
          R"({"object_completeness":8,"detectability":9,"occlusion_handling":10,"overall_score":11})",
          Category::single_object),
      SchemaError);
}

TEST_CASE("refine response strips whitespace and rejects empty text") {
  CHECK(wire::decode_refine_prompt_response(
            R"({"v":1,"refined_prompt":"  a photo of a red cube \n"})") ==
        "a photo of a red cube");
  CHECK_THROWS_AS(wire::decode_refine_prompt_response(
                      R"({"v":1,"refined_prompt":"   "})"),
                  SchemaError);
}

TEST_CASE("remote bundle over a live socket matches the local simulation") {
  MockServer server(sim_cfg());
  const RemoteConfig rc = remote_cfg(server.url());

  RemoteGenerator rgen(rc);
  RemoteCorrector rcor(rc);
  RemoteReflector rrefl(rc);
  PromptTemplates templates;
  for (int c = 0; c < 6; ++c) templates.verifier[c] = "template-" + std::to_string(c);
  templates.refine_prompt = "refine-template";
  RemoteVerifier rver(rc, templates);
  RemotePromptRefiner rrefine(rc, templates);

  SimGenerator lgen(sim_cfg());
  SimCorrector lcor(sim_cfg());
  SimReflector lrefl(sim_cfg());
  SimVerifier lver(sim_cfg());

  Rng rng(71);
  for (int i = 0; i < 20; ++i) {
    const StructuredPrompt p = testutil::random_prompt(rng, vocab());
    const std::string text = render_prompt_text(p, false);
    const std::uint64_t seed = rng.next_u64();

    const SceneGraph remote_scene = rgen.generate(text, p, seed);
    const SceneGraph local_scene = lgen.generate(text, p, seed);
    CHECK(content_hash(remote_scene) == content_hash(local_scene));

    const VerifierReport remote_report = rver.verify(p, remote_scene);
    const VerifierReport local_report = lver.verify(p, local_scene);
    CHECK(remote_report.overall_score ==
          doctest::Approx(local_report.overall_score));

    const Reflection remote_refl = rrefl.reflect(p, remote_scene, remote_report);
    const Reflection local_refl = lrefl.reflect(p, local_scene, local_report);
    CHECK(remote_refl.text == local_refl.text);

    const SceneGraph remote_fix =
        rcor.correct(text, text, remote_refl, remote_scene, seed + 1);
    const SceneGraph local_fix =
        lcor.correct(text, text, local_refl, local_scene, seed + 1);
    CHECK(content_hash(remote_fix) == content_hash(local_fix));
  }

  // The verifier request carried the category template text.
  CHECK(!server.last_verify_template.empty());

  // Remote refiner returns the model text verbatim.
  StructuredPrompt p = testutil::random_prompt(rng, vocab());
  p.specificity = 0.0;
  RefineContext ctx;
  ctx.original_prompt = render_prompt_text(p, false);
  ctx.current_prompt = ctx.original_prompt;
  ctx.structured = p;
  SimGenerator lgen2(sim_cfg());
  ctx.scenes = {lgen2.generate(ctx.current_prompt, p, 5)};
  ctx.reports = {lver.verify(p, ctx.scenes[0])};
  ctx.reflection = Reflection{kNoChangesText, {}};
  const RefineResult refined = rrefine.refine(ctx);
  CHECK(!refined.text.empty());
  CHECK_FALSE(refined.structured.has_value());
}

TEST_CASE("remote transport: retries transient failures, counts attempts") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post(wire::kGeneratePath,
              [&](const httplib::Request&, httplib::Response& res) {
                if (hits.fetch_add(1) < 1) {
                  res.status = 500;
                  return;
                }
                SimGenerator gen(sim_cfg());
                const auto prompts = make_random_prompts(1, 1, vocab());
                res.set_content(wire::encode_generate_response(gen.generate(
                                    "p", prompts[0], 1)),
                                "application/json");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteConfig rc = remote_cfg("http://127.0.0.1:" + std::to_string(port));
  RemoteGenerator rgen(rc);
  const auto prompts = make_random_prompts(1, 1, vocab());
  CHECK_NOTHROW(rgen.generate("p", prompts[0], 1));
  CHECK(hits.load() == 2);  // one failure, one success

  server.stop();
  t.join();
}

TEST_CASE("remote transport: exhausted retries raise BackendError") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post(wire::kGeneratePath,
              [&](const httplib::Request&, httplib::Response& res) {
                hits.fetch_add(1);
                res.status = 503;
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteConfig rc = remote_cfg("http://127.0.0.1:" + std::to_string(port));
  rc.max_attempts = 3;
  RemoteGenerator rgen(rc);
  const auto prompts = make_random_prompts(1, 1, vocab());
  try {
    rgen.generate("p", prompts[0], 1);
    FAIL("expected BackendError");
  } catch (const BackendError& e) {
    CHECK(e.attempts() == 3);
    CHECK(e.retryable());
  }
  CHECK(hits.load() == 3);

  server.stop();
  t.join();
}

TEST_CASE("remote transport: bearer token is forwarded") {
  httplib::Server server;
  std::string seen_auth;
  server.Post(wire::kGeneratePath,
              [&](const httplib::Request& req, httplib::Response& res) {
                seen_auth = req.get_header_value("Authorization");
                SimGenerator gen(sim_cfg());
                const auto prompts = make_random_prompts(1, 1, vocab());
                res.set_content(wire::encode_generate_response(gen.generate(
                                    "p", prompts[0], 1)),
                                "application/json");
              });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RemoteConfig rc = remote_cfg("http://127.0.0.1:" + std::to_string(port));
  rc.bearer_token = "secret-token";
  RemoteGenerator rgen(rc);
  const auto prompts = make_random_prompts(1, 1, vocab());
  rgen.generate("p", prompts[0], 1);
  CHECK(seen_auth == "Bearer secret-token");

  server.stop();
  t.join();
}

TEST_CASE("property: decode-encode identity over random requests") {
  Rng rng(83);
  SimGenerator gen(sim_cfg());
  for (int i = 0; i < 100; ++i) {
    const StructuredPrompt p = testutil::random_prompt(rng, vocab());
    const std::string text = render_prompt_text(p, false);
    wire::GenerateRequest req;
    req.prompt_text = text;
    req.structured_prompt = p;
    req.seed = rng.next_u64();
    const std::string bytes = wire::encode_generate_request(req);
    CHECK(wire::encode_generate_request(wire::decode_generate_request(bytes)) ==
          bytes);

    wire::VerifyRequest vreq;
    vreq.prompt_text = text;
    vreq.structured_prompt = p;
    vreq.scene = gen.generate(text, p, rng.next_u64());
    vreq.template_text = "t";
    const std::string vbytes = wire::encode_verify_request(vreq);
    CHECK(wire::encode_verify_request(wire::decode_verify_request(vbytes)) ==
          vbytes);
  }
}
