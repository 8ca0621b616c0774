#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>

#include <json.hpp>

#include "silfid/error.hpp"
#include "silfid/ingest.hpp"
#include "silfid/prompts.hpp"
#include "silfid/response_parser.hpp"
#include "silfid/sampler.hpp"
#include "stub_chat_server.hpp"
#include "test_support.hpp"

using namespace silfid;
using silfid::testing::binary_question;
using silfid::testing::make_profile;
using silfid::testing::multi_question;

namespace {

QuestionSpec physicalism() {
  auto q = binary_question("mind", "physicalism", "non-physicalism", "Philosophy of Mind");
  q.stem = "Mind: physicalism or non-physicalism?";
  return q;
}

// Deterministic scripted transport: answer depends only on the request.
class ScriptedTransport final : public ChatTransport {
 public:
  explicit ScriptedTransport(std::function<std::string(const ChatRequest&)> f) : f_(std::move(f)) {}
  std::string complete(const ChatRequest& req) override {
    ++calls;
    return f_(req);
  }
  std::atomic<int> calls{0};

 private:
  std::function<std::string(const ChatRequest&)> f_;
};

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "silfid_sampler_test";
  std::filesystem::create_directories(dir);
  const auto p = dir / name;
  std::filesystem::remove(p);
  return p;
}

}  // namespace

TEST_CASE("persona rendering omits absent fields and truncates lists") {
  auto p = make_profile("r1", "Uni A");
  p.aos = {"a1", "a2", "a3", "a4", "a5", "a6", "a7"};
  p.aoi = {"i1", "i2", "i3", "i4", "i5", "i6", "i7", "i8", "i9"};
  const auto text = render_persona(p);
  CHECK(text.rfind("You are a professional philosopher at Uni A (United Kingdom).", 0) == 0);
  CHECK(text.find("- PhD from Example College (United States) in 1998") != std::string::npos);
  CHECK(text.find("- a5\n") != std::string::npos);
  CHECK(text.find("- a6\n") == std::string::npos);
  CHECK(text.find("- i8\n") != std::string::npos);
  CHECK(text.find("- i9\n") == std::string::npos);

  Profile bare;
  bare.respondent_id = "r2";
  bare.aoi = {"Logic"};
  const auto b = render_persona(bare);
  CHECK(b.find("PhD") == std::string::npos);
  CHECK(b.find("Specialization") == std::string::npos);
  CHECK(b.find("- Logic\n") != std::string::npos);

  Profile empty;
  empty.respondent_id = "r3";
  CHECK_THROWS_AS(render_persona(empty), InputError);
}

TEST_CASE("question prompts list options and differ only in framing") {
  const auto q = physicalism();
  const auto base = render_question_prompt(q, PromptVariant::baseline);
  const auto direct = render_question_prompt(q, PromptVariant::direct);
  CHECK(base.find("PhilPapers") != std::string::npos);
  CHECK(direct.find("PhilPapers") == std::string::npos);
  for (const auto* t : {&base, &direct}) {
    CHECK(t->find("Question: Mind: physicalism or non-physicalism?\n") != std::string::npos);
    CHECK(t->find("- physicalism\n- non-physicalism\n") != std::string::npos);
    CHECK(t->find("JSON list") != std::string::npos);
  }
  auto one = q;
  one.options = {"only"};
  CHECK_THROWS_AS(render_question_prompt(one, PromptVariant::baseline), InputError);
  CHECK(prompt_variant_from_string("direct") == PromptVariant::direct);
  CHECK_THROWS_AS(prompt_variant_from_string("friendly"), InputError);
}

TEST_CASE("serialized stances parse back to the same selections") {
  const auto q = physicalism();
  const std::vector<Selection> s{{StanceCode::lean_toward(), "physicalism"},
                                 {StanceCode::lean_against(), "non-physicalism"}};
  const auto text = serialize_stances(s);
  CHECK(text == R"(["Lean towards: physicalism","Lean against: non-physicalism"])");
  const auto out = parse_response(text, q);
  CHECK(out.status == ParseStatus::parsed);
  CHECK(out.stances == s);
}

TEST_CASE("parser classifies each failure mode") {
  const auto q = physicalism();
  const auto status = [&](std::string_view t) { return parse_response(t, q).status; };
  CHECK(status("Sure! [\"Accept: Physicalism\"] hope that helps") == ParseStatus::parsed);
  CHECK(parse_response("[\"accept:   PHYSICALISM \"]", q).stances[0].option == "physicalism");
  CHECK(status("[\"Accept: dualism\"]") == ParseStatus::invalid_option);
  CHECK(status("[\"Strongly accept: physicalism\"]") == ParseStatus::invalid_option);
  CHECK(status("[\"physicalism\"]") == ParseStatus::invalid_option);
  CHECK(status("[\"Accept: A combination of views\"]") == ParseStatus::combination_of_views);
  CHECK(status("I hold an intermediate view on this.") == ParseStatus::combination_of_views);
  CHECK(status("I cannot share personal opinions.") == ParseStatus::refusal);
  CHECK(status("physicalism, I suppose") == ParseStatus::malformed);
  CHECK(status("[\"Accept: physicalism\"") == ParseStatus::malformed);
  CHECK(status("[1, 2]") == ParseStatus::malformed);
  CHECK(status("[]") == ParseStatus::malformed);
  const auto out = parse_response("nonsense", q);
  CHECK(out.raw_text == "nonsense");
  CHECK(out.stances.empty());
}

TEST_CASE("chat request body and response extraction") {
  const auto body = nlohmann::json::parse(chat_request_body({"m", 0.7, "sys", "usr"}));
  CHECK(body["model"] == "m");
  CHECK(body["temperature"] == 0.7);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][1]["content"] == "usr");
  CHECK(chat_response_content(R"({"choices":[{"message":{"content":"hi"}}]})") == "hi");
  CHECK(chat_response_content("plain text") == "plain text");
}

TEST_CASE("sampler config validation") {
  SamplerConfig cfg;
  CHECK_THROWS_AS(validate(cfg), InputError);
  cfg.endpoint = "http://x/v1";
  cfg.model = "m";
  CHECK_NOTHROW(validate(cfg));
  cfg.temperature = -1;
  CHECK_THROWS_AS(validate(cfg), InputError);
  cfg.temperature = 0;
  cfg.max_parallel = 0;
  CHECK_THROWS_AS(validate(cfg), InputError);
  cfg.max_parallel = 1;
  cfg.resume = true;
  CHECK_THROWS_AS(validate(cfg), InputError);
}

TEST_CASE("survey collects one ordered record per cell and tallies statuses") {
  const QuestionCatalog catalog({physicalism(), multi_question("ethics", {"deon", "cons", "virtue"})});
  const std::vector<Profile> profiles{make_profile("r1", "Uni A"), make_profile("r2", "Uni B")};
  ScriptedTransport t([](const ChatRequest& req) -> std::string {
    if (req.user.find("Question: ethics") != std::string::npos) {
      return req.system.find("Uni A") != std::string::npos ? "[\"Accept: virtue\"]"
                                                           : "A combination of views";
    }
    return "[\"Reject: physicalism\"]";
  });
  SamplerConfig cfg;
  cfg.endpoint = "stub";
  cfg.model = "m";
  cfg.max_parallel = 3;
  const auto res = run_survey(profiles, catalog, cfg, t);
  CHECK(t.calls == 4);
  CHECK(res.attempted == 4);
  REQUIRE(res.responses.size() == 3);
  CHECK(res.responses[0].respondent_id == "r1");
  CHECK(res.responses[0].question_id == "mind");
  CHECK(res.responses[1].question_id == "ethics");
  CHECK(res.responses[2].respondent_id == "r2");
  CHECK(res.stats[1].count(ParseStatus::combination_of_views) == 1);
  CHECK(res.stats[1].success_rate() == doctest::Approx(0.5));
  CHECK(res.stats[1].primary_failure() == std::optional(ParseStatus::combination_of_views));
  CHECK_FALSE(res.stats[0].primary_failure().has_value());
  CHECK(res.overall().attempted == 4);
  const auto j = nlohmann::json::parse(parse_stats_to_json(res));
  CHECK(j["overall"]["counts"]["parsed"] == 3);
}

TEST_CASE("transport failures are retried, then abort with partial results") {
  const QuestionCatalog catalog({physicalism()});
  const std::vector<Profile> profiles{make_profile("r1", "Uni A"), make_profile("r2", "Uni B")};
  std::mutex mu;
  std::map<std::string, int> attempts;
  ScriptedTransport flaky([&](const ChatRequest& req) -> std::string {
    std::lock_guard lock(mu);
    if (++attempts[req.system] < 3) throw TransportError("try again");
    return "[\"Accept: physicalism\"]";
  });
  SamplerConfig cfg;
  cfg.endpoint = "stub";
  cfg.model = "m";
  cfg.retries = 2;
  cfg.backoff = std::chrono::milliseconds(1);
  const auto ok = run_survey(profiles, catalog, cfg, flaky);
  CHECK(ok.responses.size() == 2);
  CHECK(flaky.calls == 6);

  ScriptedTransport dead([](const ChatRequest&) -> std::string { throw TransportError("down"); });
  cfg.retries = 1;
  cfg.max_parallel = 1;
  try {
    (void)run_survey(profiles, catalog, cfg, dead);
    FAIL("expected SamplerAborted");
  } catch (const SamplerAborted& e) {
    CHECK(std::string(e.what()).find("down") != std::string::npos);
    CHECK(e.partial().responses.empty());
  }
  CHECK(dead.calls == 2);
}

TEST_CASE("checkpoint resume skips finished cells") {
  const QuestionCatalog catalog({physicalism(), multi_question("ethics", {"deon", "cons"})});
  const std::vector<Profile> profiles{make_profile("r1", "Uni A"), make_profile("r2", "Uni B")};
  const auto ckpt = temp_file("resume.jsonl");
  SamplerConfig cfg;
  cfg.endpoint = "stub";
  cfg.model = "m";
  cfg.checkpoint = ckpt;
  cfg.max_parallel = 1;

  // First run dies on r2's second question.
  ScriptedTransport first([](const ChatRequest& req) -> std::string {
    if (req.system.find("Uni B") != std::string::npos &&
        req.user.find("Question: ethics") != std::string::npos) {
      throw TransportError("boom");
    }
    return "[\"Lean towards: deon\", \"Accept: physicalism\"]";
  });
  cfg.retries = 0;
  CHECK_THROWS_AS(run_survey(profiles, catalog, cfg, first), SamplerAborted);

  ScriptedTransport second([](const ChatRequest&) -> std::string { return "[\"Reject: deon\"]"; });
  cfg.resume = true;
  const auto res = run_survey(profiles, catalog, cfg, second);
  CHECK(second.calls == 1);
  CHECK(res.resumed == 3);
  CHECK(res.attempted == 4);
  std::ifstream in(ckpt);
  std::size_t lines = 0;
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == 4);
}

TEST_CASE("HTTP transport talks to a local chat endpoint") {
  const auto q = physicalism();
  const QuestionCatalog catalog({q});
  const std::vector<Profile> profiles{make_profile("r1", "Uni A"), make_profile("r2", "Uni B")};
  silfid::testing::StubChatServer server([](const std::string& system, const std::string& user,
                                            int& status) -> std::string {
    if (silfid::testing::prompt_question(user) != "Mind: physicalism or non-physicalism?") {
      status = 400;
      return {};
    }
    return silfid::testing::persona_institution(system) == "Uni A"
               ? R"(["Accept: physicalism"])"
               : R"(["Lean against: non-physicalism"])";
  });
  ::setenv("SILFID_TEST_TOKEN", "secret", 1);
  SamplerConfig cfg;
  cfg.endpoint = server.endpoint();
  cfg.model = "stub-model";
  cfg.token_env = "SILFID_TEST_TOKEN";
  cfg.timeout = std::chrono::seconds(5);
  const auto res = run_survey(profiles, catalog, cfg);
  CHECK(server.last_authorization() == "Bearer secret");
  REQUIRE(res.responses.size() == 2);
  const auto plan = build_normalization_plan(catalog, res.responses);
  const auto m = normalize_panel(res.responses, plan, catalog, "stub").matrix;
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(1, 0) == doctest::Approx(0.75));
}

TEST_CASE("HTTP errors surface as transport failures") {
  silfid::testing::StubChatServer server([](const std::string&, const std::string&, int& status) {
    status = 503;
    return std::string();
  });
  SamplerConfig cfg;
  cfg.endpoint = server.endpoint();
  cfg.model = "m";
  HttpChatTransport t(cfg);
  CHECK_THROWS_AS(t.complete({"m", 0, "s", "u"}), TransportError);

  cfg.endpoint = "no-scheme";
  CHECK_THROWS_AS(HttpChatTransport{cfg}, InputError);
}
