#include <doctest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "silfid/error.hpp"
#include "silfid/finetune.hpp"
#include "test_support.hpp"

using namespace silfid;
using silfid::testing::binary_question;
using silfid::testing::make_profile;
using silfid::testing::multi_question;

namespace {

RawResponse resp(std::string r, std::string q, std::vector<Selection> s) {
  return {std::move(r), std::move(q), std::move(s)};
}

QuestionCatalog catalog() {
  return QuestionCatalog({binary_question("mind", "physicalism", "non-physicalism"),
                          multi_question("ethics", {"deon", "cons", "virtue"})});
}

// Scalar reference: -log(1 / (1 + exp(-z))).
double dpo_reference(double lw, double ll, double lw_ref, double ll_ref, double beta) {
  const double z = beta * ((lw - lw_ref) - (ll - ll_ref));
  return -std::log(1.0 / (1.0 + std::exp(-z)));
}

}  // namespace

TEST_CASE("stance inversion") {
  for (int level : kAllStanceLevels) {
    const auto inv = invert_stance(StanceCode(level));
    if (level == 0) {
      CHECK_FALSE(inv.has_value());
    } else {
      CHECK(inv->level() == -level);
    }
  }
}

TEST_CASE("preference pairs flip stances and skip agnostic answers") {
  const std::vector<Profile> profiles{make_profile("r1", "Uni A"), make_profile("r2", "Uni B")};
  const std::vector<RawResponse> raw{
      resp("r2", "mind", {{StanceCode::accept(), "physicalism"}}),
      resp("r1", "ethics", {{StanceCode::lean_toward(), "virtue"}, {StanceCode::agnostic(), "deon"}}),
      resp("r1", "mind", {{StanceCode::agnostic(), "physicalism"}}),
      resp("r3", "mind", {{StanceCode::accept(), "physicalism"}}),
      resp("r1", "gone", {{StanceCode::accept(), "x"}}),
  };
  const auto set = build_preference_pairs(raw, profiles, catalog());
  REQUIRE(set.pairs.size() == 2);
  CHECK(set.pairs[0].respondent_id == "r1");
  CHECK(set.pairs[0].question_id == "ethics");
  CHECK(set.pairs[0].chosen == R"(["Lean towards: virtue","Agnostic: deon"])");
  CHECK(set.pairs[0].rejected == R"(["Lean against: virtue"])");
  CHECK(set.pairs[1].rejected == R"(["Reject: physicalism"])");
  CHECK(set.pairs[1].prompt.rfind("You are a professional philosopher at Uni B", 0) == 0);
  CHECK(set.pairs[1].prompt.find("\n\nYou are answering a survey") != std::string::npos);
  CHECK(set.skipped_agnostic == 1);
  CHECK(set.skipped_no_profile == 1);
  CHECK(set.skipped_unknown_question == 1);
}

TEST_CASE("complement mode moves lean selections on binary questions") {
  const std::vector<Profile> profiles{make_profile("r1")};
  const std::vector<RawResponse> raw{
      resp("r1", "mind", {{StanceCode::lean_toward(), "physicalism"},
                          {StanceCode::reject(), "non-physicalism"}}),
      resp("r1", "ethics", {{StanceCode::lean_against(), "cons"}}),
  };
  PreferenceOptions o;
  o.mode = RejectedMode::complement_option;
  o.variant = PromptVariant::direct;
  const auto set = build_preference_pairs(raw, profiles, catalog(), o);
  REQUIRE(set.pairs.size() == 2);
  // ethics is not binary: plain flip.
  CHECK(set.pairs[0].rejected == R"(["Lean towards: cons"])");
  CHECK(set.pairs[1].rejected == R"(["Lean towards: non-physicalism","Accept: non-physicalism"])");
  CHECK(set.pairs[1].prompt.find("Based on your philosophical expertise") != std::string::npos);
  CHECK(rejected_mode_from_string("complement_option") == RejectedMode::complement_option);
  CHECK_THROWS_AS(rejected_mode_from_string("other"), InputError);
}

TEST_CASE("profiles that cannot be rendered are counted, not exported") {
  Profile bare;
  bare.respondent_id = "r1";
  const auto set = build_preference_pairs({resp("r1", "mind", {{StanceCode::accept(), "physicalism"}})},
                                          {bare}, catalog());
  CHECK(set.pairs.empty());
  CHECK(set.skipped_incomplete_profile == 1);
}

TEST_CASE("exports are one JSON object per line") {
  const std::vector<Profile> profiles{make_profile("r1")};
  const auto set = build_preference_pairs(
      {resp("r1", "mind", {{StanceCode::accept(), "physicalism"}}),
       resp("r1", "ethics", {{StanceCode::reject(), "deon"}})},
      profiles, catalog());
  std::istringstream pref(preference_jsonl(set));
  std::size_t n = 0;
  for (std::string line; std::getline(pref, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("prompt"));
    CHECK(j.contains("chosen"));
    CHECK(j.contains("rejected"));
  }
  CHECK(n == 2);
  const auto sft = nlohmann::json::parse(supervised_jsonl(set).substr(0, supervised_jsonl(set).find('\n')));
  CHECK(sft["completion"] == set.pairs[0].chosen);
  const auto manifest = nlohmann::json::parse(preference_manifest_json(set));
  CHECK(manifest["pairs"] == 2);
  CHECK(manifest["per_respondent"]["r1"] == 2);
  CHECK(manifest["rejected_mode"] == "same_option");
}

TEST_CASE("DPO loss closed forms and stability") {
  CHECK(std::abs(dpo_loss({-1, -1, -1, -1, 0.1}) - std::log(2.0)) < 1e-9);
  for (double lw : {-0.5, -3.0, -10.0}) {
    for (double ll : {-0.2, -4.0}) {
      CHECK(dpo_loss({lw, ll, -2.0, -1.0, 0.5}) ==
            doctest::Approx(dpo_reference(lw, ll, -2.0, -1.0, 0.5)).epsilon(1e-12));
    }
  }
  // Huge margins: the naive formula overflows, the loss must not.
  const double big = dpo_loss({0, -1e6, -1e6, 0, 1.0});
  CHECK(big >= 0.0);
  CHECK(big < 1e-12);
  CHECK(dpo_loss({-1e6, 0, 0, -1e6, 1.0}) == doctest::Approx(2e6));
  CHECK_THROWS_AS(dpo_loss({0.1, -1, -1, -1, 0.1}), InputError);
  CHECK_THROWS_AS(dpo_loss({-1, -1, -1, -1, 0.0}), InputError);
}
