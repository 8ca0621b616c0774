#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "silfid/error.hpp"
#include "silfid/ingest.hpp"
#include "silfid/io.hpp"
#include "test_support.hpp"

using namespace silfid;
using silfid::testing::binary_question;
using silfid::testing::multi_question;

namespace {

RawResponse resp(std::string r, std::string q, std::vector<Selection> s) {
  return {std::move(r), std::move(q), std::move(s)};
}

Selection sel(int level, std::string option) { return {StanceCode(level), std::move(option)}; }

QuestionCatalog small_catalog() {
  return QuestionCatalog({binary_question("free_will", "compatibilism", "libertarianism"),
                          multi_question("ethics", {"consequentialism", "deontology", "virtue"})});
}

}  // namespace

TEST_CASE("plan uses the designated option for binary questions") {
  const auto plan = build_normalization_plan(small_catalog(), {});
  const auto* e = plan.find("free_will");
  REQUIRE(e != nullptr);
  CHECK(e->is_binary);
  CHECK(e->target_option == "compatibilism");
  CHECK(e->complement_option == std::optional<std::string>("libertarianism"));
  CHECK_FALSE(e->flagged);
}

TEST_CASE("plan picks the most endorsed option for other questions") {
  const std::vector<RawResponse> raw{
      resp("a", "ethics", {sel(2, "virtue")}),
      resp("b", "ethics", {sel(1, "virtue"), sel(-2, "deontology")}),
      resp("c", "ethics", {sel(2, "deontology")}),
      resp("d", "ethics", {sel(-1, "deontology")}),
  };
  const auto plan = build_normalization_plan(small_catalog(), raw);
  const auto* e = plan.find("ethics");
  CHECK(e->target_option == "virtue");
  CHECK(e->selection_basis == 2);
  CHECK_FALSE(e->flagged);

  // Under any-stance counting deontology has three respondents.
  const auto any = build_normalization_plan(small_catalog(), raw, PopularityRule::any_stance);
  CHECK(any.find("ethics")->target_option == "deontology");
  CHECK(any.find("ethics")->selection_basis == 3);
}

TEST_CASE("plan flags ties and questions nobody endorsed") {
  const std::vector<RawResponse> tie{resp("a", "ethics", {sel(2, "virtue")}),
                                     resp("b", "ethics", {sel(2, "deontology")})};
  const auto plan = build_normalization_plan(small_catalog(), tie);
  CHECK(plan.find("ethics")->target_option == "deontology");
  CHECK(plan.find("ethics")->flagged);
  CHECK(plan.find("ethics")->flag_reason == "tie");

  const auto none = build_normalization_plan(small_catalog(), {});
  CHECK(none.find("ethics")->target_option == "consequentialism");
  CHECK(none.find("ethics")->flag_reason == "no_endorsements");

  CHECK_THROWS_AS(build_normalization_plan(small_catalog(), {resp("a", "nope", {sel(2, "x")})}),
                  InputError);
}

TEST_CASE("normalization codes targets, recovers complements and drops contradictions") {
  const auto catalog = small_catalog();
  const std::vector<RawResponse> raw{
      resp("a", "free_will", {sel(2, "compatibilism")}),
      resp("b", "free_will", {sel(1, "Libertarianism")}),  // complement, case folded
      resp("c", "free_will", {sel(2, "compatibilism")}),
      resp("c", "free_will", {sel(-2, "compatibilism")}),  // contradicts the first record
      resp("a", "ethics", {sel(-1, "virtue")}),
      resp("b", "ethics", {sel(2, "deontology")}),  // says nothing about the target
      resp("a", "unknown_q", {sel(2, "x")}),
      resp("b", "ethics", {sel(2, "egoism")}),
  };
  auto plan = build_normalization_plan(catalog, {});
  plan.entries[1].target_option = "virtue";
  const auto out = normalize_panel(raw, plan, catalog, "human");
  const auto& m = out.matrix;
  CHECK(m.respondent_ids() == std::vector<std::string>{"a", "b", "c"});
  CHECK(m.question_ids() == std::vector<std::string>{"free_will", "ethics"});
  CHECK(m.at(0, 0) == 1.0);
  CHECK(m.at(1, 0) == doctest::Approx(1.0 - 0.75));
  CHECK(m.is_missing(2, 0));
  CHECK(m.at(0, 1) == doctest::Approx(0.25));
  CHECK(m.is_missing(1, 1));
  CHECK(out.log.contradictions.size() == 1);
  CHECK(out.log.contradictions[0].respondent_id == "c");
  CHECK(out.log.unknown_question_records == 1);
  CHECK(out.log.unknown_option_selections == 1);
}

TEST_CASE("explicit respondent order keeps silent respondents as empty rows") {
  const auto catalog = small_catalog();
  const auto plan = build_normalization_plan(catalog, {});
  const std::vector<std::string> order{"z", "a"};
  const auto out = normalize_panel({resp("a", "free_will", {sel(0, "compatibilism")})}, plan,
                                   catalog, "h", &order);
  CHECK(out.matrix.rows() == 2);
  CHECK(out.matrix.is_missing(0, 0));
  CHECK(out.matrix.at(1, 0) == 0.5);
}

TEST_CASE("align_panels intersects ids in the order of the first panel") {
  const auto a = ResponseMatrix::from_cells({"r1", "r2", "r3"}, {"q1", "q2"},
                                            {0.0, 0.25, 0.5, 0.75, 1.0, 0.0}, "a");
  const auto b = ResponseMatrix::from_cells({"r3", "r1", "r9"}, {"q2", "q7"},
                                            {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, "b");
  const auto [x, y] = align_panels(a, b);
  CHECK(same_basis(x, y));
  CHECK(x.respondent_ids() == std::vector<std::string>{"r1", "r3"});
  CHECK(x.question_ids() == std::vector<std::string>{"q2"});
  CHECK(x.at(1, 0) == 0.0);
  CHECK(y.at(0, 0) == doctest::Approx(0.3));
  CHECK(y.at(1, 0) == doctest::Approx(0.1));

  const auto c = ResponseMatrix::from_cells({"zz"}, {"q1"}, {0.0}, "c");
  CHECK_THROWS_AS(align_panels(a, c), AlignmentError);
}

TEST_CASE("panel files round-trip bit for bit") {
  const auto m = silfid::testing::random_panel(17, 9, 0.3, 11, "round");
  std::stringstream buf;
  io::write_panel(buf, m);
  const auto back = io::read_panel(buf);
  CHECK(back == m);
  CHECK(back.source_tag() == "round");

  std::stringstream bad("{\"format\":\"silfid-panel\",\"version\":1,\"source_tag\":\"x\","
                        "\"respondent_ids\":[\"a\"],\"question_ids\":[\"q\",\"r\"]}\n0.5\n");
  CHECK_THROWS_AS(io::read_panel(bad), InputError);
}

TEST_CASE("line-delimited records round-trip and report bad lines") {
  std::vector<Profile> profiles{silfid::testing::make_profile("r1"),
                                silfid::testing::make_profile("r2")};
  profiles[1].phd_year.reset();
  profiles[1].phd_country.reset();
  std::stringstream pbuf;
  io::write_profiles(pbuf, profiles);
  const auto pback = io::read_profiles(pbuf);
  REQUIRE(pback.size() == 2);
  CHECK(pback[0].aos == profiles[0].aos);
  CHECK(pback[0].phd_year == 1998);
  CHECK_FALSE(pback[1].phd_year.has_value());

  const std::vector<RawResponse> raw{resp("r1", "free_will", {sel(1, "compatibilism")}),
                                     resp("r2", "ethics", {sel(-2, "virtue"), sel(2, "deontology")})};
  std::stringstream rbuf;
  io::write_raw_responses(rbuf, raw);
  CHECK(io::read_raw_responses(rbuf) == raw);

  std::stringstream broken("{\"respondent_id\":\"r1\",\"question_id\":\"q\",\"selected\":[{\"stance\":\"Accept\",\"option\":\"a\"}]}\n\n{oops\n");
  try {
    (void)io::read_raw_responses(broken);
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  std::stringstream cbuf;
  io::write_catalog(cbuf, small_catalog());
  const auto cback = io::read_catalog(cbuf);
  REQUIRE(cback.size() == 2);
  CHECK(cback.at("free_will").complement_option == std::optional<std::string>("libertarianism"));
  CHECK(cback.at("ethics").options.size() == 3);
}

TEST_CASE("plan JSON round-trips") {
  const std::vector<RawResponse> tie{resp("a", "ethics", {sel(2, "virtue")}),
                                     resp("b", "ethics", {sel(2, "deontology")})};
  const auto plan = build_normalization_plan(small_catalog(), tie, PopularityRule::any_stance);
  const auto back = io::plan_from_json(io::plan_to_json(plan));
  CHECK(back.rule == PopularityRule::any_stance);
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[1].target_option == plan.entries[1].target_option);
  CHECK(back.entries[1].flagged);
  CHECK(back.entries[0].complement_option == plan.entries[0].complement_option);
  CHECK_THROWS_AS(io::plan_from_json("{\"rule\": 3}"), InputError);
}

TEST_CASE("bundled domain assignments cover 100 questions over 14 domains") {
  const auto& all = io::bundled_domain_assignments();
  CHECK(all.size() == 100);
  std::set<std::string> domains, ids;
  for (const auto& a : all) {
    CHECK(is_known_domain(a.domain));
    domains.insert(a.domain);
    ids.insert(a.question_id);
  }
  CHECK(domains.size() == 14);
  CHECK(ids.size() == 100);
  CHECK(io::bundled_domain(all.front().question_id) == std::optional<std::string>(all.front().domain));
  CHECK_FALSE(io::bundled_domain("no-such-question").has_value());
}

TEST_CASE("feature CSV round-trips, including quoted names") {
  FeatureMatrix f({"r1", "r2"}, {"AOS: Ethics, applied", "PhD country: \"X\""}, {1, 0, 0, 1});
  const auto back = io::read_features_csv(io::features_csv(f));
  CHECK(back.feature_names() == f.feature_names());
  CHECK(back.respondent_ids() == f.respondent_ids());
  CHECK(back.has(0, 0));
  CHECK_FALSE(back.has(0, 1));
  CHECK(back.has(1, 1));
  CHECK_THROWS_AS(io::read_features_csv("id,a\nr1,1\n"), InputError);
  CHECK_THROWS_AS(io::read_features_csv("respondent_id,a\nr1,2\n"), InputError);
}
