#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "silfid/diversity.hpp"
#include "silfid/error.hpp"
#include "test_support.hpp"

using namespace silfid;

TEST_CASE("Shannon entropy closed forms") {
  const std::vector<double> uniform5(5, 0.2);
  CHECK(std::abs(shannon_entropy(uniform5) - std::log2(5.0)) < 1e-9);
  CHECK(shannon_entropy(std::vector<double>{1.0, 0.0, 0.0}) == 0.0);
  CHECK(shannon_entropy(std::vector<double>{0.5, 0.5}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(shannon_entropy(std::vector<double>{0.5, 0.6}), InputError);
  CHECK_THROWS_AS(shannon_entropy(std::vector<double>{1.5, -0.5}), InputError);
}

TEST_CASE("per-question diversity counts levels, entropy and variance") {
  // q1: every level once; q2: constant; q3: unanswered; q4: off-grid values snap
  // to the nearest level (0.9 -> 1, 0.8 -> 0.75, 0.1 -> 0).
  const auto m = ResponseMatrix::from_cells(
      {"a", "b", "c", "d", "e"}, {"q1", "q2", "q3", "q4"},
      {0.0, 0.5, std::nullopt, 0.9,   //
       0.25, 0.5, std::nullopt, 0.8,  //
       0.5, 0.5, std::nullopt, 0.1,   //
       0.75, 0.5, std::nullopt, std::nullopt,  //
       1.0, 0.5, std::nullopt, std::nullopt},
      "h");
  const auto qs = question_diversity(m);
  REQUIRE(qs.size() == 4);
  CHECK(qs[0].entropy_bits == doctest::Approx(std::log2(5.0)));
  CHECK(qs[0].variance == doctest::Approx(0.125));
  CHECK(qs[0].mode_share == doctest::Approx(0.2));
  CHECK(qs[1].entropy_bits == 0.0);
  CHECK(qs[1].variance == 0.0);
  CHECK(qs[1].mode_share == 1.0);
  CHECK(qs[2].n == 0);
  CHECK(qs[2].mode_share == 0.0);
  CHECK(qs[3].level_counts == std::array<std::size_t, 5>{1, 0, 0, 1, 1});

  const auto s = diversity_stats(m);
  CHECK(s.near_uniform_questions == 1);
  CHECK(s.zero_variance_questions == 1);
  CHECK(s.collapse_ratio == 1.0);
  double share_sum = 0;
  for (double x : s.level_shares) share_sum += x;
  CHECK(share_sum == doctest::Approx(1.0));
  CHECK(s.effective_categories == doctest::Approx(std::exp2(s.mean_entropy_bits)));
}

TEST_CASE("collapse ratio is the reference variance over the panel variance") {
  const auto human = silfid::testing::random_panel(200, 6, 0.2, 3, "human");
  const auto self = mode_collapse_report(human, human);
  CHECK(self.collapse_ratio == doctest::Approx(1.0));

  // Squeeze every value halfway to 0.5: variance drops by a factor of 4.
  std::vector<std::optional<double>> cells;
  for (std::size_t r = 0; r < human.rows(); ++r) {
    for (std::size_t q = 0; q < human.cols(); ++q) {
      const auto v = human.at(r, q);
      cells.push_back(v ? std::optional<double>(0.5 + (*v - 0.5) / 2) : std::nullopt);
    }
  }
  const auto squeezed = ResponseMatrix::from_cells(human.respondent_ids(), human.question_ids(),
                                                   cells, "model");
  CHECK(mode_collapse_report(squeezed, human).collapse_ratio == doctest::Approx(4.0));

  const auto constant = ResponseMatrix::from_cells({"a", "b"}, {"q0"}, {0.5, 0.5}, "c");
  const auto ref = ResponseMatrix::from_cells({"a", "b"}, {"q0"}, {0.0, 1.0}, "h");
  CHECK(std::isinf(mode_collapse_report(constant, ref).collapse_ratio));

  const auto other = ResponseMatrix::from_cells({"a"}, {"zz"}, {0.5}, "x");
  CHECK_THROWS_AS(mode_collapse_report(other, human), AlignmentError);
}

TEST_CASE("diversity CSV lists one row per question") {
  const auto m = silfid::testing::random_panel(10, 3, 0.0, 5);
  const auto csv = diversity_csv(diversity_stats(m));
  CHECK(csv.rfind("question_id,H,variance,mode_share,n\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
