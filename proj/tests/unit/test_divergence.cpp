#include <doctest.h>

#include <cmath>
#include <vector>

#include "silfid/divergence.hpp"
#include "silfid/error.hpp"
#include "test_support.hpp"

using namespace silfid;
using silfid::testing::oracle_kl;
using silfid::testing::oracle_pearson;

TEST_CASE("histogram bins are left-closed with a closed last bin") {
  const std::vector<double> v{0.0, 0.25, 0.5, 0.75, 1.0, 1.0};
  const auto h = histogram(v, 0.0, 1.0, 4);
  CHECK(h.edges == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(h.n_samples == 6);
  CHECK(h.mass[0] == doctest::Approx(1.0 / 6));
  CHECK(h.mass[3] == doctest::Approx(3.0 / 6));
  CHECK(histogram(v, 0.0, 1.0).edges.size() == kDefaultBins + 1);
  CHECK_THROWS_AS(histogram(std::vector<double>{}, 0.0, 1.0), InputError);
  CHECK_THROWS_AS(histogram(std::vector<double>{1.5}, 0.0, 1.0), InputError);
}

TEST_CASE("KL closed form with the smoothing allowance") {
  const auto p = histogram(std::vector<double>{0.1}, 0.0, 1.0, 2);
  const auto q = histogram(std::vector<double>{0.1, 0.9}, 0.0, 1.0, 2);
  CHECK(std::abs(kl_divergence(p, q) - std::log(2.0)) < 1e-4);
  CHECK(kl_divergence(p, p) < 1e-12);
  CHECK(js_divergence(p, q) <= std::log(2.0));
  CHECK(js_divergence(p, q) == doctest::Approx(js_divergence(q, p)));
  const auto other = histogram(std::vector<double>{0.1}, 0.0, 2.0, 2);
  CHECK_THROWS_AS(kl_divergence(p, other), InputError);
}

TEST_CASE("KL and JS agree with the reference formulas on random histograms") {
  std::mt19937 gen(19);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> a(40), b(60);
    for (auto& x : a) x = u(gen) * u(gen);
    for (auto& x : b) x = u(gen);
    const auto ha = histogram(a, 0.0, 1.0);
    const auto hb = histogram(b, 0.0, 1.0);
    CHECK(kl_divergence(ha, hb) == doctest::Approx(oracle_kl(ha.mass, hb.mass)).epsilon(1e-10));
    // JS from its definition via the mixture.
    std::vector<double> pa = ha.mass, pb = hb.mass;
    for (auto& x : pa) x += 1e-9;
    for (auto& x : pb) x += 1e-9;
    double sa = 0, sb = 0;
    for (double x : pa) sa += x;
    for (double x : pb) sb += x;
    double js = 0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
      const double x = pa[i] / sa, y = pb[i] / sb, m = 0.5 * (x + y);
      js += 0.5 * x * std::log(x / m) + 0.5 * y * std::log(y / m);
    }
    CHECK(js_divergence(ha, hb) == doctest::Approx(js).epsilon(1e-10));
  }
}

TEST_CASE("self-comparison of a panel is an identity") {
  const auto m = silfid::testing::random_panel(50, 12, 0.2, 23);
  const auto s = flattened_similarity(m, m);
  CHECK(s.kl <= 1e-6);
  CHECK(s.js <= 1e-6);
  CHECK(s.pearson_r == doctest::Approx(1.0));
  CHECK(s.n_matched_cells == m.observed_count());
}

TEST_CASE("flattened similarity pairs only cells observed on both sides") {
  const auto a = ResponseMatrix::from_cells({"r1", "r2"}, {"q1", "q2"},
                                            {0.0, 0.5, std::nullopt, 1.0}, "a");
  const auto b = ResponseMatrix::from_cells({"r1", "r2"}, {"q1", "q2"},
                                            {0.25, std::nullopt, 0.5, 0.75}, "b");
  const auto s = flattened_similarity(a, b);
  CHECK(s.n_matched_cells == 2);
  CHECK(s.pearson_r == doctest::Approx(oracle_pearson({0.0, 1.0}, {0.25, 0.75})));
  const auto ha = histogram(std::vector<double>{0.0, 1.0}, 0, 1);
  const auto hb = histogram(std::vector<double>{0.25, 0.75}, 0, 1);
  CHECK(s.kl == doctest::Approx(oracle_kl(ha.mass, hb.mass)));

  const auto flat = ResponseMatrix::from_cells({"r1", "r2"}, {"q1", "q2"}, {0.5, 0.5, 0.5, 0.5}, "f");
  CHECK(std::isnan(flattened_similarity(a, flat).pearson_r));

  const auto shifted = a.select(std::vector<std::size_t>{1, 0}, std::vector<std::size_t>{0, 1});
  CHECK_THROWS_AS(flattened_similarity(a, shifted), AlignmentError);
  const auto sparse = ResponseMatrix::from_cells({"r1"}, {"q1"}, {0.5}, "s");
  CHECK_THROWS_AS(flattened_similarity(sparse, sparse), DegenerateDataError);
}

TEST_CASE("pairwise similarity aligns each pair and fills a square table") {
  const auto a = silfid::testing::random_panel(30, 5, 0.1, 1, "a");
  const auto b = silfid::testing::random_panel(30, 5, 0.1, 2, "b");
  const auto c = silfid::testing::random_panel(30, 5, 0.1, 3, "c");
  const std::vector<ResponseMatrix> panels{a, b, c};
  const auto s = pairwise_similarity(panels);
  CHECK(s.sources == std::vector<std::string>{"a", "b", "c"});
  CHECK(s.kl[0][0] == 0.0);
  CHECK(s.pearson_r[1][1] == 1.0);
  CHECK(s.kl[0][1] == doctest::Approx(flattened_similarity(a, b).kl));
  CHECK(s.js[0][2] == doctest::Approx(s.js[2][0]));
  CHECK(s.pearson_r[1][2] == doctest::Approx(s.pearson_r[2][1]));
  const auto csv = similarity_matrix_csv(s, SimilarityMetric::js);
  CHECK(csv.rfind("source,a,b,c\n", 0) == 0);
}

TEST_CASE("prompt sensitivity statistics") {
  const auto base = ResponseMatrix::from_cells({"r1", "r2"}, {"q1", "q2"}, {0.0, 0.5, 1.0, 0.75}, "base");
  const auto var = ResponseMatrix::from_cells({"r1", "r2"}, {"q1", "q2"}, {0.5, 0.5, 0.75, 0.75}, "var");
  const auto s = compare_prompt_variants(base, var);
  CHECK(s.n_pairs == 4);
  CHECK(s.mean_abs_diff == doctest::Approx(0.75 / 4));
  CHECK(s.rmse == doctest::Approx(std::sqrt((0.25 + 0.0625) / 4)));
  CHECK(s.mean_shift == doctest::Approx((0.5 - 0.25) / 4));
  CHECK(s.flip_rate == doctest::Approx(0.25));
  CHECK(s.pearson_r == doctest::Approx(oracle_pearson({0, 0.5, 1, 0.75}, {0.5, 0.5, 0.75, 0.75})));
}

TEST_CASE("conditioned correlation keeps only questions where the model varies") {
  // q2 is constant in the model and is dropped.
  const auto human = ResponseMatrix::from_cells({"a", "b", "c"}, {"q1", "q2"},
                                                {0.0, 1.0, 0.5, 0.0, 1.0, 0.5}, "h");
  const auto model = ResponseMatrix::from_cells({"a", "b", "c"}, {"q1", "q2"},
                                                {0.25, 0.75, 0.5, 0.75, 0.75, 0.75}, "m");
  const auto c = conditioned_correlation(human, model);
  CHECK(c.n_questions == 1);
  CHECK(c.n_cells == 3);
  CHECK(c.pearson_r == doctest::Approx(1.0));
  const auto none = conditioned_correlation(human, model, 1.0);
  CHECK(none.n_questions == 0);
  CHECK(std::isnan(none.pearson_r));
}
