#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "silfid/error.hpp"
#include "silfid/pca.hpp"
#include "test_support.hpp"

using namespace silfid;
using silfid::testing::oracle_pearson;

namespace {

// Affine images of one latent column: rank one after standardisation.
struct RankOne {
  ResponseMatrix holed;
  std::vector<double> full;  // row-major truth
};

RankOne rank_one_panel(std::size_t rows, std::size_t cols, double missing, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> offset(cols), scale(cols);
  for (std::size_t q = 0; q < cols; ++q) {
    offset[q] = 0.1 + 0.2 * u(gen);
    scale[q] = (u(gen) < 0.5 ? -1 : 1) * (0.2 + 0.4 * u(gen));
  }
  std::vector<std::string> rids, qids;
  for (std::size_t r = 0; r < rows; ++r) rids.push_back("r" + std::to_string(r));
  for (std::size_t q = 0; q < cols; ++q) qids.push_back("q" + std::to_string(q));
  RankOne out;
  std::vector<std::optional<double>> cells;
  for (std::size_t r = 0; r < rows; ++r) {
    const double z = u(gen);
    for (std::size_t q = 0; q < cols; ++q) {
      double v = offset[q] + scale[q] * z;
      if (scale[q] < 0) v += 0.6;
      out.full.push_back(v);
      cells.push_back(u(gen) < missing ? std::nullopt : std::optional<double>(v));
    }
  }
  out.holed = ResponseMatrix::from_cells(rids, qids, cells, "rank1");
  return out;
}

}  // namespace

TEST_CASE("imputation recovers deleted cells of rank-one data") {
  const auto p = rank_one_panel(200, 10, 0.2, 3);
  ImputationConfig cfg;
  cfg.ncp = 1;
  cfg.tolerance = 1e-12;
  cfg.max_iterations = 2000;
  const auto imp = iterative_impute(p.holed, cfg);
  CHECK(imp.imputed_cells == p.holed.rows() * p.holed.cols() - p.holed.observed_count());
  double worst = 0;
  for (std::size_t r = 0; r < p.holed.rows(); ++r) {
    for (std::size_t q = 0; q < p.holed.cols(); ++q) {
      const double got = imp.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q));
      if (!p.holed.is_missing(r, q)) {
        CHECK(got == p.holed.value(r, q));  // observed cells untouched
      } else {
        worst = std::max(worst, std::abs(got - p.full[r * p.holed.cols() + q]));
      }
    }
  }
  CHECK(worst < 1e-4);
  CHECK(imp.converged);
}

TEST_CASE("imputation edge cases") {
  const auto full = silfid::testing::random_panel(20, 8, 0.0, 1);
  const auto imp = iterative_impute(full);
  CHECK(imp.imputed_cells == 0);
  CHECK(imp.iterations == 1);

  ImputationConfig cfg;
  cfg.ncp = 8;
  CHECK_THROWS_AS(iterative_impute(full, cfg), InputError);
  cfg.ncp = 0;
  CHECK_THROWS_AS(iterative_impute(full, cfg), InputError);

  const auto hole = ResponseMatrix::from_cells({"a", "b", "c"}, {"q1", "q2", "q3"},
                                               {0.0, std::nullopt, 1.0, 0.5, std::nullopt, 0.5,
                                                1.0, std::nullopt, 0.0},
                                               "h");
  cfg.ncp = 1;
  CHECK_THROWS_AS(iterative_impute(hole, cfg), InputError);

  const auto stubborn = silfid::testing::random_panel(30, 6, 0.4, 2);
  cfg.ncp = 2;
  cfg.max_iterations = 2;
  cfg.tolerance = 1e-300;
  const auto capped = iterative_impute(stubborn, cfg);
  CHECK_FALSE(capped.converged);
  CHECK(capped.iterations == 2);
}

TEST_CASE("two-column PCA has eigenvalues one plus and minus r") {
  std::mt19937 gen(4);
  std::normal_distribution<double> n(0, 1);
  Eigen::MatrixXd x(300, 2);
  std::vector<double> a, b;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double z = n(gen);
    x(r, 0) = z;
    x(r, 1) = 0.6 * z + 0.8 * n(gen);
    a.push_back(x(r, 0));
    b.push_back(x(r, 1));
  }
  const double rho = oracle_pearson(a, b);
  const auto m = fit_pca(x, {"u", "v"});
  CHECK(m.eigenvalues(0) == doctest::Approx(1 + std::abs(rho)));
  CHECK(m.eigenvalues(1) == doctest::Approx(1 - std::abs(rho)));
  CHECK(m.explained_variance_ratio(0) == doctest::Approx((1 + std::abs(rho)) / 2));
  CHECK(m.cumulative_ratio(10) == doctest::Approx(1.0));
  // Both loadings are 1/sqrt(2) in magnitude; the largest is positive.
  CHECK(std::abs(m.loadings(0, 0)) == doctest::Approx(std::sqrt(0.5)));
  CHECK(m.loadings.col(0).maxCoeff() > 0);
  const Eigen::MatrixXd gram = m.loadings.transpose() * m.loadings;
  CHECK(gram.isIdentity(1e-10));
  // Scores are uncorrelated with variances equal to the eigenvalues.
  const Eigen::MatrixXd cov = m.scores.transpose() * m.scores / static_cast<double>(x.rows());
  CHECK(cov(0, 1) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(cov(0, 0) == doctest::Approx(m.eigenvalues(0)));
}

TEST_CASE("constant columns are dropped with a warning") {
  Eigen::MatrixXd x(4, 3);
  x << 0, 1, 0.5, 1, 0, 0.5, 0.5, 0.25, 0.5, 0.25, 0.75, 0.5;
  const auto m = fit_pca(x, {"a", "b", "c"});
  CHECK(m.question_ids == std::vector<std::string>{"a", "b"});
  CHECK(m.dropped_question_ids == std::vector<std::string>{"c"});
  CHECK_FALSE(m.warnings.empty());
  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(4, 3, 0.5);
  flat(0, 0) = 1;
  CHECK_THROWS_AS(fit_pca(flat, {"a", "b", "c"}), DegenerateDataError);
  CHECK_THROWS_AS(fit_pca(Eigen::MatrixXd::Zero(1, 3), {"a", "b", "c"}), InputError);
}

TEST_CASE("significant component count uses an inclusive threshold") {
  const std::vector<double> ratios{0.5, 0.3, 0.02, 0.0199, 0.01};
  CHECK(count_significant(ratios) == 3);
  CHECK(count_significant(ratios, 0.25) == 2);
}

TEST_CASE("alignment recovers permuted and sign-flipped components") {
  std::mt19937 gen(8);
  std::normal_distribution<double> n(0, 1);
  Eigen::MatrixXd x(400, 9);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double f[3] = {2.0 * n(gen), 1.4 * n(gen), 1.0 * n(gen)};
    for (Eigen::Index q = 0; q < 9; ++q) x(r, q) = f[q % 3] + 0.3 * n(gen);
  }
  std::vector<std::string> ids;
  for (int q = 0; q < 9; ++q) ids.push_back("q" + std::to_string(q));
  const auto a = fit_pca(x, ids);

  const auto self = align_components(a, a, 3);
  CHECK(self.score == doctest::Approx(3.0));
  CHECK(self.flattened_r == doctest::Approx(1.0));
  CHECK(self.mean_top5_overlap == doctest::Approx(1.0));

  PcaModel b = a;
  b.loadings.col(0).swap(b.loadings.col(1));
  b.loadings.col(2) *= -1;
  const auto al = align_components(a, b, 3);
  CHECK(al.pairs[0].b_component == 1);
  CHECK(al.pairs[1].b_component == 0);
  CHECK(al.pairs[2].b_component == 2);
  CHECK(al.pairs[2].sign == -1);
  CHECK(al.flattened_r == doctest::Approx(1.0));
  CHECK(al.flattened_r_raw < 0.9);
  CHECK(al.n_common_questions == 9);

  PcaModel c = a;
  c.question_ids[0] = "elsewhere";
  CHECK_THROWS_AS(align_components(a, c, 3), AlignmentError);
  CHECK_THROWS_AS(align_components(a, a, 0), InputError);
  CHECK_THROWS_AS(align_components(a, a, 9), InputError);
}

TEST_CASE("PCA CSV writers") {
  Eigen::MatrixXd x(5, 3);
  x << 0, 1, 0.5, 1, 0, 0.25, 0.5, 0.25, 0.5, 0.25, 0.75, 1, 0.75, 0.5, 0;
  const auto m = fit_pca(x, {"a", "b", "c"});
  const auto l = loadings_csv(m, 2);
  CHECK(l.rfind("question_id,PC1,PC2\n", 0) == 0);
  const auto r = ratios_csv(m);
  CHECK(r.find("PC3,") != std::string::npos);
  CHECK(r.find(",1.000000\n") != std::string::npos);
}
