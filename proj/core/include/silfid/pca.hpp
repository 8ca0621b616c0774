#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "silfid/response_matrix.hpp"

namespace silfid {

struct ImputationConfig {
  std::size_t ncp = 5;
  /// RMS change over imputed cells between iterations.
  double tolerance = 1e-6;
  std::size_t max_iterations = 200;
};

/// Fully observed panel produced by iterative_impute.
struct ImputedPanel {
  std::vector<std::string> respondent_ids;
  std::vector<std::string> question_ids;
  Eigen::MatrixXd values;
  std::size_t iterations = 0;
  double final_rms_delta = 0;
  /// False when max_iterations was reached first; values hold the last iterate.
  bool converged = true;
  std::size_t imputed_cells = 0;
};

/// Starts from column means, then alternates a rank-ncp reconstruction of the
/// standardised matrix with replacement of the missing cells only. Observed
/// cells are copied bitwise. Throws InputError for a column with no
/// observations or an ncp outside [1, min(R, Q)).
ImputedPanel iterative_impute(const ResponseMatrix& m, const ImputationConfig& cfg = {});

struct PcaModel {
  /// Columns that entered the decomposition.
  std::vector<std::string> question_ids;
  /// Zero-variance columns left out.
  std::vector<std::string> dropped_question_ids;
  std::vector<std::string> warnings;
  /// Q_eff x Q_eff, column c is component c; largest |entry| made positive.
  Eigen::MatrixXd loadings;
  Eigen::VectorXd eigenvalues;
  /// eigenvalue / Q_eff, non-increasing.
  Eigen::VectorXd explained_variance_ratio;
  Eigen::MatrixXd scores;
  Eigen::VectorXd column_mean;
  Eigen::VectorXd column_sd;

  [[nodiscard]] std::size_t components() const noexcept {
    return static_cast<std::size_t>(explained_variance_ratio.size());
  }
  /// Sum of the first k ratios (all of them when k exceeds the count).
  [[nodiscard]] double cumulative_ratio(std::size_t k) const;
};

/// Correlation-matrix PCA. Throws InputError for fewer than 2 rows, or
/// DegenerateDataError when fewer than 2 columns have non-zero variance.
PcaModel fit_pca(const Eigen::MatrixXd& data, const std::vector<std::string>& question_ids);
PcaModel fit_pca(const ImputedPanel& panel);

inline constexpr double kSignificantComponentShare = 0.02;

std::size_t count_significant(std::span<const double> ratios,
                              double threshold = kSignificantComponentShare);
std::size_t count_significant(const PcaModel& model,
                              double threshold = kSignificantComponentShare);

struct ComponentPair {
  std::size_t a_component = 0;
  std::size_t b_component = 0;
  /// Pearson r between the two loading vectors, raw sign.
  double r = 0;
  /// +1 or -1: the flip applied to b for the aligned statistic.
  int sign = 1;
  /// Shared questions among the top five by |loading|, divided by five.
  double top5_overlap = 0;
};

struct AlignmentResult {
  std::vector<ComponentPair> pairs;
  /// Sum of |r| over the chosen pairing.
  double score = 0;
  /// Flattened loading correlation with each b component sign-aligned.
  double flattened_r = 0;
  /// Same without sign alignment.
  double flattened_r_raw = 0;
  double mean_top5_overlap = 0;
  std::size_t n_common_questions = 0;
};

inline constexpr std::size_t kMaxAlignedComponents = 8;

/// Exact search over the k! pairings of the top-k components, maximising the
/// sum of |r| over loadings restricted to questions retained by both models.
/// Throws AlignmentError when the models were fit on different question
/// sets, InputError when either has fewer than k components or k is 0 or
/// above kMaxAlignedComponents.
AlignmentResult align_components(const PcaModel& a, const PcaModel& b, std::size_t k = 6);

/// question_id,PC1..PCk
std::string loadings_csv(const PcaModel& model, std::size_t k);
/// component,eigenvalue,ratio,cumulative
std::string ratios_csv(const PcaModel& model);

}  // namespace silfid
