#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "silfid/response_matrix.hpp"
#include "silfid/stats.hpp"

namespace silfid {

struct PanelSummary {
  std::size_t n_respondents = 0;
  std::size_t n_questions = 0;
  std::size_t n_responses = 0;
  double response_rate = 0;
  /// Mean within-question variance over questions with >= 2 observed
  /// values; empty when no question qualifies.
  std::optional<double> mean_per_question_variance;
  stats::VarianceConvention convention = stats::VarianceConvention::population;
};

/// Throws InputError for a matrix with no rows or no columns.
PanelSummary panel_summary(const ResponseMatrix& m, stats::VarianceConvention convention =
                                                        stats::VarianceConvention::population);

/// Per-question variance; empty for questions with fewer than two observed values.
std::vector<std::optional<double>> per_question_variance(
    const ResponseMatrix& m,
    stats::VarianceConvention convention = stats::VarianceConvention::population);

}  // namespace silfid
