#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "silfid/response_matrix.hpp"

namespace silfid {

inline constexpr std::size_t kDefaultBins = 20;
/// Additive mass put on every bin of both histograms before KL/JS.
inline constexpr double kSmoothingEpsilon = 1e-9;

struct Histogram {
  std::vector<double> edges;  // bins + 1, strictly increasing
  std::vector<double> mass;   // sums to 1
  std::size_t n_samples = 0;
};

/// Equal-width bins over [lo, hi]; left-closed, the last bin right-closed.
/// Throws InputError for empty input or a value outside the range.
Histogram histogram(std::span<const double> values, double lo, double hi,
                    std::size_t bins = kDefaultBins);

/// KL(P || Q) in nats after epsilon smoothing and renormalisation.
/// Throws InputError when bin edges differ.
double kl_divergence(const Histogram& p, const Histogram& q);

/// Jensen-Shannon divergence in nats (bounded by ln 2).
double js_divergence(const Histogram& p, const Histogram& q);

struct MatrixSimilarity {
  /// KL(a || b) over [0,1] histograms of the matched cells.
  double kl = 0;
  double js = 0;
  /// Pearson r over matched cell pairs; NaN when either side is constant.
  double pearson_r = 0;
  std::size_t n_matched_cells = 0;
};

/// Compares the cells observed in both panels. Throws AlignmentError when
/// the panels do not share the same id basis, DegenerateDataError for
/// fewer than two matched cells.
MatrixSimilarity flattened_similarity(const ResponseMatrix& a, const ResponseMatrix& b);

struct PairwiseSimilarity {
  std::vector<std::string> sources;
  /// kl[i][j] = KL(row i || column j); diagonal zero.
  std::vector<std::vector<double>> kl;
  std::vector<std::vector<double>> js;
  std::vector<std::vector<double>> pearson_r;
};

/// All-pairs flattened similarity; each pair is aligned on shared ids first.
PairwiseSimilarity pairwise_similarity(std::span<const ResponseMatrix> panels);

enum class SimilarityMetric { kl, js, pearson_r };
std::string similarity_matrix_csv(const PairwiseSimilarity& s, SimilarityMetric metric);

/// Paired comparison of one panel answered under two prompt framings.
struct PromptSensitivity {
  double pearson_r = 0;
  double mean_abs_diff = 0;
  double rmse = 0;
  /// Share of pairs whose value moved by more than kFlipThreshold.
  double flip_rate = 0;
  /// mean(variant - baseline).
  double mean_shift = 0;
  std::size_t n_pairs = 0;
};

inline constexpr double kFlipThreshold = 0.25;

/// Aligns on shared ids. Throws DegenerateDataError for < 2 matched cells.
PromptSensitivity compare_prompt_variants(const ResponseMatrix& baseline,
                                          const ResponseMatrix& variant);

/// Flattened Pearson r restricted to questions where the model's variance
/// exceeds a floor, which discounts agreement produced by constant output.
struct ConditionedCorrelation {
  double pearson_r = 0;
  std::size_t n_questions = 0;
  std::size_t n_cells = 0;
};

ConditionedCorrelation conditioned_correlation(const ResponseMatrix& human,
                                               const ResponseMatrix& model,
                                               double min_model_variance = 0.01);

}  // namespace silfid
