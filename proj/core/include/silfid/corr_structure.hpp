#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "silfid/response_matrix.hpp"

namespace silfid {

inline constexpr std::size_t kDefaultMinOverlap = 3;
inline constexpr std::size_t kDefaultPermutations = 999;

/// Question x question Pearson correlations under pairwise deletion.
/// Undefined entries hold NaN and are false in `defined`.
struct CorrMatrix {
  std::vector<std::string> question_ids;
  Eigen::MatrixXd values;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> defined;
  Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic> overlap;

  [[nodiscard]] std::size_t size() const noexcept { return question_ids.size(); }
  /// Defined entries strictly above the diagonal, row-major.
  [[nodiscard]] std::vector<double> upper_triangle() const;
};

/// Throws InputError when min_overlap < 3. Pairs with fewer shared
/// respondents, or constant on either side over the overlap, are undefined.
CorrMatrix pairwise_corr_matrix(const ResponseMatrix& m,
                                std::size_t min_overlap = kDefaultMinOverlap);

struct CorrelationTest {
  double r = 0;
  double p = 1;
  std::size_t n_pairs = 0;
};

/// Pearson r over upper-triangle pairs defined in both matrices, with a
/// two-sided t p-value. Throws AlignmentError on differing question ids,
/// DegenerateDataError with fewer than 3 common pairs.
CorrelationTest elementwise_corr(const CorrMatrix& c1, const CorrMatrix& c2);

struct MantelResult {
  double r = 0;
  /// One-sided: (#{permuted r >= observed} + 1) / (n_perm + 1).
  double p = 1;
  std::size_t n_perm = 0;
};

/// Permutations relabel rows and columns of c2 jointly. Permutation k draws
/// from its own stream derived from (seed, k), so the result does not depend
/// on thread count.
MantelResult mantel(const CorrMatrix& c1, const CorrMatrix& c2,
                    std::size_t n_perm = kDefaultPermutations, std::uint64_t seed = 0);

/// r statistic of c1 against c2 with c2's questions relabelled by `perm`
/// (entry (i, j) of c1 is paired with (perm[i], perm[j]) of c2). NaN when
/// fewer than 3 common pairs or either side is constant.
double permuted_elementwise_r(const CorrMatrix& c1, const CorrMatrix& c2,
                              const std::vector<std::size_t>& perm);

enum class RvMode {
  /// Column-centred, mean-filled response matrices.
  data,
  /// The question correlation matrices themselves (undefined entries as 0).
  correlation,
};

/// RV on aligned panels after mean-filling and centring each column.
/// Throws AlignmentError for unaligned panels, InputError for a column with
/// no observations, DegenerateDataError when either panel has no variance.
double rv_coefficient(const ResponseMatrix& a, const ResponseMatrix& b);

/// RV of two already prepared data configurations with equal row counts.
double rv_coefficient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// RV between symmetric matrices: tr(S1 S2) / sqrt(tr(S1^2) tr(S2^2)),
/// clamped to [0, 1] since pairwise-deletion matrices need not be PSD.
double rv_coefficient(const CorrMatrix& c1, const CorrMatrix& c2);

struct CorrDivergence {
  /// KL(c2 histogram || c1 histogram): c1 is the reference.
  double kl = 0;
  double js = 0;
};

/// 20 bins over [-1, 1] of the defined upper-triangle entries.
/// Throws DegenerateDataError when either triangle is empty.
CorrDivergence corr_dist_divergence(const CorrMatrix& c1, const CorrMatrix& c2);

struct StructureOptions {
  std::size_t min_overlap = kDefaultMinOverlap;
  std::size_t n_perm = kDefaultPermutations;
  std::uint64_t seed = 0;
  RvMode rv_mode = RvMode::data;
};

struct StructureComparison {
  double elementwise_r = 0;
  double elementwise_p = 1;
  double mantel_r = 0;
  double mantel_p = 1;
  double rv = 0;
  double corr_kl = 0;
  double corr_js = 0;
  std::size_t n_common_pairs = 0;
  std::size_t n_perm = 0;
  RvMode rv_mode = RvMode::data;
};

/// Full comparison of a reference panel with another; both are aligned on
/// shared ids first.
StructureComparison compare_structure(const ResponseMatrix& reference,
                                      const ResponseMatrix& other,
                                      const StructureOptions& options = {});

/// Correlations with empty fields for undefined entries.
std::string corr_matrix_csv(const CorrMatrix& c);
std::string overlap_csv(const CorrMatrix& c);

const char* to_string(RvMode mode) noexcept;
RvMode rv_mode_from_string(const std::string& s);

}  // namespace silfid
