#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "silfid/response_matrix.hpp"

namespace silfid {

/// Base-2 Shannon entropy of a discrete distribution (0 log 0 = 0).
/// Throws InputError for negative proportions or a sum off 1 by > 1e-9.
double shannon_entropy(std::span<const double> proportions);

struct QuestionDiversity {
  std::string question_id;
  /// Observed responses.
  std::size_t n = 0;
  /// Entropy over the five ordinal levels, bits. 0 when n == 0.
  double entropy_bits = 0;
  /// Population variance of the unit-interval values. 0 when n < 2.
  double variance = 0;
  /// Share of the most frequent level. 0 when n == 0.
  double mode_share = 0;
  /// Counts per level, Reject..Accept.
  std::array<std::size_t, 5> level_counts{};
};

/// Per-question diversity over the five coded levels; values not on the
/// 0/0.25/.../1 grid are assigned to the nearest level.
std::vector<QuestionDiversity> question_diversity(const ResponseMatrix& panel);

struct DiversityStats {
  std::vector<QuestionDiversity> questions;
  /// Mean entropy over questions with >= 1 response.
  double mean_entropy_bits = 0;
  /// Mean variance over questions with >= 2 responses.
  double mean_variance = 0;
  /// 2^mean_entropy_bits.
  double effective_categories = 1;
  /// Mean per-question modal share (questions with >= 1 response).
  double mean_mode_share = 0;
  /// Questions (n >= 1) whose modal share exceeds 0.9.
  std::size_t near_uniform_questions = 0;
  /// Questions with n >= 2 and zero variance.
  std::size_t zero_variance_questions = 0;
  /// Share of all observed responses at each level, Reject..Accept.
  std::array<double, 5> level_shares{};
  /// Reference mean variance / panel mean variance (+inf when the panel has none).
  double collapse_ratio = 1;
};

inline constexpr double kNearUniformModeShare = 0.9;

/// Throws AlignmentError when question ids differ and InputError when the
/// panel has no answered question.
DiversityStats mode_collapse_report(const ResponseMatrix& panel, const ResponseMatrix& reference);

/// Same statistics with no reference panel (collapse_ratio = 1).
DiversityStats diversity_stats(const ResponseMatrix& panel);

/// CSV with header question_id,H,variance,mode_share,n.
std::string diversity_csv(const DiversityStats& stats);

}  // namespace silfid
