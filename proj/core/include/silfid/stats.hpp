#pragma once

#include <cstddef>
#include <span>

namespace silfid::stats {

enum class VarianceConvention { population, sample };

double mean(std::span<const double> xs);

/// Throws DegenerateDataError when there are too few values for the
/// convention (1 for population, 2 for sample).
double variance(std::span<const double> xs,
                VarianceConvention convention = VarianceConvention::population);

/// Pearson correlation. Throws DegenerateDataError for fewer than two pairs
/// or zero variance on either side; InputError on length mismatch.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Two-sided p-value of a Pearson r over n pairs (t with n-2 df).
double pearson_p_value(double r, std::size_t n);

/// Upper tail of the chi-squared distribution.
double chi_squared_sf(double statistic, double dof);

/// Two-sided p-value of a t statistic.
double students_t_two_sided_p(double t, double dof);

struct Contingency2x2 {
  double a = 0;  // row 1, col 1
  double b = 0;  // row 1, col 2
  double c = 0;  // row 2, col 1
  double d = 0;  // row 2, col 2
};

/// Yates-corrected chi-squared for a 2x2 table:
///   n * max(0, |ad - bc| - n/2)^2 / ((a+b)(c+d)(a+c)(b+d)).
/// Returns 0 when any margin is empty.
double chi_squared_yates(const Contingency2x2& t);

struct WelchResult {
  double t = 0;
  double dof = 0;
  double p = 1;
  /// False when either group has fewer than two observations; t is then NaN.
  bool defined = false;
};

/// Welch unequal-variance t test of mean(xs) - mean(ys).
WelchResult welch_t_test(std::span<const double> xs, std::span<const double> ys);

}  // namespace silfid::stats
