#include "silfid/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "silfid/error.hpp"

namespace silfid::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw DegenerateDataError("mean of empty sequence");
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs, VarianceConvention convention) {
  const std::size_t min_n = convention == VarianceConvention::population ? 1 : 2;
  if (xs.size() < min_n) throw DegenerateDataError("variance needs more observations");
  const double m = mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double denom = convention == VarianceConvention::population
                           ? static_cast<double>(xs.size())
                           : static_cast<double>(xs.size() - 1);
  return ss / denom;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InputError("pearson: length mismatch");
  if (xs.size() < 2) throw DegenerateDataError("pearson: fewer than two pairs");
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0 || syy <= 0) throw DegenerateDataError("pearson: zero variance");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double students_t_two_sided_p(double t, double dof) {
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  boost::math::students_t dist(dof);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))), 0.0, 1.0);
}

double pearson_p_value(double r, std::size_t n) {
  if (n < 3) return std::numeric_limits<double>::quiet_NaN();
  const double dof = static_cast<double>(n) - 2.0;
  if (std::fabs(r) >= 1.0) return 0.0;
  const double t = r * std::sqrt(dof / (1.0 - r * r));
  return students_t_two_sided_p(t, dof);
}

double chi_squared_sf(double statistic, double dof) {
  if (statistic <= 0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double chi_squared_yates(const Contingency2x2& t) {
  const double n = t.a + t.b + t.c + t.d;
  const double denom = (t.a + t.b) * (t.c + t.d) * (t.a + t.c) * (t.b + t.d);
  if (denom <= 0) return 0.0;
  const double corrected = std::max(0.0, std::fabs(t.a * t.d - t.b * t.c) - n / 2.0);
  return n * corrected * corrected / denom;
}

WelchResult welch_t_test(std::span<const double> xs, std::span<const double> ys) {
  WelchResult res;
  if (xs.size() < 2 || ys.size() < 2) {
    res.t = std::numeric_limits<double>::quiet_NaN();
    res.dof = std::numeric_limits<double>::quiet_NaN();
    res.p = 1.0;
    return res;
  }
  res.defined = true;
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  const double vx = variance(xs, VarianceConvention::sample) / nx;
  const double vy = variance(ys, VarianceConvention::sample) / ny;
  const double diff = mean(xs) - mean(ys);
  const double se2 = vx + vy;
  if (se2 <= 0) {
    res.t = diff == 0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    res.dof = nx + ny - 2;
    res.p = diff == 0 ? 1.0 : 0.0;
    return res;
  }
  res.t = diff / std::sqrt(se2);
  res.dof = se2 * se2 / (vx * vx / (nx - 1) + vy * vy / (ny - 1));
  res.p = students_t_two_sided_p(res.t, res.dof);
  return res;
}

}  // namespace silfid::stats
