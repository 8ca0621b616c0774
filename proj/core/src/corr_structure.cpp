#include "silfid/corr_structure.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "parallel.hpp"
#include "silfid/divergence.hpp"
#include "silfid/error.hpp"
#include "silfid/ingest.hpp"
#include "silfid/rng.hpp"
#include "silfid/stats.hpp"
#include "text_util.hpp"

namespace silfid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Pearson over rows where both columns are observed; NaN when undefined.
double pair_corr(const ResponseMatrix& m, std::size_t i, std::size_t j, std::size_t min_overlap,
                 std::size_t& overlap) {
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (m.is_missing(r, i) || m.is_missing(r, j)) continue;
    sx += m.value(r, i);
    sy += m.value(r, j);
    ++n;
  }
  overlap = n;
  if (n < min_overlap) return kNaN;
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    if (m.is_missing(r, i) || m.is_missing(r, j)) continue;
    const double dx = m.value(r, i) - mx;
    const double dy = m.value(r, j) - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0 || syy <= 0) return kNaN;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

void require_same_questions(const CorrMatrix& c1, const CorrMatrix& c2) {
  if (c1.question_ids != c2.question_ids) {
    throw AlignmentError("correlation matrices are over different question sets");
  }
}

// Pearson over matched pairs; NaN when fewer than 3 pairs or a side is constant.
double pearson_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 3) return kNaN;
  try {
    return stats::pearson(x, y);
  } catch (const DegenerateDataError&) {
    return kNaN;
  }
}

}  // namespace

std::vector<double> CorrMatrix::upper_triangle() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = i + 1; j < size(); ++j) {
      if (defined(i, j)) out.push_back(values(i, j));
    }
  }
  return out;
}

CorrMatrix pairwise_corr_matrix(const ResponseMatrix& m, std::size_t min_overlap) {
  if (min_overlap < 3) throw InputError("pairwise_corr_matrix: min_overlap must be at least 3");
  const std::size_t q = m.cols();
  CorrMatrix c;
  c.question_ids = m.question_ids();
  c.values = Eigen::MatrixXd::Constant(q, q, kNaN);
  c.defined = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(q, q, false);
  c.overlap = Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(q, q);
  for (std::size_t i = 0; i < q; ++i) {
    c.values(i, i) = 1.0;
    c.defined(i, i) = true;
    std::size_t n = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) n += m.is_missing(r, i) ? 0 : 1;
    c.overlap(i, i) = n;
  }
  detail::parallel_for(q, [&](std::size_t i) {
    for (std::size_t j = i + 1; j < q; ++j) {
      std::size_t overlap = 0;
      const double r = pair_corr(m, i, j, min_overlap, overlap);
      c.overlap(i, j) = c.overlap(j, i) = overlap;
      if (!std::isnan(r)) {
        c.values(i, j) = c.values(j, i) = r;
        c.defined(i, j) = c.defined(j, i) = true;
      }
    }
  });
  return c;
}

double permuted_elementwise_r(const CorrMatrix& c1, const CorrMatrix& c2,
                              const std::vector<std::size_t>& perm) {
  std::vector<double> x, y;
  const std::size_t q = c1.size();
  x.reserve(q * (q - 1) / 2);
  y.reserve(q * (q - 1) / 2);
  for (std::size_t i = 0; i < q; ++i) {
    for (std::size_t j = i + 1; j < q; ++j) {
      const std::size_t pi = perm[i], pj = perm[j];
      if (c1.defined(i, j) && c2.defined(pi, pj)) {
        x.push_back(c1.values(i, j));
        y.push_back(c2.values(pi, pj));
      }
    }
  }
  return pearson_pairs(x, y);
}

CorrelationTest elementwise_corr(const CorrMatrix& c1, const CorrMatrix& c2) {
  require_same_questions(c1, c2);
  std::vector<double> x, y;
  for (std::size_t i = 0; i < c1.size(); ++i) {
    for (std::size_t j = i + 1; j < c1.size(); ++j) {
      if (c1.defined(i, j) && c2.defined(i, j)) {
        x.push_back(c1.values(i, j));
        y.push_back(c2.values(i, j));
      }
    }
  }
  if (x.size() < 3) {
    throw DegenerateDataError(
        fmt::format("elementwise correlation needs 3 common pairs, have {}", x.size()));
  }
  CorrelationTest t;
  t.n_pairs = x.size();
  t.r = stats::pearson(x, y);
  t.p = stats::pearson_p_value(t.r, t.n_pairs);
  return t;
}

MantelResult mantel(const CorrMatrix& c1, const CorrMatrix& c2, std::size_t n_perm,
                    std::uint64_t seed) {
  const auto observed = elementwise_corr(c1, c2);
  const std::size_t q = c1.size();
  std::vector<double> permuted(n_perm, kNaN);
  detail::parallel_for(n_perm, [&](std::size_t k) {
    auto rng = Rng::stream(seed, k);
    std::vector<std::size_t> perm(q);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    permuted[k] = permuted_elementwise_r(c1, c2, perm);
  });
  // Ties within rounding of the observed value count as at least as extreme.
  const auto count = std::count_if(permuted.begin(), permuted.end(), [&](double r) {
    return !std::isnan(r) && r >= observed.r - 1e-12;
  });
  MantelResult out;
  out.r = observed.r;
  out.n_perm = n_perm;
  out.p = static_cast<double>(count + 1) / static_cast<double>(n_perm + 1);
  return out;
}

namespace {

Eigen::MatrixXd centred_filled(const ResponseMatrix& m) {
  Eigen::MatrixXd x(m.rows(), m.cols());
  for (std::size_t q = 0; q < m.cols(); ++q) {
    const auto col = m.observed_column(q);
    if (col.empty()) {
      throw InputError("rv_coefficient: question " + m.question_ids()[q] + " has no responses");
    }
    const double mu = stats::mean(col);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) =
          m.is_missing(r, q) ? 0.0 : m.value(r, q) - mu;
    }
  }
  return x;
}

}  // namespace

double rv_coefficient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows()) throw AlignmentError("rv_coefficient: row counts differ");
  // tr(XX'YY') = ||X'Y||_F^2 and tr((XX')^2) = ||X'X||_F^2; the cross-product
  // forms stay Q x Q instead of R x R.
  const double num = (x.transpose() * y).squaredNorm();
  const double den = std::sqrt((x.transpose() * x).squaredNorm() * (y.transpose() * y).squaredNorm());
  if (!(den > 0)) throw DegenerateDataError("rv_coefficient: a configuration has no variance");
  return std::clamp(num / den, 0.0, 1.0);
}

double rv_coefficient(const ResponseMatrix& a, const ResponseMatrix& b) {
  if (!same_basis(a, b)) throw AlignmentError("rv_coefficient: panels are not aligned");
  return rv_coefficient(centred_filled(a), centred_filled(b));
}

double rv_coefficient(const CorrMatrix& c1, const CorrMatrix& c2) {
  require_same_questions(c1, c2);
  const Eigen::MatrixXd s1 = c1.defined.select(c1.values, Eigen::MatrixXd::Zero(c1.size(), c1.size()));
  const Eigen::MatrixXd s2 = c2.defined.select(c2.values, Eigen::MatrixXd::Zero(c2.size(), c2.size()));
  const double num = (s1.array() * s2.array()).sum();
  const double den = std::sqrt(s1.squaredNorm() * s2.squaredNorm());
  if (!(den > 0)) throw DegenerateDataError("rv_coefficient: empty correlation matrix");
  return std::clamp(num / den, 0.0, 1.0);
}

CorrDivergence corr_dist_divergence(const CorrMatrix& c1, const CorrMatrix& c2) {
  const auto t1 = c1.upper_triangle();
  const auto t2 = c2.upper_triangle();
  if (t1.empty() || t2.empty()) {
    throw DegenerateDataError("corr_dist_divergence: no defined correlations");
  }
  const auto h1 = histogram(t1, -1.0, 1.0);
  const auto h2 = histogram(t2, -1.0, 1.0);
  return {kl_divergence(h2, h1), js_divergence(h2, h1)};
}

StructureComparison compare_structure(const ResponseMatrix& reference, const ResponseMatrix& other,
                                      const StructureOptions& options) {
  const auto [a, b] = align_panels(reference, other);
  const auto c1 = pairwise_corr_matrix(a, options.min_overlap);
  const auto c2 = pairwise_corr_matrix(b, options.min_overlap);
  StructureComparison s;
  const auto elem = elementwise_corr(c1, c2);
  s.elementwise_r = elem.r;
  s.elementwise_p = elem.p;
  s.n_common_pairs = elem.n_pairs;
  const auto mt = mantel(c1, c2, options.n_perm, options.seed);
  s.mantel_r = mt.r;
  s.mantel_p = mt.p;
  s.n_perm = options.n_perm;
  s.rv_mode = options.rv_mode;
  s.rv = options.rv_mode == RvMode::data ? rv_coefficient(a, b) : rv_coefficient(c1, c2);
  const auto div = corr_dist_divergence(c1, c2);
  s.corr_kl = div.kl;
  s.corr_js = div.js;
  return s;
}

std::string corr_matrix_csv(const CorrMatrix& c) {
  std::string out = "question_id";
  for (const auto& id : c.question_ids) out += "," + detail::csv_field(id);
  out += "\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += detail::csv_field(c.question_ids[i]);
    for (std::size_t j = 0; j < c.size(); ++j) {
      out += c.defined(i, j) ? fmt::format(",{:.6f}", c.values(i, j)) : std::string(",");
    }
    out += "\n";
  }
  return out;
}

std::string overlap_csv(const CorrMatrix& c) {
  std::string out = "question_id";
  for (const auto& id : c.question_ids) out += "," + detail::csv_field(id);
  out += "\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    out += detail::csv_field(c.question_ids[i]);
    for (std::size_t j = 0; j < c.size(); ++j) out += fmt::format(",{}", c.overlap(i, j));
    out += "\n";
  }
  return out;
}

const char* to_string(RvMode mode) noexcept {
  return mode == RvMode::data ? "data" : "correlation";
}

RvMode rv_mode_from_string(const std::string& s) {
  if (s == "data") return RvMode::data;
  if (s == "correlation") return RvMode::correlation;
  throw InputError("unknown RV mode: " + s);
}

}  // namespace silfid
