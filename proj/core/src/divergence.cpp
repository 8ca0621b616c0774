#include "silfid/divergence.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "silfid/error.hpp"
#include "silfid/ingest.hpp"
#include "silfid/stats.hpp"
#include "text_util.hpp"

namespace silfid {

Histogram histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
  if (values.empty()) throw InputError("histogram of an empty sample");
  if (!(hi > lo) || bins == 0) throw InputError("histogram: invalid range or bin count");
  Histogram h;
  h.edges.resize(bins + 1);
  // (hi - lo) * i / bins keeps grid points such as 0.75 exactly on an edge.
  for (std::size_t i = 0; i <= bins; ++i) {
    h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  }
  h.edges.back() = hi;
  std::vector<std::size_t> counts(bins, 0);
  for (double v : values) {
    if (!(v >= lo && v <= hi)) {
      throw InputError(fmt::format("histogram: value {} outside [{}, {}]", v, lo, hi));
    }
    auto it = std::upper_bound(h.edges.begin(), h.edges.end(), v);
    auto bin = static_cast<std::size_t>(std::distance(h.edges.begin(), it)) - 1;
    ++counts[std::min(bin, bins - 1)];
  }
  h.n_samples = values.size();
  h.mass.resize(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    h.mass[i] = static_cast<double>(counts[i]) / static_cast<double>(values.size());
  }
  return h;
}

namespace {

void check_edges(const Histogram& p, const Histogram& q) {
  if (p.edges.size() != q.edges.size() || p.mass.size() != q.mass.size()) {
    throw InputError("divergence: histograms have different bin counts");
  }
  for (std::size_t i = 0; i < p.edges.size(); ++i) {
    if (std::fabs(p.edges[i] - q.edges[i]) > 1e-12) {
      throw InputError("divergence: histograms have different bin edges");
    }
  }
}

std::vector<double> smoothed(const std::vector<double>& mass) {
  std::vector<double> out(mass.size());
  double total = 0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    out[i] = mass[i] + kSmoothingEpsilon;
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

double kl_raw(const std::vector<double>& p, const std::vector<double>& q) {
  double d = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) d += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(0.0, d);
}

}  // namespace

double kl_divergence(const Histogram& p, const Histogram& q) {
  check_edges(p, q);
  return kl_raw(smoothed(p.mass), smoothed(q.mass));
}

double js_divergence(const Histogram& p, const Histogram& q) {
  check_edges(p, q);
  const auto ps = smoothed(p.mass);
  const auto qs = smoothed(q.mass);
  std::vector<double> m(ps.size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (ps[i] + qs[i]);
  return std::min(0.5 * kl_raw(ps, m) + 0.5 * kl_raw(qs, m), std::log(2.0));
}

namespace {

struct MatchedCells {
  std::vector<double> a;
  std::vector<double> b;
};

MatchedCells matched_cells(const ResponseMatrix& a, const ResponseMatrix& b) {
  MatchedCells m;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t q = 0; q < a.cols(); ++q) {
      if (!a.is_missing(r, q) && !b.is_missing(r, q)) {
        m.a.push_back(a.value(r, q));
        m.b.push_back(b.value(r, q));
      }
    }
  }
  return m;
}

double pearson_or_nan(std::span<const double> x, std::span<const double> y) {
  try {
    return stats::pearson(x, y);
  } catch (const DegenerateDataError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

MatrixSimilarity flattened_similarity(const ResponseMatrix& a, const ResponseMatrix& b) {
  if (!same_basis(a, b)) {
    throw AlignmentError("flattened similarity: panels " + a.source_tag() + " and " +
                         b.source_tag() + " are not aligned");
  }
  const auto cells = matched_cells(a, b);
  if (cells.a.size() < 2) {
    throw DegenerateDataError("flattened similarity: fewer than two matched cells");
  }
  MatrixSimilarity s;
  s.n_matched_cells = cells.a.size();
  const auto ha = histogram(cells.a, 0.0, 1.0);
  const auto hb = histogram(cells.b, 0.0, 1.0);
  s.kl = kl_divergence(ha, hb);
  s.js = js_divergence(ha, hb);
  s.pearson_r = pearson_or_nan(cells.a, cells.b);
  return s;
}

PairwiseSimilarity pairwise_similarity(std::span<const ResponseMatrix> panels) {
  PairwiseSimilarity out;
  const std::size_t n = panels.size();
  out.kl.assign(n, std::vector<double>(n, 0.0));
  out.js.assign(n, std::vector<double>(n, 0.0));
  out.pearson_r.assign(n, std::vector<double>(n, 1.0));
  for (const auto& p : panels) out.sources.push_back(p.source_tag());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto [a, b] = align_panels(panels[i], panels[j]);
      const auto s = flattened_similarity(a, b);
      out.kl[i][j] = s.kl;
      out.js[i][j] = s.js;
      out.pearson_r[i][j] = s.pearson_r;
    }
  }
  return out;
}

std::string similarity_matrix_csv(const PairwiseSimilarity& s, SimilarityMetric metric) {
  const auto& grid = metric == SimilarityMetric::kl   ? s.kl
                     : metric == SimilarityMetric::js ? s.js
                                                      : s.pearson_r;
  std::string out = metric == SimilarityMetric::kl ? "kl(row||col)" : "source";
  for (const auto& src : s.sources) out += "," + detail::csv_field(src);
  out += "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += detail::csv_field(s.sources[i]);
    for (double v : grid[i]) out += fmt::format(",{:.6f}", v);
    out += "\n";
  }
  return out;
}

PromptSensitivity compare_prompt_variants(const ResponseMatrix& baseline,
                                          const ResponseMatrix& variant) {
  const auto [a, b] = align_panels(baseline, variant);
  const auto cells = matched_cells(a, b);
  if (cells.a.size() < 2) throw DegenerateDataError("prompt sensitivity: fewer than two pairs");
  PromptSensitivity s;
  s.n_pairs = cells.a.size();
  double abs_sum = 0, sq_sum = 0, shift = 0;
  std::size_t flips = 0;
  for (std::size_t i = 0; i < s.n_pairs; ++i) {
    const double d = cells.b[i] - cells.a[i];
    abs_sum += std::fabs(d);
    sq_sum += d * d;
    shift += d;
    if (std::fabs(d) > kFlipThreshold) ++flips;
  }
  const double n = static_cast<double>(s.n_pairs);
  s.mean_abs_diff = abs_sum / n;
  s.rmse = std::sqrt(sq_sum / n);
  s.mean_shift = shift / n;
  s.flip_rate = static_cast<double>(flips) / n;
  s.pearson_r = pearson_or_nan(cells.a, cells.b);
  return s;
}

ConditionedCorrelation conditioned_correlation(const ResponseMatrix& human,
                                               const ResponseMatrix& model,
                                               double min_model_variance) {
  if (!same_basis(human, model)) {
    throw AlignmentError("conditioned correlation: panels are not aligned");
  }
  ConditionedCorrelation out;
  std::vector<double> xs, ys;
  for (std::size_t q = 0; q < model.cols(); ++q) {
    const auto col = model.observed_column(q);
    if (col.size() < 2 || stats::variance(col) <= min_model_variance) continue;
    ++out.n_questions;
    for (std::size_t r = 0; r < model.rows(); ++r) {
      if (!human.is_missing(r, q) && !model.is_missing(r, q)) {
        xs.push_back(human.value(r, q));
        ys.push_back(model.value(r, q));
      }
    }
  }
  out.n_cells = xs.size();
  out.pearson_r = xs.size() >= 2 ? pearson_or_nan(xs, ys) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace silfid
