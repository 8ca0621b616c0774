#include "silfid/pca.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>

#include "silfid/error.hpp"
#include "silfid/stats.hpp"
#include "text_util.hpp"

namespace silfid {

namespace {

using Index = Eigen::Index;

constexpr double kMinSd = 1e-12;

// Top-ncp eigenvectors of Z'Z, largest first.
Eigen::MatrixXd top_eigenvectors(const Eigen::MatrixXd& z, std::size_t ncp) {
  const Eigen::MatrixXd cov = z.transpose() * z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw DegenerateDataError("eigendecomposition failed");
  const auto k = static_cast<Index>(ncp);
  // Eigen returns ascending eigenvalues.
  return solver.eigenvectors().rightCols(k).rowwise().reverse();
}

}  // namespace

ImputedPanel iterative_impute(const ResponseMatrix& m, const ImputationConfig& cfg) {
  const std::size_t rows = m.rows(), cols = m.cols();
  if (cfg.ncp < 1 || cfg.ncp >= std::min(rows, cols)) {
    throw InputError(fmt::format("iterative_impute: ncp {} outside [1, {})", cfg.ncp,
                                 std::min(rows, cols)));
  }
  if (!(cfg.tolerance > 0)) throw InputError("iterative_impute: tolerance must be positive");

  ImputedPanel out;
  out.respondent_ids = m.respondent_ids();
  out.question_ids = m.question_ids();
  out.values.resize(static_cast<Index>(rows), static_cast<Index>(cols));

  std::vector<std::pair<Index, Index>> holes;
  for (std::size_t q = 0; q < cols; ++q) {
    const auto col = m.observed_column(q);
    if (col.empty()) {
      throw InputError("iterative_impute: question " + m.question_ids()[q] + " has no responses");
    }
    const double mu = stats::mean(col);
    for (std::size_t r = 0; r < rows; ++r) {
      const auto ri = static_cast<Index>(r), qi = static_cast<Index>(q);
      if (m.is_missing(r, q)) {
        out.values(ri, qi) = mu;
        holes.emplace_back(ri, qi);
      } else {
        out.values(ri, qi) = m.value(r, q);
      }
    }
  }
  out.imputed_cells = holes.size();
  if (holes.empty()) {
    out.iterations = 1;
    return out;
  }

  Eigen::MatrixXd& x = out.values;
  out.converged = false;
  for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
    const Eigen::RowVectorXd mu = x.colwise().mean();
    Eigen::MatrixXd z = x.rowwise() - mu;
    Eigen::RowVectorXd sd = (z.colwise().squaredNorm() / static_cast<double>(rows)).cwiseSqrt();
    for (Index q = 0; q < sd.size(); ++q) {
      if (sd(q) < kMinSd) sd(q) = 1.0;
    }
    z = z.array().rowwise() / sd.array();
    const Eigen::MatrixXd v = top_eigenvectors(z, cfg.ncp);
    const Eigen::MatrixXd recon =
        ((z * v * v.transpose()).array().rowwise() * sd.array()).matrix().rowwise() + mu;
    double sq = 0;
    for (const auto& [r, q] : holes) {
      const double d = recon(r, q) - x(r, q);
      sq += d * d;
      x(r, q) = recon(r, q);
    }
    out.iterations = it;
    out.final_rms_delta = std::sqrt(sq / static_cast<double>(holes.size()));
    if (out.final_rms_delta < cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  return out;
}

double PcaModel::cumulative_ratio(std::size_t k) const {
  const auto n = std::min<Index>(static_cast<Index>(k), explained_variance_ratio.size());
  return explained_variance_ratio.head(n).sum();
}

PcaModel fit_pca(const Eigen::MatrixXd& data, const std::vector<std::string>& question_ids) {
  if (static_cast<std::size_t>(data.cols()) != question_ids.size()) {
    throw InputError("fit_pca: question id count does not match columns");
  }
  if (data.rows() < 2) throw InputError("fit_pca: need at least two rows");
  const auto rows = static_cast<double>(data.rows());

  PcaModel model;
  std::vector<Index> kept;
  const Eigen::RowVectorXd mu = data.colwise().mean();
  const Eigen::RowVectorXd sd =
      ((data.rowwise() - mu).colwise().squaredNorm() / rows).cwiseSqrt();
  for (Index q = 0; q < data.cols(); ++q) {
    if (sd(q) < kMinSd) {
      model.dropped_question_ids.push_back(question_ids[static_cast<std::size_t>(q)]);
      model.warnings.push_back("dropped zero-variance question " +
                               question_ids[static_cast<std::size_t>(q)]);
    } else {
      kept.push_back(q);
      model.question_ids.push_back(question_ids[static_cast<std::size_t>(q)]);
    }
  }
  if (kept.size() < 2) {
    throw DegenerateDataError("fit_pca: fewer than two columns with non-zero variance");
  }
  const auto qe = static_cast<Index>(kept.size());
  Eigen::MatrixXd z(data.rows(), qe);
  model.column_mean.resize(qe);
  model.column_sd.resize(qe);
  for (Index c = 0; c < qe; ++c) {
    const Index q = kept[static_cast<std::size_t>(c)];
    model.column_mean(c) = mu(q);
    model.column_sd(c) = sd(q);
    z.col(c) = (data.col(q).array() - mu(q)) / sd(q);
  }
  const Eigen::MatrixXd corr = z.transpose() * z / rows;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success) throw DegenerateDataError("fit_pca: eigensolver failed");
  model.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
  model.loadings = solver.eigenvectors().rowwise().reverse();
  for (Index c = 0; c < qe; ++c) {
    Index arg = 0;
    model.loadings.col(c).cwiseAbs().maxCoeff(&arg);
    if (model.loadings(arg, c) < 0) model.loadings.col(c) *= -1.0;
  }
  model.explained_variance_ratio = model.eigenvalues / static_cast<double>(qe);
  model.scores = z * model.loadings;
  return model;
}

PcaModel fit_pca(const ImputedPanel& panel) { return fit_pca(panel.values, panel.question_ids); }

std::size_t count_significant(std::span<const double> ratios, double threshold) {
  return static_cast<std::size_t>(
      std::count_if(ratios.begin(), ratios.end(), [&](double r) { return r >= threshold; }));
}

std::size_t count_significant(const PcaModel& model, double threshold) {
  const auto& v = model.explained_variance_ratio;
  return count_significant(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
                           threshold);
}

namespace {

double safe_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  try {
    return stats::pearson(x, y);
  } catch (const DegenerateDataError&) {
    return 0.0;
  }
}

std::vector<std::size_t> top_by_magnitude(const std::vector<double>& v, std::size_t n) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t i, std::size_t j) { return std::fabs(v[i]) > std::fabs(v[j]); });
  idx.resize(std::min(n, idx.size()));
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

AlignmentResult align_components(const PcaModel& a, const PcaModel& b, std::size_t k) {
  if (k == 0 || k > kMaxAlignedComponents) {
    throw InputError(fmt::format("align_components: k must be in [1, {}]", kMaxAlignedComponents));
  }
  if (a.components() < k || b.components() < k) {
    throw InputError(fmt::format("align_components: models have {} and {} components, need {}",
                                 a.components(), b.components(), k));
  }
  std::set<std::string> ua(a.question_ids.begin(), a.question_ids.end());
  ua.insert(a.dropped_question_ids.begin(), a.dropped_question_ids.end());
  std::set<std::string> ub(b.question_ids.begin(), b.question_ids.end());
  ub.insert(b.dropped_question_ids.begin(), b.dropped_question_ids.end());
  if (ua != ub) throw AlignmentError("align_components: models cover different questions");

  std::vector<Index> ia, ib;
  for (std::size_t i = 0; i < a.question_ids.size(); ++i) {
    const auto it = std::find(b.question_ids.begin(), b.question_ids.end(), a.question_ids[i]);
    if (it == b.question_ids.end()) continue;
    ia.push_back(static_cast<Index>(i));
    ib.push_back(static_cast<Index>(it - b.question_ids.begin()));
  }
  if (ia.size() < 3) throw DegenerateDataError("align_components: fewer than 3 shared questions");

  auto restrict = [](const PcaModel& m, const std::vector<Index>& rows, std::size_t c) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (Index r : rows) v.push_back(m.loadings(r, static_cast<Index>(c)));
    return v;
  };
  std::vector<std::vector<double>> la(k), lb(k);
  for (std::size_t c = 0; c < k; ++c) {
    la[c] = restrict(a, ia, c);
    lb[c] = restrict(b, ib, c);
  }
  std::vector<std::vector<double>> r(k, std::vector<double>(k));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) r[i][j] = safe_pearson(la[i], lb[j]);
  }

  std::vector<std::size_t> perm(k), best;
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best_score = -1;
  do {
    double s = 0;
    for (std::size_t i = 0; i < k; ++i) s += std::fabs(r[i][perm[i]]);
    if (s > best_score + 1e-12) {
      best_score = s;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  AlignmentResult out;
  out.score = best_score;
  out.n_common_questions = ia.size();
  std::vector<double> flat_a, flat_b, flat_b_raw;
  double overlap_sum = 0;
  const std::size_t top_n = std::min<std::size_t>(5, ia.size());
  for (std::size_t i = 0; i < k; ++i) {
    ComponentPair p;
    p.a_component = i;
    p.b_component = best[i];
    p.r = r[i][best[i]];
    p.sign = p.r < 0 ? -1 : 1;
    const auto ta = top_by_magnitude(la[i], top_n);
    const auto tb = top_by_magnitude(lb[best[i]], top_n);
    std::vector<std::size_t> shared;
    std::set_intersection(ta.begin(), ta.end(), tb.begin(), tb.end(), std::back_inserter(shared));
    p.top5_overlap = static_cast<double>(shared.size()) / static_cast<double>(top_n);
    overlap_sum += p.top5_overlap;
    for (std::size_t q = 0; q < ia.size(); ++q) {
      flat_a.push_back(la[i][q]);
      flat_b.push_back(p.sign * lb[best[i]][q]);
      flat_b_raw.push_back(lb[best[i]][q]);
    }
    out.pairs.push_back(p);
  }
  out.flattened_r = safe_pearson(flat_a, flat_b);
  out.flattened_r_raw = safe_pearson(flat_a, flat_b_raw);
  out.mean_top5_overlap = overlap_sum / static_cast<double>(k);
  return out;
}

std::string loadings_csv(const PcaModel& model, std::size_t k) {
  const auto n = std::min(k, model.components());
  std::string out = "question_id";
  for (std::size_t c = 0; c < n; ++c) out += fmt::format(",PC{}", c + 1);
  out += "\n";
  for (std::size_t q = 0; q < model.question_ids.size(); ++q) {
    out += detail::csv_field(model.question_ids[q]);
    for (std::size_t c = 0; c < n; ++c) {
      out += fmt::format(",{:.6f}", model.loadings(static_cast<Index>(q), static_cast<Index>(c)));
    }
    out += "\n";
  }
  return out;
}

std::string ratios_csv(const PcaModel& model) {
  std::string out = "component,eigenvalue,ratio,cumulative\n";
  double cum = 0;
  for (Index c = 0; c < model.explained_variance_ratio.size(); ++c) {
    cum += model.explained_variance_ratio(c);
    out += fmt::format("PC{},{:.6f},{:.6f},{:.6f}\n", c + 1, model.eigenvalues(c),
                       model.explained_variance_ratio(c), cum);
  }
  return out;
}

}  // namespace silfid
