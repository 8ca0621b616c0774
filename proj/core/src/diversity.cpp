#include "silfid/diversity.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "silfid/error.hpp"
#include "silfid/stance.hpp"
#include "silfid/stats.hpp"
#include "text_util.hpp"

namespace silfid {

double shannon_entropy(std::span<const double> proportions) {
  double total = 0;
  for (double p : proportions) {
    if (!(p >= 0.0)) throw InputError("entropy: negative or NaN proportion");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    throw InputError(fmt::format("entropy: proportions sum to {} (expected 1)", total));
  }
  double h = 0;
  for (double p : proportions) {
    if (p > 0) h -= p * std::log2(p);
  }
  return h;
}

std::vector<QuestionDiversity> question_diversity(const ResponseMatrix& panel) {
  std::vector<QuestionDiversity> out(panel.cols());
  for (std::size_t q = 0; q < panel.cols(); ++q) {
    auto& d = out[q];
    d.question_id = panel.question_ids()[q];
    const auto col = panel.observed_column(q);
    d.n = col.size();
    if (d.n == 0) continue;
    for (double v : col) ++d.level_counts[static_cast<std::size_t>(nearest_stance(v).level() + 2)];
    std::array<double, 5> p{};
    for (std::size_t i = 0; i < 5; ++i) {
      p[i] = static_cast<double>(d.level_counts[i]) / static_cast<double>(d.n);
    }
    // Proportions from integer counts can miss 1.0 by an ulp or two.
    d.entropy_bits = 0;
    for (double pi : p) {
      if (pi > 0) d.entropy_bits -= pi * std::log2(pi);
    }
    d.mode_share = *std::max_element(p.begin(), p.end());
    d.variance = d.n >= 2 ? stats::variance(col) : 0.0;
  }
  return out;
}

namespace {

double mean_variance(const std::vector<QuestionDiversity>& qs) {
  double total = 0;
  std::size_t n = 0;
  for (const auto& q : qs) {
    if (q.n >= 2) {
      total += q.variance;
      ++n;
    }
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

}  // namespace

DiversityStats diversity_stats(const ResponseMatrix& panel) {
  DiversityStats s;
  s.questions = question_diversity(panel);
  std::size_t answered = 0;
  std::array<std::size_t, 5> level_totals{};
  std::size_t responses = 0;
  for (const auto& q : s.questions) {
    if (q.n == 0) continue;
    ++answered;
    s.mean_entropy_bits += q.entropy_bits;
    s.mean_mode_share += q.mode_share;
    if (q.mode_share > kNearUniformModeShare) ++s.near_uniform_questions;
    if (q.n >= 2 && q.variance == 0.0) ++s.zero_variance_questions;
    for (std::size_t i = 0; i < 5; ++i) level_totals[i] += q.level_counts[i];
    responses += q.n;
  }
  if (answered == 0) {
    throw InputError("panel " + panel.source_tag() + " has no answered questions");
  }
  s.mean_entropy_bits /= static_cast<double>(answered);
  s.mean_mode_share /= static_cast<double>(answered);
  s.effective_categories = std::exp2(s.mean_entropy_bits);
  s.mean_variance = mean_variance(s.questions);
  for (std::size_t i = 0; i < 5; ++i) {
    s.level_shares[i] = static_cast<double>(level_totals[i]) / static_cast<double>(responses);
  }
  return s;
}

DiversityStats mode_collapse_report(const ResponseMatrix& panel, const ResponseMatrix& reference) {
  if (panel.question_ids() != reference.question_ids()) {
    throw AlignmentError("mode collapse report: panels are not aligned on questions");
  }
  DiversityStats s = diversity_stats(panel);
  if (&panel == &reference || panel == reference) {
    s.collapse_ratio = 1.0;
    return s;
  }
  const double ref_var = mean_variance(question_diversity(reference));
  s.collapse_ratio = s.mean_variance > 0 ? ref_var / s.mean_variance
                                         : std::numeric_limits<double>::infinity();
  return s;
}

std::string diversity_csv(const DiversityStats& stats) {
  std::string out = "question_id,H,variance,mode_share,n\n";
  for (const auto& q : stats.questions) {
    out += fmt::format("{},{:.6f},{:.6f},{:.6f},{}\n", detail::csv_field(q.question_id), q.entropy_bits, q.variance,
                       q.mode_share, q.n);
  }
  return out;
}

}  // namespace silfid
