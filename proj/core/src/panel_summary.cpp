#include "silfid/panel_summary.hpp"

#include "silfid/error.hpp"

namespace silfid {

std::vector<std::optional<double>> per_question_variance(const ResponseMatrix& m,
                                                         stats::VarianceConvention convention) {
  std::vector<std::optional<double>> out(m.cols());
  for (std::size_t q = 0; q < m.cols(); ++q) {
    const auto col = m.observed_column(q);
    if (col.size() >= 2) out[q] = stats::variance(col, convention);
  }
  return out;
}

PanelSummary panel_summary(const ResponseMatrix& m, stats::VarianceConvention convention) {
  if (m.empty()) throw InputError("panel summary of an empty matrix");
  PanelSummary s;
  s.n_respondents = m.rows();
  s.n_questions = m.cols();
  s.n_responses = m.observed_count();
  s.response_rate = static_cast<double>(s.n_responses) / static_cast<double>(m.rows() * m.cols());
  s.convention = convention;
  double total = 0;
  std::size_t counted = 0;
  for (const auto& v : per_question_variance(m, convention)) {
    if (v) {
      total += *v;
      ++counted;
    }
  }
  if (counted > 0) s.mean_per_question_variance = total / static_cast<double>(counted);
  return s;
}

}  // namespace silfid
