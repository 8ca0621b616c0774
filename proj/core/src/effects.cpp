#include "silfid/effects.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "parallel.hpp"
#include "silfid/error.hpp"
#include "silfid/ingest.hpp"
#include "text_util.hpp"

namespace silfid {

FeatureMatrix::FeatureMatrix(std::vector<std::string> respondent_ids,
                             std::vector<std::string> feature_names,
                             std::vector<std::uint8_t> indicators)
    : rids_(std::move(respondent_ids)), names_(std::move(feature_names)), ind_(std::move(indicators)) {
  if (ind_.size() != rids_.size() * names_.size()) {
    throw InputError("feature matrix: indicator count does not match dimensions");
  }
  if (std::unordered_set<std::string>(rids_.begin(), rids_.end()).size() != rids_.size()) {
    throw InputError("feature matrix: duplicate respondent id");
  }
  if (std::unordered_set<std::string>(names_.begin(), names_.end()).size() != names_.size()) {
    throw InputError("feature matrix: duplicate feature name");
  }
  for (auto v : ind_) {
    if (v > 1) throw InputError("feature matrix: indicators must be 0 or 1");
  }
}

std::ptrdiff_t FeatureMatrix::respondent_index(const std::string& id) const {
  const auto it = std::find(rids_.begin(), rids_.end(), id);
  return it == rids_.end() ? -1 : it - rids_.begin();
}

std::ptrdiff_t FeatureMatrix::feature_index(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : it - names_.begin();
}

namespace {

std::vector<std::string> profile_features(const Profile& p) {
  std::vector<std::string> out;
  for (const auto& a : p.aos) out.push_back("AOS: " + a);
  for (const auto& a : p.aoi) out.push_back("AOI: " + a);
  out.push_back("PhD country: " + p.phd_country.value_or("Unknown"));
  if (p.phd_year) {
    const int lo = *p.phd_year - (*p.phd_year % kPhdYearBinWidth);
    out.push_back(fmt::format("PhD year: {}-{}", lo, lo + kPhdYearBinWidth - 1));
  }
  return out;
}

}  // namespace

FeatureMatrix build_features(const std::vector<Profile>& profiles,
                             const std::vector<std::string>& respondent_ids) {
  const auto index = index_profiles(profiles);
  std::vector<std::vector<std::string>> per_row;
  std::set<std::string> names;
  for (const auto& id : respondent_ids) {
    const auto it = index.find(id);
    if (it == index.end()) throw InputError("no profile for respondent " + id);
    per_row.push_back(profile_features(*it->second));
    names.insert(per_row.back().begin(), per_row.back().end());
  }
  std::vector<std::string> ordered(names.begin(), names.end());
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < ordered.size(); ++i) col[ordered[i]] = i;
  std::vector<std::uint8_t> ind(respondent_ids.size() * ordered.size(), 0);
  for (std::size_t r = 0; r < per_row.size(); ++r) {
    for (const auto& f : per_row[r]) ind[r * ordered.size() + col[f]] = 1;
  }
  return FeatureMatrix(respondent_ids, std::move(ordered), std::move(ind));
}

EffectScan effect_scan(const ResponseMatrix& panel, const FeatureMatrix& features,
                       std::size_t min_valid) {
  std::vector<std::size_t> feature_row(panel.rows());
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    const auto idx = features.respondent_index(panel.respondent_ids()[r]);
    if (idx < 0) {
      throw AlignmentError("effect_scan: no features for respondent " + panel.respondent_ids()[r]);
    }
    feature_row[r] = static_cast<std::size_t>(idx);
  }

  const std::size_t nf = features.features();
  std::vector<std::vector<EffectTest>> per_feature(nf);
  std::vector<std::size_t> skipped(nf, 0);
  detail::parallel_for(nf, [&](std::size_t f) {
    std::vector<double> with, without;
    for (std::size_t q = 0; q < panel.cols(); ++q) {
      with.clear();
      without.clear();
      stats::Contingency2x2 t;
      for (std::size_t r = 0; r < panel.rows(); ++r) {
        if (panel.is_missing(r, q)) continue;
        const double v = panel.value(r, q);
        const bool has = features.has(feature_row[r], f);
        (has ? with : without).push_back(v);
        if (v > 0.5) (has ? t.a : t.c) += 1;
        if (v < 0.5) (has ? t.b : t.d) += 1;
      }
      if (with.size() + without.size() < min_valid || with.empty() || without.empty()) {
        ++skipped[f];
        continue;
      }
      EffectTest e;
      e.feature = features.feature_names()[f];
      e.question_id = panel.question_ids()[q];
      e.n_with = with.size();
      e.n_without = without.size();
      e.mean_with = stats::mean(with);
      e.mean_without = stats::mean(without);
      e.diff_pp = (e.mean_with - e.mean_without) * 100.0;
      e.table = t;
      e.chi2_yates = stats::chi_squared_yates(t);
      e.p_chi2 = stats::chi_squared_sf(e.chi2_yates, 1.0);
      const auto w = stats::welch_t_test(with, without);
      e.welch_t = w.t;
      e.welch_dof = w.dof;
      e.p_t = w.p;
      e.welch_defined = w.defined;
      per_feature[f].push_back(std::move(e));
    }
  });

  EffectScan scan;
  for (std::size_t f = 0; f < nf; ++f) {
    scan.ineligible_pairs += skipped[f];
    for (auto& e : per_feature[f]) scan.tests.push_back(std::move(e));
  }
  const auto n_tests = static_cast<double>(scan.tests.size());
  for (auto& e : scan.tests) {
    e.p_chi2_bonferroni = std::min(1.0, e.p_chi2 * n_tests);
    e.p_t_bonferroni = std::min(1.0, e.p_t * n_tests);
  }
  return scan;
}

const char* to_string(EffectClass c) noexcept {
  switch (c) {
    case EffectClass::matching: return "matching";
    case EffectClass::amplified: return "amplified";
    case EffectClass::spurious: return "spurious";
    default: return "absent";
  }
}

const char* to_string(GateTest t) noexcept { return t == GateTest::chi2 ? "chi2" : "welch"; }

GateTest gate_test_from_string(const std::string& s) {
  if (s == "chi2") return GateTest::chi2;
  if (s == "welch") return GateTest::welch;
  throw InputError("unknown gate test: " + s);
}

namespace {

using Key = std::pair<std::string, std::string>;

double gate_p(const EffectTest& e, GateTest g) { return g == GateTest::chi2 ? e.p_chi2 : e.p_t; }
double gate_p_adj(const EffectTest& e, GateTest g) {
  return g == GateTest::chi2 ? e.p_chi2_bonferroni : e.p_t_bonferroni;
}

bool same_sign(double a, double b) { return (a > 0 && b > 0) || (a < 0 && b < 0); }

EffectClass classify(const SpuriousVerdict& v, const ClassifyOptions& o) {
  if (v.n_models_significant == 0) return EffectClass::absent;
  const double gt = v.gt_diff_pp;
  const double model = v.model_diff_pp;
  const bool larger = std::fabs(model) >= o.amplification * std::fabs(gt);
  if (v.gt_significant) {
    if (!same_sign(gt, model)) return EffectClass::absent;
    return larger ? EffectClass::amplified : EffectClass::matching;
  }
  if (same_sign(gt, model) && std::fabs(gt) >= o.small_diff_pp && larger) {
    return EffectClass::amplified;
  }
  return EffectClass::spurious;
}

}  // namespace

std::vector<SpuriousVerdict> classify_spurious(const std::vector<EffectTest>& gt,
                                               const std::vector<NamedEffects>& models,
                                               const ClassifyOptions& options) {
  std::vector<std::map<Key, const EffectTest*>> lookup(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    for (const auto& e : models[m].second) lookup[m][{e.feature, e.question_id}] = &e;
  }
  std::vector<SpuriousVerdict> out;
  for (const auto& g : gt) {
    SpuriousVerdict v;
    v.feature = g.feature;
    v.question_id = g.question_id;
    v.gt_diff_pp = g.diff_pp;
    v.gt_p = gate_p(g, options.gate);
    v.gt_p_bonferroni = gate_p_adj(g, options.gate);
    v.gt_significant = v.gt_p < options.alpha;
    double sig_sum = 0, all_sum = 0;
    for (std::size_t m = 0; m < models.size(); ++m) {
      const auto it = lookup[m].find({g.feature, g.question_id});
      if (it == lookup[m].end()) continue;
      const EffectTest& e = *it->second;
      ModelEffect me{models[m].first, e.diff_pp, gate_p(e, options.gate),
                     gate_p_adj(e, options.gate), false};
      me.significant = me.p < options.alpha;
      if (me.significant) {
        ++v.n_models_significant;
        sig_sum += e.diff_pp;
      }
      all_sum += e.diff_pp;
      v.models.push_back(std::move(me));
    }
    if (v.models.empty()) continue;
    v.model_diff_pp = v.n_models_significant > 0
                          ? sig_sum / static_cast<double>(v.n_models_significant)
                          : all_sum / static_cast<double>(v.models.size());
    v.classification = classify(v, options);
    out.push_back(std::move(v));
  }
  return out;
}

RmseTable per_question_rmse(const ResponseMatrix& gt, const ResponseMatrix& model) {
  if (!same_basis(gt, model)) throw AlignmentError("per_question_rmse: panels are not aligned");
  RmseTable t;
  double total = 0;
  for (std::size_t q = 0; q < gt.cols(); ++q) {
    double sq = 0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < gt.rows(); ++r) {
      if (gt.is_missing(r, q) || model.is_missing(r, q)) continue;
      const double d = gt.value(r, q) - model.value(r, q);
      sq += d * d;
      ++n;
    }
    if (n == 0) {
      t.skipped.push_back(gt.question_ids()[q]);
      continue;
    }
    t.questions.push_back({gt.question_ids()[q], std::sqrt(sq / static_cast<double>(n)), n});
    total += t.questions.back().rmse;
  }
  if (!t.questions.empty()) t.panel_mean = total / static_cast<double>(t.questions.size());
  return t;
}

RmseTable average_rmse(const std::vector<RmseTable>& tables) {
  std::vector<std::string> order;
  std::map<std::string, std::pair<double, std::size_t>> acc;
  std::map<std::string, std::size_t> cells;
  std::set<std::string> skipped;
  for (const auto& t : tables) {
    for (const auto& q : t.questions) {
      if (!acc.count(q.question_id)) order.push_back(q.question_id);
      auto& [sum, n] = acc[q.question_id];
      sum += q.rmse;
      ++n;
      cells[q.question_id] += q.n_cells;
    }
    skipped.insert(t.skipped.begin(), t.skipped.end());
  }
  RmseTable out;
  double total = 0;
  for (const auto& id : order) {
    const auto& [sum, n] = acc[id];
    out.questions.push_back({id, sum / static_cast<double>(n), cells[id]});
    total += out.questions.back().rmse;
    skipped.erase(id);
  }
  out.skipped.assign(skipped.begin(), skipped.end());
  if (!out.questions.empty()) out.panel_mean = total / static_cast<double>(out.questions.size());
  return out;
}

namespace {

std::optional<double> question_variance(const ResponseMatrix& m, const std::string& id,
                                        stats::VarianceConvention convention) {
  const auto q = m.question_index(id);
  if (!q) return std::nullopt;
  const auto col = m.observed_column(*q);
  if (col.size() < 2) return std::nullopt;
  return stats::variance(col, convention);
}

}  // namespace

std::vector<DomainRow> domain_rmse(const RmseTable& table, const QuestionCatalog& catalog,
                                   const ResponseMatrix& human,
                                   stats::VarianceConvention convention) {
  struct Acc {
    double rmse = 0, var = 0;
    std::size_t n = 0, n_var = 0;
  };
  std::map<std::string, Acc> acc;
  for (const auto& q : table.questions) {
    const auto* spec = catalog.find(q.question_id);
    if (spec == nullptr || spec->domain.empty()) {
      throw InputError("domain_rmse: question " + q.question_id + " has no domain");
    }
    auto& a = acc[spec->domain];
    a.rmse += q.rmse;
    ++a.n;
    if (const auto v = question_variance(human, q.question_id, convention)) {
      a.var += *v;
      ++a.n_var;
    }
  }
  std::vector<DomainRow> rows;
  for (const auto& [domain, a] : acc) {
    rows.push_back({domain, a.rmse / static_cast<double>(a.n),
                    a.n_var ? a.var / static_cast<double>(a.n_var)
                            : std::numeric_limits<double>::quiet_NaN(),
                    a.n});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const DomainRow& x, const DomainRow& y) { return x.rmse < y.rmse; });
  return rows;
}

CorrelationTest rmse_variance_corr(const RmseTable& table, const ResponseMatrix& human,
                                   stats::VarianceConvention convention) {
  std::vector<double> x, y;
  for (const auto& q : table.questions) {
    if (const auto v = question_variance(human, q.question_id, convention)) {
      x.push_back(q.rmse);
      y.push_back(*v);
    }
  }
  if (x.size() < 3) throw DegenerateDataError("rmse_variance_corr: fewer than 3 questions");
  CorrelationTest t;
  t.n_pairs = x.size();
  t.r = stats::pearson(x, y);
  t.p = stats::pearson_p_value(t.r, t.n_pairs);
  return t;
}

std::string effects_csv(const std::vector<EffectTest>& tests) {
  std::string out =
      "feature,question_id,n_with,n_without,mean_with,mean_without,diff_pp,a,b,c,d,"
      "chi2_yates,p_chi2,p_chi2_bonferroni,welch_t,welch_dof,p_t,p_t_bonferroni\n";
  for (const auto& e : tests) {
    out += fmt::format("{},{},{},{},{:.6f},{:.6f},{:.4f},{},{},{},{},{:.6f},{:.6g},{:.6g},{:.6f},{:.4f},{:.6g},{:.6g}\n",
                       detail::csv_field(e.feature), detail::csv_field(e.question_id), e.n_with,
                       e.n_without, e.mean_with, e.mean_without, e.diff_pp, e.table.a, e.table.b,
                       e.table.c, e.table.d, e.chi2_yates, e.p_chi2, e.p_chi2_bonferroni,
                       e.welch_t, e.welch_dof, e.p_t, e.p_t_bonferroni);
  }
  return out;
}

std::string verdicts_csv(const std::vector<SpuriousVerdict>& verdicts) {
  std::string out =
      "feature,question_id,gt_diff_pp,gt_p,gt_p_bonferroni,gt_significant,model_diff_pp,"
      "models_significant,models,classification\n";
  for (const auto& v : verdicts) {
    out += fmt::format("{},{},{:.4f},{:.6g},{:.6g},{},{:.4f},{},{},{}\n",
                       detail::csv_field(v.feature), detail::csv_field(v.question_id),
                       v.gt_diff_pp, v.gt_p, v.gt_p_bonferroni, v.gt_significant ? 1 : 0,
                       v.model_diff_pp, v.n_models_significant, v.models.size(),
                       to_string(v.classification));
  }
  return out;
}

std::string rmse_csv(const RmseTable& table) {
  std::string out = "question_id,rmse,n_cells\n";
  for (const auto& q : table.questions) {
    out += fmt::format("{},{:.6f},{}\n", detail::csv_field(q.question_id), q.rmse, q.n_cells);
  }
  return out;
}

std::string domain_csv(const std::vector<DomainRow>& rows) {
  std::string out = "domain,rmse,human_variance,n_questions\n";
  for (const auto& d : rows) {
    out += fmt::format("{},{:.6f},{:.6f},{}\n", detail::csv_field(d.domain), d.rmse,
                       d.human_variance, d.n_questions);
  }
  return out;
}

}  // namespace silfid
