#include "silfid/synth.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "parallel.hpp"
#include "silfid/error.hpp"
#include "silfid/rng.hpp"

namespace silfid {

using nlohmann::json;
using Index = Eigen::Index;

Thresholds default_thresholds() {
  const boost::math::normal_distribution<double> n01;
  return {boost::math::quantile(n01, 0.10), boost::math::quantile(n01, 0.15),
          boost::math::quantile(n01, 0.175), boost::math::quantile(n01, 0.45)};
}

Eigen::MatrixXd block_loadings(std::size_t n_questions, std::size_t k) {
  if (k == 0) throw InputError("block_loadings: k must be positive");
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(static_cast<Index>(n_questions), static_cast<Index>(k));
  for (std::size_t q = 0; q < n_questions; ++q) l(static_cast<Index>(q), static_cast<Index>(q % k)) = 1.0;
  return l;
}

void FactorSpec::validate() const {
  if (n_respondents == 0 || n_questions == 0) throw InputError("synth: empty panel requested");
  if (k == 0) throw InputError("synth: need at least one factor");
  if (loadings.size() != 0 && (loadings.rows() != static_cast<Index>(n_questions) ||
                               loadings.cols() != static_cast<Index>(k))) {
    throw InputError(fmt::format("synth: loadings must be {} x {}", n_questions, k));
  }
  if (!(noise_sd >= 0) || !std::isfinite(noise_sd)) throw InputError("synth: noise sd must be >= 0");
  if (!(missing_rate >= 0 && missing_rate < 1)) throw InputError("synth: missing rate must be in [0, 1)");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    if (!std::isfinite(thresholds[i]) || (i > 0 && !(thresholds[i] > thresholds[i - 1]))) {
      throw InputError("synth: thresholds must be finite and strictly increasing");
    }
  }
}

StanceCode threshold_level(double latent, const Thresholds& t) noexcept {
  int level = -2;
  for (double cut : t) level += latent > cut ? 1 : 0;
  return StanceCode(level);
}

SynthPanel generate_panel(const FactorSpec& spec, std::string source_tag) {
  spec.validate();
  const auto R = static_cast<Index>(spec.n_respondents);
  const auto Q = static_cast<Index>(spec.n_questions);
  const auto K = static_cast<Index>(spec.k);

  SynthPanel out;
  GroundTruth& gt = out.truth;
  gt.loadings = spec.loadings.size() ? spec.loadings : block_loadings(spec.n_questions, spec.k);
  gt.thresholds = spec.thresholds;
  const Eigen::VectorXd var =
      gt.loadings.rowwise().squaredNorm().array() + spec.noise_sd * spec.noise_sd;
  const Eigen::VectorXd sd = var.cwiseSqrt();

  gt.latent_corr = gt.loadings * gt.loadings.transpose();
  for (Index i = 0; i < Q; ++i) {
    for (Index j = 0; j < Q; ++j) {
      gt.latent_corr(i, j) = i == j ? 1.0 : (sd(i) > 0 && sd(j) > 0 ? gt.latent_corr(i, j) / (sd(i) * sd(j)) : 0.0);
    }
  }

  gt.scores.resize(R, K);
  gt.latent.resize(R, Q);
  std::vector<double> values(spec.n_respondents * spec.n_questions);
  std::vector<std::uint8_t> missing(values.size(), 0);
  detail::parallel_for(spec.n_respondents, [&](std::size_t r) {
    auto rng = Rng::stream(spec.seed, r);
    const auto ri = static_cast<Index>(r);
    for (Index f = 0; f < K; ++f) gt.scores(ri, f) = rng.normal();
    for (Index q = 0; q < Q; ++q) {
      const double signal = gt.loadings.row(q).dot(gt.scores.row(ri));
      const double noise = spec.noise_sd * rng.normal();
      const double x = sd(q) > 0 ? (signal + noise) / sd(q) : 0.0;
      gt.latent(ri, q) = x;
      const std::size_t cell = r * spec.n_questions + static_cast<std::size_t>(q);
      values[cell] = normalize_code(threshold_level(x, spec.thresholds));
      missing[cell] = rng.uniform() < spec.missing_rate ? 1 : 0;
    }
  });

  std::vector<std::string> rids, qids;
  for (std::size_t r = 0; r < spec.n_respondents; ++r) rids.push_back(fmt::format("R{:05d}", r + 1));
  for (std::size_t q = 0; q < spec.n_questions; ++q) qids.push_back(fmt::format("Q{:03d}", q + 1));
  out.matrix = ResponseMatrix(std::move(rids), std::move(qids), std::move(values), std::move(missing),
                              std::move(source_tag));
  return out;
}

void CollapseTransform::validate() const {
  if (!(shrink >= 1.0) || !std::isfinite(shrink)) throw InputError("collapse: shrink factor must be >= 1");
  for (const auto& r : rules) {
    if (!(r.probability >= 0 && r.probability <= 1)) {
      throw InputError("collapse: rule probability must be in [0, 1]");
    }
  }
}

ResponseMatrix apply_collapse(const SynthPanel& panel, const CollapseTransform& t,
                              const FeatureMatrix* features, std::string source_tag) {
  t.validate();
  const auto& m = panel.matrix;
  const auto& latent = panel.truth.latent;
  if (latent.rows() != static_cast<Index>(m.rows()) || latent.cols() != static_cast<Index>(m.cols())) {
    throw InputError("apply_collapse: ground truth does not match the panel");
  }
  std::vector<double> values(m.values().begin(), m.values().end());
  std::vector<std::uint8_t> missing(m.missing_mask().begin(), m.missing_mask().end());
  // The standardised latent is Gaussian with its mode at 0.
  constexpr double mode = 0.0;
  if (t.shrink != 1.0) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      for (std::size_t q = 0; q < m.cols(); ++q) {
        if (missing[r * m.cols() + q]) continue;
        const double x = mode + (latent(static_cast<Index>(r), static_cast<Index>(q)) - mode) / t.shrink;
        values[r * m.cols() + q] = normalize_code(threshold_level(x, panel.truth.thresholds));
      }
    }
  }

  if (!t.rules.empty()) {
    if (features == nullptr) throw InputError("apply_collapse: stereotype rules need features");
    std::vector<std::size_t> frow(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const auto idx = features->respondent_index(m.respondent_ids()[r]);
      if (idx < 0) throw InputError("apply_collapse: no features for " + m.respondent_ids()[r]);
      frow[r] = static_cast<std::size_t>(idx);
    }
    for (std::size_t i = 0; i < t.rules.size(); ++i) {
      const auto& rule = t.rules[i];
      const auto f = features->feature_index(rule.feature);
      if (f < 0) throw InputError("apply_collapse: unknown feature " + rule.feature);
      const auto q = m.question_index(rule.question_id);
      if (!q) throw InputError("apply_collapse: unknown question " + rule.question_id);
      auto rng = Rng::stream(t.seed, i);
      for (std::size_t r = 0; r < m.rows(); ++r) {
        const std::size_t cell = r * m.cols() + *q;
        if (missing[cell] || !features->has(frow[r], static_cast<std::size_t>(f))) continue;
        if (rng.uniform() < rule.probability) values[cell] = normalize_code(rule.level);
      }
    }
  }
  return ResponseMatrix(m.respondent_ids(), m.question_ids(), std::move(values), std::move(missing),
                        std::move(source_tag));
}

namespace {

void check_prevalence(double p) {
  if (!(p >= 0 && p <= 1)) throw InputError("feature prevalence must be in [0, 1]");
}

}  // namespace

FeatureMatrix plant_null_feature(const ResponseMatrix& panel, const std::string& question_id,
                                 const std::string& name, double prevalence, std::uint64_t seed) {
  check_prevalence(prevalence);
  const auto q = panel.question_index(question_id);
  if (!q) throw InputError("plant_null_feature: unknown question " + question_id);
  // Strata: each observed value, plus the non-respondents (key 2).
  std::map<double, std::vector<std::size_t>> strata;
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    strata[panel.is_missing(r, *q) ? 2.0 : panel.value(r, *q)].push_back(r);
  }
  std::vector<std::uint8_t> ind(panel.rows(), 0);
  Rng rng(seed);
  for (auto& [key, rows] : strata) {
    rng.shuffle(rows);
    const auto take = static_cast<std::size_t>(std::llround(prevalence * static_cast<double>(rows.size())));
    for (std::size_t i = 0; i < take; ++i) ind[rows[i]] = 1;
  }
  return FeatureMatrix(panel.respondent_ids(), {name}, std::move(ind));
}

FeatureMatrix random_feature(const std::vector<std::string>& respondent_ids, const std::string& name,
                             double prevalence, std::uint64_t seed) {
  check_prevalence(prevalence);
  Rng rng(seed);
  std::vector<std::uint8_t> ind(respondent_ids.size());
  for (auto& v : ind) v = rng.uniform() < prevalence ? 1 : 0;
  return FeatureMatrix(respondent_ids, {name}, std::move(ind));
}

FeatureMatrix merge_features(const std::vector<FeatureMatrix>& parts) {
  if (parts.empty()) return {};
  const auto& rids = parts.front().respondent_ids();
  std::vector<std::string> names;
  for (const auto& p : parts) {
    if (p.respondent_ids() != rids) throw InputError("merge_features: respondent ids differ");
    names.insert(names.end(), p.feature_names().begin(), p.feature_names().end());
  }
  std::vector<std::uint8_t> ind;
  ind.reserve(rids.size() * names.size());
  for (std::size_t r = 0; r < rids.size(); ++r) {
    for (const auto& p : parts) {
      for (std::size_t f = 0; f < p.features(); ++f) ind.push_back(p.has(r, f) ? 1 : 0);
    }
  }
  return FeatureMatrix(rids, std::move(names), std::move(ind));
}

SynthConfig parse_synth_config(std::string_view json_text) {
  SynthConfig cfg;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("synth config: ") + e.what());
  }
  if (!j.is_object()) throw InputError("synth config: expected a JSON object");
  try {
    auto& s = cfg.spec;
    s.n_respondents = j.value("respondents", s.n_respondents);
    s.n_questions = j.value("questions", s.n_questions);
    s.k = j.value("factors", s.k);
    s.noise_sd = j.value("noise_sd", s.noise_sd);
    s.missing_rate = j.value("missing_rate", s.missing_rate);
    s.seed = j.value("seed", s.seed);
    if (j.contains("thresholds")) {
      const auto t = j.at("thresholds").get<std::vector<double>>();
      if (t.size() != 4) throw InputError("synth config: thresholds needs 4 values");
      std::copy(t.begin(), t.end(), s.thresholds.begin());
    }
    if (j.contains("loadings") && !j.at("loadings").is_string()) {
      const auto rows = j.at("loadings").get<std::vector<std::vector<double>>>();
      s.loadings.resize(static_cast<Index>(rows.size()), static_cast<Index>(s.k));
      for (std::size_t q = 0; q < rows.size(); ++q) {
        if (rows[q].size() != s.k) throw InputError("synth config: loading row has wrong length");
        for (std::size_t f = 0; f < s.k; ++f) s.loadings(static_cast<Index>(q), static_cast<Index>(f)) = rows[q][f];
      }
    } else if (j.contains("loadings") && j.at("loadings").get<std::string>() != "block") {
      throw InputError("synth config: loadings must be \"block\" or a matrix");
    }
    for (const auto& f : j.value("features", json::array())) {
      FeatureRequest req;
      req.name = f.at("name").get<std::string>();
      req.prevalence = f.value("prevalence", req.prevalence);
      if (f.contains("independent_of")) req.independent_of = f.at("independent_of").get<std::string>();
      cfg.features.push_back(std::move(req));
    }
    if (j.contains("collapse")) {
      const auto& c = j.at("collapse");
      CollapseTransform t;
      t.shrink = c.value("shrink", t.shrink);
      t.seed = c.value("seed", t.seed);
      for (const auto& r : c.value("rules", json::array())) {
        StereotypeRule rule;
        rule.feature = r.at("feature").get<std::string>();
        rule.question_id = r.at("question").get<std::string>();
        rule.level = code_stance(r.value("level", std::string("Accept")));
        rule.probability = r.value("probability", rule.probability);
        t.rules.push_back(std::move(rule));
      }
      t.validate();
      cfg.collapse = std::move(t);
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("synth config: ") + e.what());
  }
  cfg.spec.validate();
  return cfg;
}

std::string ground_truth_json(const SynthConfig& cfg, const SynthPanel& panel) {
  const auto& gt = panel.truth;
  auto rows_of = [](const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(m.cols()));
      for (Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
      out.push_back(row);
    }
    return out;
  };
  json j;
  j["respondents"] = cfg.spec.n_respondents;
  j["questions"] = cfg.spec.n_questions;
  j["factors"] = cfg.spec.k;
  j["noise_sd"] = cfg.spec.noise_sd;
  j["missing_rate"] = cfg.spec.missing_rate;
  j["seed"] = cfg.spec.seed;
  j["thresholds"] = std::vector<double>(gt.thresholds.begin(), gt.thresholds.end());
  j["question_ids"] = panel.matrix.question_ids();
  j["loadings"] = rows_of(gt.loadings);
  j["latent_corr"] = rows_of(gt.latent_corr);
  j["scores"] = rows_of(gt.scores);
  if (cfg.collapse) {
    json rules = json::array();
    for (const auto& r : cfg.collapse->rules) {
      rules.push_back({{"feature", r.feature}, {"question", r.question_id},
                       {"level", std::string(r.level.label())}, {"probability", r.probability}});
    }
    j["collapse"] = {{"shrink", cfg.collapse->shrink}, {"seed", cfg.collapse->seed}, {"rules", rules}};
  }
  return j.dump(1) + "\n";
}

}  // namespace silfid
