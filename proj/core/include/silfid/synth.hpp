#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "silfid/effects.hpp"
#include "silfid/response_matrix.hpp"
#include "silfid/stance.hpp"

namespace silfid {

/// Four cut points on the standardised latent scale; level i+1 starts above
/// cut i.
using Thresholds = std::array<double, 4>;

/// Standard-normal quantiles at 0.10, 0.15, 0.175 and 0.45, giving level
/// shares of 10 / 5 / 2.5 / 27.5 / 55 percent (Reject .. Accept).
Thresholds default_thresholds();

/// Q x k matrix where question q loads 1 on factor q mod k.
Eigen::MatrixXd block_loadings(std::size_t n_questions, std::size_t k);

struct FactorSpec {
  std::size_t n_respondents = 1000;
  std::size_t n_questions = 30;
  std::size_t k = 3;
  /// Q x k; empty means block_loadings(n_questions, k).
  Eigen::MatrixXd loadings;
  double noise_sd = 0.5;
  Thresholds thresholds = default_thresholds();
  double missing_rate = 0.0;
  std::uint64_t seed = 0;

  /// Throws InputError on a violated invariant.
  void validate() const;
};

struct GroundTruth {
  Eigen::MatrixXd loadings;
  /// R x k factor scores.
  Eigen::MatrixXd scores;
  /// R x Q latent values, standardised per question before thresholding.
  Eigen::MatrixXd latent;
  /// Q x Q correlation of the latent variables implied by the loadings.
  Eigen::MatrixXd latent_corr;
  Thresholds thresholds{};
};

struct SynthPanel {
  ResponseMatrix matrix;
  GroundTruth truth;
};

/// latent = (z L' + noise) / sd per question, thresholded to five levels.
/// Respondent r draws from its own stream of `seed`, so output does not
/// depend on thread count.
SynthPanel generate_panel(const FactorSpec& spec, std::string source_tag = "synth");

StanceCode threshold_level(double latent, const Thresholds& t) noexcept;

struct StereotypeRule {
  std::string feature;
  std::string question_id;
  StanceCode level = StanceCode::accept();
  double probability = 1.0;
};

struct CollapseTransform {
  /// Latent deviations from the mode are divided by this before thresholding.
  double shrink = 1.0;
  std::vector<StereotypeRule> rules;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Re-thresholds the shrunken latent and applies stereotype rules to
/// observed cells of respondents carrying the feature. The missing mask is
/// never changed. Throws InputError for a rule naming an unknown feature or
/// question, or when rules are present and `features` is null or misses a
/// respondent.
ResponseMatrix apply_collapse(const SynthPanel& panel, const CollapseTransform& t,
                              const FeatureMatrix* features, std::string source_tag = "collapsed");

/// One feature whose holders are drawn at `prevalence` within every answer
/// level of `question_id` (and among non-respondents), so the feature has no
/// association with that question in `panel`.
FeatureMatrix plant_null_feature(const ResponseMatrix& panel, const std::string& question_id,
                                 const std::string& name, double prevalence, std::uint64_t seed);

/// Independent Bernoulli feature.
FeatureMatrix random_feature(const std::vector<std::string>& respondent_ids,
                             const std::string& name, double prevalence, std::uint64_t seed);

/// Column-wise union of feature matrices over the same respondents.
FeatureMatrix merge_features(const std::vector<FeatureMatrix>& parts);

struct FeatureRequest {
  std::string name;
  double prevalence = 0.2;
  /// When set, the feature is planted independent of this question.
  std::optional<std::string> independent_of;
};

/// Declarative synth run: panel spec, optional features, optional collapse.
struct SynthConfig {
  FactorSpec spec;
  std::vector<FeatureRequest> features;
  std::optional<CollapseTransform> collapse;
};

/// JSON keys: respondents, questions, factors, noise_sd, missing_rate, seed,
/// thresholds (4 numbers), loadings ("block" or Q rows of k numbers),
/// features [{name, prevalence, independent_of}],
/// collapse {shrink, seed, rules [{feature, question, level, probability}]}.
SynthConfig parse_synth_config(std::string_view json_text);

std::string ground_truth_json(const SynthConfig& cfg, const SynthPanel& panel);

}  // namespace silfid
