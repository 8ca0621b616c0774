#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "silfid/corr_structure.hpp"
#include "silfid/response_matrix.hpp"
#include "silfid/stats.hpp"
#include "silfid/survey.hpp"

namespace silfid {

/// Binary respondent features, row-major respondents x features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Throws InputError on size mismatch, duplicate ids/names or a value
  /// other than 0/1.
  FeatureMatrix(std::vector<std::string> respondent_ids, std::vector<std::string> feature_names,
                std::vector<std::uint8_t> indicators);

  [[nodiscard]] const std::vector<std::string>& respondent_ids() const noexcept { return rids_; }
  [[nodiscard]] const std::vector<std::string>& feature_names() const noexcept { return names_; }
  [[nodiscard]] std::size_t rows() const noexcept { return rids_.size(); }
  [[nodiscard]] std::size_t features() const noexcept { return names_.size(); }
  [[nodiscard]] bool has(std::size_t r, std::size_t f) const noexcept {
    return ind_[r * names_.size() + f] != 0;
  }
  [[nodiscard]] std::ptrdiff_t respondent_index(const std::string& id) const;
  [[nodiscard]] std::ptrdiff_t feature_index(const std::string& name) const;

 private:
  std::vector<std::string> rids_;
  std::vector<std::string> names_;
  std::vector<std::uint8_t> ind_;
};

inline constexpr int kPhdYearBinWidth = 5;

/// "AOS: x", "AOI: x", "PhD country: x" ("Unknown" when absent) and
/// "PhD year: 1990-1994" style bins; names sorted. Rows follow
/// `respondent_ids`; each must have a profile (InputError otherwise).
FeatureMatrix build_features(const std::vector<Profile>& profiles,
                             const std::vector<std::string>& respondent_ids);

struct EffectTest {
  std::string feature;
  std::string question_id;
  std::size_t n_with = 0;
  std::size_t n_without = 0;
  double mean_with = 0;
  double mean_without = 0;
  /// (mean_with - mean_without) * 100 on the unit scale.
  double diff_pp = 0;
  /// Rows: with / without feature. Columns: value > 0.5 / value < 0.5.
  stats::Contingency2x2 table;
  double chi2_yates = 0;
  double p_chi2 = 1;
  double welch_t = 0;
  double welch_dof = 0;
  double p_t = 1;
  bool welch_defined = false;
  double p_chi2_bonferroni = 1;
  double p_t_bonferroni = 1;
};

inline constexpr std::size_t kMinValidResponses = 6;

struct EffectScan {
  std::vector<EffectTest> tests;
  std::size_t ineligible_pairs = 0;
};

/// One test per (feature, question) with at least min_valid answers and a
/// feature that varies among them; Bonferroni over the whole scan. Panel
/// respondents must all appear in `features` (AlignmentError otherwise).
EffectScan effect_scan(const ResponseMatrix& panel, const FeatureMatrix& features,
                       std::size_t min_valid = kMinValidResponses);

enum class EffectClass { matching, amplified, spurious, absent };
enum class GateTest { chi2, welch };

const char* to_string(EffectClass c) noexcept;
const char* to_string(GateTest t) noexcept;
GateTest gate_test_from_string(const std::string& s);

struct ClassifyOptions {
  double alpha = 0.05;
  GateTest gate = GateTest::chi2;
  /// Model |diff| at least this multiple of ground truth counts as amplified.
  double amplification = 2.0;
  /// Non-significant ground-truth effects below this size count as absent
  /// in the data, so a significant model effect is spurious.
  double small_diff_pp = 5.0;
};

struct ModelEffect {
  std::string model;
  double diff_pp = 0;
  double p = 1;
  double p_bonferroni = 1;
  bool significant = false;
};

struct SpuriousVerdict {
  std::string feature;
  std::string question_id;
  double gt_diff_pp = 0;
  double gt_p = 1;
  double gt_p_bonferroni = 1;
  bool gt_significant = false;
  std::vector<ModelEffect> models;
  std::size_t n_models_significant = 0;
  /// Mean diff over significant models (over all models when none is).
  double model_diff_pp = 0;
  EffectClass classification = EffectClass::absent;
};

using NamedEffects = std::pair<std::string, std::vector<EffectTest>>;

/// Joins on (feature, question). A verdict is produced for every key in the
/// ground truth that at least one model also tested; order follows gt.
std::vector<SpuriousVerdict> classify_spurious(const std::vector<EffectTest>& gt,
                                               const std::vector<NamedEffects>& models,
                                               const ClassifyOptions& options = {});

struct QuestionRmse {
  std::string question_id;
  double rmse = 0;
  std::size_t n_cells = 0;
};

struct RmseTable {
  std::vector<QuestionRmse> questions;
  /// Questions with no matched cells.
  std::vector<std::string> skipped;
  double panel_mean = 0;
};

/// Throws AlignmentError when the panels are not on the same basis.
RmseTable per_question_rmse(const ResponseMatrix& gt, const ResponseMatrix& model);

/// Per-question mean over the tables that scored it.
RmseTable average_rmse(const std::vector<RmseTable>& tables);

struct DomainRow {
  std::string domain;
  double rmse = 0;
  double human_variance = 0;
  std::size_t n_questions = 0;
};

/// Unweighted means per domain, ascending by RMSE. Human variance uses
/// questions with at least two answers in `human`. Throws InputError for a
/// scored question with no domain.
std::vector<DomainRow> domain_rmse(const RmseTable& table, const QuestionCatalog& catalog,
                                   const ResponseMatrix& human,
                                   stats::VarianceConvention convention =
                                       stats::VarianceConvention::population);

/// Pearson of per-question RMSE against human variance. Throws
/// DegenerateDataError with fewer than 3 questions or constant inputs.
CorrelationTest rmse_variance_corr(const RmseTable& table, const ResponseMatrix& human,
                                   stats::VarianceConvention convention =
                                       stats::VarianceConvention::population);

std::string effects_csv(const std::vector<EffectTest>& tests);
std::string verdicts_csv(const std::vector<SpuriousVerdict>& verdicts);
std::string rmse_csv(const RmseTable& table);
std::string domain_csv(const std::vector<DomainRow>& rows);

}  // namespace silfid
