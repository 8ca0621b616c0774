#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "silfid/corr_structure.hpp"
#include "silfid/divergence.hpp"
#include "silfid/diversity.hpp"
#include "silfid/effects.hpp"
#include "silfid/panel_summary.hpp"
#include "silfid/pca.hpp"
#include "silfid/response_matrix.hpp"
#include "silfid/survey.hpp"

namespace silfid {

inline constexpr const char* kVersion = "0.1.0";

struct AnalyzeOptions {
  std::uint64_t seed = 0;
  std::size_t n_perm = kDefaultPermutations;
  std::size_t min_overlap = kDefaultMinOverlap;
  RvMode rv_mode = RvMode::data;
  stats::VarianceConvention convention = stats::VarianceConvention::population;
  ImputationConfig imputation;
  std::size_t align_k = 6;
  double component_threshold = kSignificantComponentShare;
  double conditioned_min_variance = 0.01;
  ClassifyOptions classify;
  /// Domain table needs a catalog; effect verdicts need features.
  const QuestionCatalog* catalog = nullptr;
  const FeatureMatrix* features = nullptr;
  /// Only panel summaries and prompt sensitivity.
  bool summary_only = false;
};

struct VariantPair {
  ResponseMatrix baseline;
  ResponseMatrix variant;
};

struct AnalyzeInputs {
  ResponseMatrix human;
  std::vector<ResponseMatrix> models;
  std::vector<VariantPair> variants;
};

/// Everything the analysis computed. Per-model failures (too little data
/// for a statistic) are kept as an error message on the row.
struct AnalysisReport {
  std::vector<std::pair<std::string, std::string>> metadata;

  struct PanelRow {
    std::string source;
    PanelSummary summary;
  };
  std::vector<PanelRow> panels;

  struct SimilarityRow {
    std::string model;
    MatrixSimilarity similarity;
    std::string error;
  };
  std::vector<SimilarityRow> similarity;
  std::optional<PairwiseSimilarity> pairwise;

  struct StructureRow {
    std::string model;
    StructureComparison comparison;
    std::string error;
  };
  std::vector<StructureRow> structure;

  struct PcaRow {
    std::string source;
    std::size_t significant = 0;
    double top6 = 0;
    std::size_t iterations = 0;
    bool converged = true;
    std::size_t dropped = 0;
    std::string error;
    std::optional<PcaModel> model;
  };
  std::vector<PcaRow> pca;

  struct AlignmentRow {
    std::string model;
    AlignmentResult alignment;
    std::string error;
  };
  std::vector<AlignmentRow> alignment;

  struct DiversityRow {
    std::string source;
    DiversityStats stats;
    std::string error;
  };
  std::vector<DiversityRow> diversity;

  struct ConditionedRow {
    std::string model;
    ConditionedCorrelation correlation;
    std::string error;
  };
  std::vector<ConditionedRow> conditioned;

  struct RmseRow {
    std::string model;
    double panel_mean_rmse = 0;
    std::size_t questions = 0;
  };
  std::vector<RmseRow> rmse;
  std::optional<RmseTable> mean_rmse;
  std::optional<CorrelationTest> rmse_variance;
  std::string rmse_variance_error;
  std::vector<DomainRow> domains;
  std::string domains_error;

  std::vector<std::pair<std::string, EffectScan>> effect_scans;
  std::vector<SpuriousVerdict> verdicts;

  struct SensitivityRow {
    std::string baseline;
    std::string variant;
    PromptSensitivity sensitivity;
    std::string error;
  };
  std::vector<SensitivityRow> sensitivity;

  std::map<std::string, CorrMatrix> corr_matrices;
};

/// Throws InputError when source tags repeat.
AnalysisReport analyze(const AnalyzeInputs& inputs, const AnalyzeOptions& options = {});

/// Deterministic text rendering: "[section]" headers, "key = value" lines
/// and CSV-style tables.
std::string render_report(const AnalysisReport& report);

/// File name -> content for the per-table CSV siblings.
std::map<std::string, std::string> report_csvs(const AnalysisReport& report);

/// Writes report.txt and the CSV siblings into `dir`.
void write_report(const std::filesystem::path& dir, const AnalysisReport& report);

}  // namespace silfid
