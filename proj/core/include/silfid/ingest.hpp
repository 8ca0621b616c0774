#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "silfid/response_matrix.hpp"
#include "silfid/stance.hpp"
#include "silfid/survey.hpp"

namespace silfid {

struct Selection {
  StanceCode stance = StanceCode::agnostic();
  std::string option;
  friend bool operator==(const Selection&, const Selection&) = default;
};

/// One respondent's raw answer to one question: one or more stated stances
/// on individual options.
struct RawResponse {
  std::string respondent_id;
  std::string question_id;
  std::vector<Selection> selected;
  friend bool operator==(const RawResponse&, const RawResponse&) = default;
};

/// How "most popular option" is counted for non-binary questions.
enum class PopularityRule {
  /// Respondents stating a stance with level > 0 on the option.
  endorsement,
  /// Respondents stating any stance on the option.
  any_stance,
};

std::string_view to_string(PopularityRule rule) noexcept;
PopularityRule popularity_rule_from_string(std::string_view s);

struct PlanEntry {
  std::string question_id;
  std::string target_option;
  bool is_binary = false;
  std::optional<std::string> complement_option;
  /// Popularity count of the chosen target among the human panel.
  std::size_t selection_basis = 0;
  bool flagged = false;
  /// "tie", "no_endorsements", or empty.
  std::string flag_reason;
};

struct NormalizationPlan {
  PopularityRule rule = PopularityRule::endorsement;
  std::vector<PlanEntry> entries;  // catalog order

  [[nodiscard]] const PlanEntry* find(const std::string& question_id) const;
};

/// Picks one variable per question: the designated positive option with
/// complement recovery for binary questions, the most popular option among
/// human respondents otherwise (ties -> lexicographically smallest, flagged;
/// no popularity at all -> first catalog option, flagged).
/// Throws InputError when a human response references a question missing
/// from the catalog.
NormalizationPlan build_normalization_plan(const QuestionCatalog& catalog,
                                           const std::vector<RawResponse>& human_raw,
                                           PopularityRule rule = PopularityRule::endorsement);

struct DroppedCell {
  std::string respondent_id;
  std::string question_id;
  std::string reason;
};

struct NormalizationLog {
  std::vector<DroppedCell> contradictions;
  std::size_t unknown_question_records = 0;
  std::size_t unknown_option_selections = 0;
};

struct NormalizedPanel {
  ResponseMatrix matrix;
  NormalizationLog log;
};

/// Builds the respondents x questions matrix. Respondent order is
/// `respondent_order` when given (respondents without records become
/// all-missing rows), otherwise first appearance in `raw`. Question order
/// follows the plan. Records for the same (respondent, question) are merged.
NormalizedPanel normalize_panel(const std::vector<RawResponse>& raw, const NormalizationPlan& plan,
                                const QuestionCatalog& catalog, std::string source_tag,
                                const std::vector<std::string>* respondent_order = nullptr);

/// Restricts both matrices to the shared respondents and questions, in the
/// order of `a`. Throws AlignmentError when either intersection is empty.
std::pair<ResponseMatrix, ResponseMatrix> align_panels(const ResponseMatrix& a,
                                                       const ResponseMatrix& b);

/// True when both matrices have identical id lists in identical order.
bool same_basis(const ResponseMatrix& a, const ResponseMatrix& b) noexcept;

}  // namespace silfid
