#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "silfid/ingest.hpp"
#include "silfid/prompts.hpp"
#include "silfid/stance.hpp"
#include "silfid/survey.hpp"

namespace silfid {

/// level -> -level; Agnostic has no opposite and yields nullopt.
std::optional<StanceCode> invert_stance(StanceCode code) noexcept;

enum class RejectedMode {
  /// Every non-Agnostic selection keeps its option and flips its level.
  same_option,
  /// Lean selections on a binary question's target/complement move to the
  /// other option at the same level; everything else flips as above.
  complement_option,
};

const char* to_string(RejectedMode mode) noexcept;
RejectedMode rejected_mode_from_string(const std::string& s);

struct PreferencePair {
  std::string respondent_id;
  std::string question_id;
  /// Persona, a blank line, then the question prompt.
  std::string prompt;
  std::string chosen;
  std::string rejected;
};

struct PreferenceOptions {
  PromptVariant variant = PromptVariant::baseline;
  RejectedMode mode = RejectedMode::same_option;
};

struct PreferenceSet {
  std::vector<PreferencePair> pairs;
  /// Responses whose selections are all Agnostic (or empty).
  std::size_t skipped_agnostic = 0;
  std::size_t skipped_no_profile = 0;
  /// Profiles that cannot be rendered as a persona (no institution/AOS/AOI).
  std::size_t skipped_incomplete_profile = 0;
  std::size_t skipped_unknown_question = 0;
  RejectedMode mode = RejectedMode::same_option;
  PromptVariant variant = PromptVariant::baseline;
};

/// One pair per response with at least one non-Agnostic selection, ordered
/// by (respondent, question).
PreferenceSet build_preference_pairs(const std::vector<RawResponse>& responses,
                                     const std::vector<Profile>& profiles,
                                     const QuestionCatalog& catalog,
                                     const PreferenceOptions& options = {});

/// JSONL {prompt, chosen, rejected}.
std::string preference_jsonl(const PreferenceSet& set);
/// JSONL {prompt, completion} with the chosen answer as completion.
std::string supervised_jsonl(const PreferenceSet& set);
/// Counts per respondent and per question plus skip counters.
std::string preference_manifest_json(const PreferenceSet& set);

struct DpoInputs {
  double logp_chosen_policy = 0;
  double logp_rejected_policy = 0;
  double logp_chosen_ref = 0;
  double logp_rejected_ref = 0;
  double beta = 0.1;
};

/// -log sigmoid(beta * ((lw - lw_ref) - (ll - ll_ref))), evaluated as a
/// softplus so large margins neither overflow nor lose precision.
/// Throws InputError for a positive log-probability or beta <= 0.
double dpo_loss(const DpoInputs& in);

}  // namespace silfid
