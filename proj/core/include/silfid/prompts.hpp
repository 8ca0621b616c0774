#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "silfid/ingest.hpp"
#include "silfid/survey.hpp"

namespace silfid {

enum class PromptVariant {
  /// Survey framing that names the PhilPapers website.
  baseline,
  /// Framing that asks directly for the respondent's considered position.
  direct,
};

std::string_view to_string(PromptVariant v) noexcept;
PromptVariant prompt_variant_from_string(std::string_view s);

inline constexpr std::size_t kMaxPersonaSpecializations = 5;
inline constexpr std::size_t kMaxPersonaInterests = 8;

/// System-turn persona text. Lines for absent fields are omitted;
/// specializations are truncated to 5 and interests to 8.
/// Throws InputError when the profile has no institution, AOS, or AOI.
std::string render_persona(const Profile& p);

/// User-turn question text. Throws InputError for fewer than two options.
std::string render_question_prompt(const QuestionSpec& q, PromptVariant variant);

/// Serializes stances in the answer format the question prompt requests:
/// a JSON list of "Stance: option" strings.
std::string serialize_stances(const std::vector<Selection>& stances);

}  // namespace silfid
