#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "silfid/ingest.hpp"
#include "silfid/survey.hpp"

namespace silfid {

enum class ParseStatus {
  parsed,
  /// A stance label or option outside the valid set.
  invalid_option,
  /// A hedged answer such as "A combination of views".
  combination_of_views,
  /// No recognisable JSON list of strings.
  malformed,
  /// The model declined to answer.
  refusal,
};

inline constexpr std::size_t kParseStatusCount = 5;

std::string_view to_string(ParseStatus s) noexcept;

struct ParseOutcome {
  ParseStatus status = ParseStatus::malformed;
  /// Non-empty iff status == parsed. Options use catalog spelling.
  std::vector<Selection> stances;
  /// Raw model text; always kept so failures can be audited.
  std::string raw_text;
};

/// Extracts the first bracketed list from `text` and validates every
/// "Stance: option" entry against the question. Never throws.
ParseOutcome parse_response(std::string_view text, const QuestionSpec& q);

}  // namespace silfid
