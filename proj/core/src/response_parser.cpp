#include "silfid/response_parser.hpp"

#include <array>
#include <json.hpp>

#include "text_util.hpp"

namespace silfid {

std::string_view to_string(ParseStatus s) noexcept {
  switch (s) {
    case ParseStatus::parsed: return "parsed";
    case ParseStatus::invalid_option: return "invalid_option";
    case ParseStatus::combination_of_views: return "combination_of_views";
    case ParseStatus::malformed: return "malformed";
    case ParseStatus::refusal: return "refusal";
  }
  return "malformed";
}

namespace {

// Non-committal answers that sit outside every question's option set.
constexpr std::array<std::string_view, 9> kHedgeMarkers{
    "combination of views",  "intermediate view",  "alternative view",
    "no fact of the matter", "too unclear",        "insufficiently familiar",
    "accept both",           "reject both",        "accept another alternative",
};

constexpr std::array<std::string_view, 8> kRefusalMarkers{
    "i cannot", "i can't", "i can not", "i'm unable", "i am unable", "i won't", "i will not",
    "as an ai",
};

bool contains_any(const std::string& folded, auto const& markers) {
  for (auto m : markers) {
    if (folded.find(m) != std::string::npos) return true;
  }
  return false;
}

// Span of the first balanced [...] outside string literals, or npos.
std::pair<std::size_t, std::size_t> first_bracketed(std::string_view text) {
  const std::size_t open = text.find('[');
  if (open == std::string_view::npos) return {std::string_view::npos, 0};
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']' && --depth == 0) {
      return {open, i - open + 1};
    }
  }
  return {std::string_view::npos, 0};
}

}  // namespace

ParseOutcome parse_response(std::string_view text, const QuestionSpec& q) {
  ParseOutcome out;
  out.raw_text = std::string(text);
  const std::string folded_all = detail::fold(text);

  const auto [pos, len] = first_bracketed(text);
  if (pos == std::string_view::npos) {
    if (contains_any(folded_all, kHedgeMarkers)) {
      out.status = ParseStatus::combination_of_views;
    } else if (contains_any(folded_all, kRefusalMarkers)) {
      out.status = ParseStatus::refusal;
    } else {
      out.status = ParseStatus::malformed;
    }
    return out;
  }

  nlohmann::json list;
  try {
    list = nlohmann::json::parse(text.substr(pos, len));
  } catch (const nlohmann::json::exception&) {
    out.status = ParseStatus::malformed;
    return out;
  }
  if (!list.is_array() || list.empty()) {
    out.status = ParseStatus::malformed;
    return out;
  }

  std::vector<Selection> stances;
  bool hedged = false;
  bool invalid = false;
  for (const auto& item : list) {
    if (!item.is_string()) {
      out.status = ParseStatus::malformed;
      return out;
    }
    const auto entry = item.get<std::string>();
    if (contains_any(detail::fold(entry), kHedgeMarkers)) {
      hedged = true;
      continue;
    }
    const auto colon = entry.find(':');
    if (colon == std::string::npos) {
      invalid = true;
      continue;
    }
    const auto stance = try_code_stance(std::string_view(entry).substr(0, colon));
    const auto option = match_option(q, std::string_view(entry).substr(colon + 1));
    if (!stance || !option) {
      invalid = true;
      continue;
    }
    stances.push_back({*stance, *option});
  }
  if (hedged) {
    out.status = ParseStatus::combination_of_views;
  } else if (invalid) {
    out.status = ParseStatus::invalid_option;
  } else {
    out.status = ParseStatus::parsed;
    out.stances = std::move(stances);
  }
  return out;
}

}  // namespace silfid
