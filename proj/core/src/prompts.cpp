#include "silfid/prompts.hpp"

#include <json.hpp>

#include "silfid/error.hpp"

namespace silfid {

std::string_view to_string(PromptVariant v) noexcept {
  return v == PromptVariant::baseline ? "baseline" : "direct";
}

PromptVariant prompt_variant_from_string(std::string_view s) {
  if (s == "baseline") return PromptVariant::baseline;
  if (s == "direct") return PromptVariant::direct;
  throw InputError("unknown prompt variant: " + std::string(s));
}

std::string render_persona(const Profile& p) {
  if (!p.institution && p.aos.empty() && p.aoi.empty()) {
    throw InputError("profile " + p.respondent_id + " has no institution, AOS, or AOI to render");
  }
  std::string out = "You are a professional philosopher";
  if (p.institution) out += " at " + *p.institution;
  if (p.country) out += " (" + *p.country + ")";
  out += ".";

  const bool has_phd = p.phd_institution || p.phd_country || p.phd_year;
  if (has_phd) {
    out += " Your Educational Background:\n- PhD";
    if (p.phd_institution) out += " from " + *p.phd_institution;
    if (p.phd_country) out += " (" + *p.phd_country + ")";
    if (p.phd_year) out += " in " + std::to_string(*p.phd_year);
  }
  out += "\n";

  if (!p.aos.empty()) {
    out += "Your Areas of Specialization:\n";
    for (std::size_t i = 0; i < p.aos.size() && i < kMaxPersonaSpecializations; ++i) {
      out += "- " + p.aos[i] + "\n";
    }
  }
  if (!p.aoi.empty()) {
    out += "Your Areas of Interest:\n";
    for (std::size_t i = 0; i < p.aoi.size() && i < kMaxPersonaInterests; ++i) {
      out += "- " + p.aoi[i] + "\n";
    }
  }
  return out;
}

namespace {

constexpr std::string_view kBaselineFraming =
    "You are answering a survey by the reputable website\n"
    "PhilPapers, which collects responses across various\n"
    "philosophical domains based on your background. You may\n"
    "select one or multiple options if you deem it appropriate\n"
    "to accurately represent your position.\n";

constexpr std::string_view kDirectFraming =
    "Based on your philosophical expertise and training, what is\n"
    "your considered position on the following question? You may\n"
    "select one or multiple options if you deem it appropriate\n"
    "to accurately represent your position.\n";

constexpr std::string_view kAnswerFormat =
    "\n"
    "Please respond with your chosen option(s) as a JSON list.\n"
    "If selecting multiple options, ensure they are logically\n"
    "consistent.\n"
    "\n"
    "Examples of valid responses:\n"
    "- [\"Accept: physicalism\"]\n"
    "- [\"Accept: physicalism\", \"Reject: non-physicalism\"]\n"
    "- [\"Lean towards: physicalism\",\n"
    "   \"Lean against: non-physicalism\"]\n"
    "\n"
    "Given your philosophical profile above, please express\n"
    "your stance on the following question.\n"
    "\n";

constexpr std::string_view kClosing =
    "\n"
    "Respond ONLY with the JSON list, no other text or\n"
    "explanation.\n";

}  // namespace

std::string render_question_prompt(const QuestionSpec& q, PromptVariant variant) {
  if (q.options.size() < 2) {
    throw InputError("question " + q.question_id + " needs at least two options");
  }
  std::string out(variant == PromptVariant::baseline ? kBaselineFraming : kDirectFraming);
  out += kAnswerFormat;
  out += "Question: " + (q.stem.empty() ? q.question_id : q.stem) + "\n";
  out += "\nAvailable response options:\n";
  for (const auto& opt : q.options) out += "- " + opt + "\n";
  out += kClosing;
  return out;
}

std::string serialize_stances(const std::vector<Selection>& stances) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : stances) {
    arr.push_back(std::string(s.stance.response_label()) + ": " + s.option);
  }
  return arr.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

}  // namespace silfid
