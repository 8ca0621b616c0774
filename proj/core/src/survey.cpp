#include "silfid/survey.hpp"

#include <algorithm>

#include "silfid/error.hpp"
#include "text_util.hpp"

namespace silfid {

bool is_known_domain(std::string_view domain) noexcept {
  return std::find(kDomains.begin(), kDomains.end(), domain) != kDomains.end();
}

std::optional<std::string> match_option(const QuestionSpec& q, std::string_view text) {
  const std::string key = detail::fold(text);
  for (const auto& opt : q.options) {
    if (detail::fold(opt) == key) return opt;
  }
  return std::nullopt;
}

void validate(const QuestionSpec& q) {
  if (q.question_id.empty()) throw InputError("question with empty id");
  const auto has = [&](const std::string& o) {
    return std::find(q.options.begin(), q.options.end(), o) != q.options.end();
  };
  if (!has(q.target_option)) {
    throw InputError("question " + q.question_id + ": target option \"" + q.target_option +
                     "\" not among options");
  }
  if (q.is_binary && !q.complement_option) {
    throw InputError("question " + q.question_id + ": binary question without complement option");
  }
  if (q.complement_option) {
    if (!has(*q.complement_option) || *q.complement_option == q.target_option) {
      throw InputError("question " + q.question_id + ": invalid complement option \"" +
                       *q.complement_option + "\"");
    }
  }
  if (!q.domain.empty() && !is_known_domain(q.domain)) {
    throw InputError("question " + q.question_id + ": unknown domain \"" + q.domain + "\"");
  }
}

QuestionCatalog::QuestionCatalog(std::vector<QuestionSpec> questions)
    : questions_(std::move(questions)) {
  for (std::size_t i = 0; i < questions_.size(); ++i) {
    validate(questions_[i]);
    if (!index_.emplace(questions_[i].question_id, i).second) {
      throw InputError("duplicate question id: " + questions_[i].question_id);
    }
  }
}

const QuestionSpec* QuestionCatalog::find(const std::string& question_id) const {
  auto it = index_.find(question_id);
  return it == index_.end() ? nullptr : &questions_[it->second];
}

const QuestionSpec& QuestionCatalog::at(const std::string& question_id) const {
  if (const auto* q = find(question_id)) return *q;
  throw InputError("unknown question id: " + question_id);
}

void validate(const Profile& p) {
  if (p.respondent_id.empty()) throw InputError("profile with empty respondent_id");
  if (p.phd_year && (*p.phd_year < 1900 || *p.phd_year > 2100)) {
    throw InputError("profile " + p.respondent_id +
                     ": implausible phd_year " + std::to_string(*p.phd_year));
  }
}

std::unordered_map<std::string, const Profile*> index_profiles(const std::vector<Profile>& profiles) {
  std::unordered_map<std::string, const Profile*> index;
  for (const auto& p : profiles) {
    if (!index.emplace(p.respondent_id, &p).second) {
      throw InputError("duplicate profile respondent_id: " + p.respondent_id);
    }
  }
  return index;
}

}  // namespace silfid
