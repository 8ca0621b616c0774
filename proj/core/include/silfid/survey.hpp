#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace silfid {

/// The fourteen topical domains questions are grouped into for
/// predictability reporting.
inline constexpr std::array<std::string_view, 14> kDomains{
    "Aesthetics",
    "Philosophy of Language",
    "History of Philosophy",
    "Political & Social Phil.",
    "Phil. Methodology",
    "Philosophy of Mind",
    "Metaphysics",
    "Decision Theory",
    "Epistemology",
    "Philosophy of Science",
    "Logic & Formal Phil.",
    "Ethics & Moral Phil.",
    "Applied Ethics",
    "Philosophy of Religion",
};

bool is_known_domain(std::string_view domain) noexcept;

struct QuestionSpec {
  std::string question_id;
  std::string stem;
  std::vector<std::string> options;
  /// Option whose endorsement defines the question's single variable.
  std::string target_option;
  bool is_binary = false;
  /// Required when is_binary.
  std::optional<std::string> complement_option;
  /// Empty when unassigned.
  std::string domain;
};

/// Throws InputError when target/complement are not among the options,
/// a binary question lacks a complement, or the domain is unknown.
void validate(const QuestionSpec& q);

/// Case- and whitespace-insensitive option lookup. Returns the catalog
/// spelling of the matching option.
std::optional<std::string> match_option(const QuestionSpec& q, std::string_view text);

/// Ordered collection of questions with id lookup.
class QuestionCatalog {
 public:
  QuestionCatalog() = default;
  explicit QuestionCatalog(std::vector<QuestionSpec> questions);

  [[nodiscard]] const std::vector<QuestionSpec>& questions() const noexcept { return questions_; }
  [[nodiscard]] std::size_t size() const noexcept { return questions_.size(); }
  [[nodiscard]] const QuestionSpec* find(const std::string& question_id) const;
  /// Throws InputError for an unknown id.
  [[nodiscard]] const QuestionSpec& at(const std::string& question_id) const;

 private:
  std::vector<QuestionSpec> questions_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Profile {
  std::string respondent_id;
  /// Areas of specialization, in profile order, without duplicates.
  std::vector<std::string> aos;
  /// Areas of interest, in profile order, without duplicates.
  std::vector<std::string> aoi;
  std::optional<std::string> phd_country;
  std::optional<int> phd_year;
  /// Current affiliation and its country.
  std::optional<std::string> institution;
  std::optional<std::string> country;
  /// Institution that granted the PhD.
  std::optional<std::string> phd_institution;
};

/// Throws InputError for an empty id or a PhD year outside 1900-2100.
void validate(const Profile& p);

/// Throws InputError on duplicate respondent ids.
std::unordered_map<std::string, const Profile*> index_profiles(const std::vector<Profile>& profiles);

}  // namespace silfid
