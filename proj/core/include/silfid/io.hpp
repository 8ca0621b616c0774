#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "silfid/effects.hpp"
#include "silfid/ingest.hpp"
#include "silfid/response_matrix.hpp"
#include "silfid/survey.hpp"

namespace silfid::io {

// Line-delimited JSON records. Blank lines are skipped; a malformed line
// raises InputError carrying its line number.
//
// profile:  {"respondent_id", "aos": [..], "aoi": [..], "phd_country", "phd_year",
//            "institution", "country", "phd_institution"}
// response: {"respondent_id", "question_id", "selected": [{"stance", "option"}, ..]}
// catalog:  {"question_id", "stem", "options": [..], "target_option", "is_binary",
//            "complement_option", "domain"}

std::vector<Profile> read_profiles(std::istream& in);
std::vector<Profile> read_profiles(const std::filesystem::path& path);
void write_profiles(std::ostream& out, const std::vector<Profile>& profiles);

std::vector<RawResponse> read_raw_responses(std::istream& in);
std::vector<RawResponse> read_raw_responses(const std::filesystem::path& path);
void write_raw_response(std::ostream& out, const RawResponse& r);
void write_raw_responses(std::ostream& out, const std::vector<RawResponse>& rs);

/// Catalog records without a "domain" field take the bundled assignment for
/// their question id, when one exists.
QuestionCatalog read_catalog(std::istream& in);
QuestionCatalog read_catalog(const std::filesystem::path& path);
void write_catalog(std::ostream& out, const QuestionCatalog& catalog);

std::string plan_to_json(const NormalizationPlan& plan);
NormalizationPlan plan_from_json(std::string_view text);

/// ".panel" interchange format. First line: a JSON header
///   {"format":"silfid-panel","version":1,"source_tag":..,"respondent_ids":[..],"question_ids":[..]}
/// followed by one line per respondent with the row's values separated by
/// single spaces, shortest round-trip decimal, "NA" for missing cells.
void write_panel(std::ostream& out, const ResponseMatrix& m);
void write_panel(const std::filesystem::path& path, const ResponseMatrix& m);
ResponseMatrix read_panel(std::istream& in);
ResponseMatrix read_panel(const std::filesystem::path& path);

/// Bundled question -> domain assignments (100 questions, 14 domains),
/// as shipped in data/domain_assignments.jsonl.
struct DomainAssignment {
  std::string question_id;
  std::string domain;
};
const std::vector<DomainAssignment>& bundled_domain_assignments();
std::optional<std::string> bundled_domain(std::string_view question_id);

/// Feature CSV: header "respondent_id,<feature>,..", then one 0/1 row per
/// respondent. Fields follow RFC 4180 quoting.
std::string features_csv(const FeatureMatrix& f);
FeatureMatrix read_features_csv(std::string_view text);

/// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

}  // namespace silfid::io
