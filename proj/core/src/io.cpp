#include "silfid/io.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "silfid/error.hpp"
#include "text_util.hpp"

namespace silfid::io {

using nlohmann::json;

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

template <typename F>
void for_each_record(std::istream& in, F&& f) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      f(json::parse(line));
    } catch (const json::exception& e) {
      throw InputError(fmt::format("line {}: {}", line_no, e.what()));
    } catch (const Error& e) {
      throw InputError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
}

std::optional<std::string> opt_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  auto s = it->get<std::string>();
  if (detail::trim(s).empty()) return std::nullopt;
  return s;
}

std::vector<std::string> unique_strings(const json& j, const char* key) {
  std::vector<std::string> out;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return out;
  for (const auto& v : *it) {
    auto s = v.get<std::string>();
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  }
  return out;
}

void put_optional(json& j, const char* key, const std::optional<std::string>& v) {
  j[key] = v ? json(*v) : json(nullptr);
}

}  // namespace

std::vector<Profile> read_profiles(std::istream& in) {
  std::vector<Profile> out;
  for_each_record(in, [&](const json& j) {
    Profile p;
    p.respondent_id = j.at("respondent_id").get<std::string>();
    p.aos = unique_strings(j, "aos");
    p.aoi = unique_strings(j, "aoi");
    p.phd_country = opt_string(j, "phd_country");
    if (auto it = j.find("phd_year"); it != j.end() && !it->is_null()) {
      p.phd_year = it->is_string() ? std::stoi(it->get<std::string>()) : it->get<int>();
    }
    p.institution = opt_string(j, "institution");
    p.country = opt_string(j, "country");
    p.phd_institution = opt_string(j, "phd_institution");
    validate(p);
    out.push_back(std::move(p));
  });
  index_profiles(out);
  return out;
}

std::vector<Profile> read_profiles(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_profiles(in);
}

void write_profiles(std::ostream& out, const std::vector<Profile>& profiles) {
  for (const auto& p : profiles) {
    json j;
    j["respondent_id"] = p.respondent_id;
    j["aos"] = p.aos;
    j["aoi"] = p.aoi;
    put_optional(j, "phd_country", p.phd_country);
    j["phd_year"] = p.phd_year ? json(*p.phd_year) : json(nullptr);
    put_optional(j, "institution", p.institution);
    put_optional(j, "country", p.country);
    put_optional(j, "phd_institution", p.phd_institution);
    out << j.dump() << '\n';
  }
}

std::vector<RawResponse> read_raw_responses(std::istream& in) {
  std::vector<RawResponse> out;
  for_each_record(in, [&](const json& j) {
    RawResponse r;
    r.respondent_id = j.at("respondent_id").get<std::string>();
    r.question_id = j.at("question_id").get<std::string>();
    for (const auto& s : j.at("selected")) {
      r.selected.push_back(
          {code_stance(s.at("stance").get<std::string>()), s.at("option").get<std::string>()});
    }
    if (r.selected.empty()) {
      throw InputError("response " + r.respondent_id + "/" + r.question_id + " selects nothing");
    }
    out.push_back(std::move(r));
  });
  return out;
}

std::vector<RawResponse> read_raw_responses(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_raw_responses(in);
}

void write_raw_response(std::ostream& out, const RawResponse& r) {
  json j;
  j["respondent_id"] = r.respondent_id;
  j["question_id"] = r.question_id;
  j["selected"] = json::array();
  for (const auto& s : r.selected) {
    j["selected"].push_back({{"stance", std::string(s.stance.label())}, {"option", s.option}});
  }
  out << j.dump() << '\n';
}

void write_raw_responses(std::ostream& out, const std::vector<RawResponse>& rs) {
  for (const auto& r : rs) write_raw_response(out, r);
}

QuestionCatalog read_catalog(std::istream& in) {
  std::vector<QuestionSpec> qs;
  for_each_record(in, [&](const json& j) {
    QuestionSpec q;
    q.question_id = j.at("question_id").get<std::string>();
    q.stem = j.value("stem", q.question_id);
    q.options = j.at("options").get<std::vector<std::string>>();
    if (q.options.size() < 2) throw InputError("question " + q.question_id + " has < 2 options");
    q.target_option = j.value("target_option", q.options.front());
    q.is_binary = j.value("is_binary", false);
    q.complement_option = opt_string(j, "complement_option");
    if (auto d = opt_string(j, "domain")) {
      q.domain = *d;
    } else if (auto bd = bundled_domain(q.question_id)) {
      q.domain = *bd;
    }
    qs.push_back(std::move(q));
  });
  return QuestionCatalog(std::move(qs));
}

QuestionCatalog read_catalog(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_catalog(in);
}

void write_catalog(std::ostream& out, const QuestionCatalog& catalog) {
  for (const auto& q : catalog.questions()) {
    json j;
    j["question_id"] = q.question_id;
    j["stem"] = q.stem;
    j["options"] = q.options;
    j["target_option"] = q.target_option;
    j["is_binary"] = q.is_binary;
    put_optional(j, "complement_option", q.complement_option);
    j["domain"] = q.domain;
    out << j.dump() << '\n';
  }
}

std::string plan_to_json(const NormalizationPlan& plan) {
  json j;
  j["popularity_rule"] = std::string(to_string(plan.rule));
  j["entries"] = json::array();
  for (const auto& e : plan.entries) {
    json je;
    je["question_id"] = e.question_id;
    je["target_option"] = e.target_option;
    je["is_binary"] = e.is_binary;
    put_optional(je, "complement_option", e.complement_option);
    je["selection_basis"] = e.selection_basis;
    je["flagged"] = e.flagged;
    je["flag_reason"] = e.flag_reason;
    j["entries"].push_back(std::move(je));
  }
  return j.dump(2) + "\n";
}

NormalizationPlan plan_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    NormalizationPlan plan;
    plan.rule = popularity_rule_from_string(j.at("popularity_rule").get<std::string>());
    for (const auto& je : j.at("entries")) {
      PlanEntry e;
      e.question_id = je.at("question_id").get<std::string>();
      e.target_option = je.at("target_option").get<std::string>();
      e.is_binary = je.value("is_binary", false);
      e.complement_option = opt_string(je, "complement_option");
      e.selection_basis = je.value("selection_basis", std::size_t{0});
      e.flagged = je.value("flagged", false);
      e.flag_reason = je.value("flag_reason", std::string());
      plan.entries.push_back(std::move(e));
    }
    return plan;
  } catch (const json::exception& e) {
    throw InputError(std::string("normalization plan: ") + e.what());
  }
}

void write_panel(std::ostream& out, const ResponseMatrix& m) {
  json header;
  header["format"] = "silfid-panel";
  header["version"] = 1;
  header["source_tag"] = m.source_tag();
  header["respondent_ids"] = m.respondent_ids();
  header["question_ids"] = m.question_ids();
  out << header.dump() << '\n';
  std::string line;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    line.clear();
    for (std::size_t q = 0; q < m.cols(); ++q) {
      if (q) line.push_back(' ');
      if (m.is_missing(r, q)) {
        line += "NA";
      } else {
        line += fmt::format("{}", m.value(r, q));
      }
    }
    out << line << '\n';
  }
}

void write_panel(const std::filesystem::path& path, const ResponseMatrix& m) {
  std::ostringstream os;
  write_panel(os, m);
  write_text(path, os.str());
}

ResponseMatrix read_panel(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("panel: missing header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw InputError(std::string("panel header: ") + e.what());
  }
  if (header.value("format", std::string()) != "silfid-panel") {
    throw InputError("panel: not a silfid-panel file");
  }
  if (header.value("version", 0) != 1) throw InputError("panel: unsupported version");
  auto rids = header.at("respondent_ids").get<std::vector<std::string>>();
  auto qids = header.at("question_ids").get<std::vector<std::string>>();
  const std::size_t n_cols = qids.size();
  std::vector<double> values;
  std::vector<std::uint8_t> missing;
  values.reserve(rids.size() * n_cols);
  missing.reserve(rids.size() * n_cols);
  for (std::size_t r = 0; r < rids.size(); ++r) {
    if (!std::getline(in, line)) throw InputError(fmt::format("panel: missing row {}", r + 1));
    std::istringstream row(line);
    std::string tok;
    std::size_t count = 0;
    while (row >> tok) {
      ++count;
      if (tok == "NA") {
        values.push_back(0.0);
        missing.push_back(1);
        continue;
      }
      double v = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw InputError(fmt::format("panel row {}: bad value \"{}\"", r + 1, tok));
      }
      values.push_back(v);
      missing.push_back(0);
    }
    if (count != n_cols) {
      throw InputError(fmt::format("panel row {}: expected {} values, got {}", r + 1, n_cols, count));
    }
  }
  return ResponseMatrix(std::move(rids), std::move(qids), std::move(values), std::move(missing),
                        header.value("source_tag", std::string()));
}

ResponseMatrix read_panel(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_panel(in);
}

std::string features_csv(const FeatureMatrix& f) {
  std::string out = "respondent_id";
  for (const auto& n : f.feature_names()) out += "," + detail::csv_field(n);
  out += "\n";
  for (std::size_t r = 0; r < f.rows(); ++r) {
    out += detail::csv_field(f.respondent_ids()[r]);
    for (std::size_t c = 0; c < f.features(); ++c) out += f.has(r, c) ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

namespace {

// Splits one CSV record, honouring quoted fields with doubled quotes.
std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back().push_back(c);
    }
  }
  if (quoted) throw InputError("features csv: unterminated quoted field");
  return fields;
}

}  // namespace

FeatureMatrix read_features_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw InputError("features csv: empty input");
  auto header = split_csv_line(line);
  if (header.empty() || header.front() != "respondent_id") {
    throw InputError("features csv: first column must be respondent_id");
  }
  std::vector<std::string> names(header.begin() + 1, header.end());
  std::vector<std::string> rids;
  std::vector<std::uint8_t> ind;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw InputError(fmt::format("features csv line {}: expected {} fields", line_no, header.size()));
    }
    rids.push_back(fields[0]);
    for (std::size_t c = 1; c < fields.size(); ++c) {
      const auto v = detail::trim(fields[c]);
      if (v != "0" && v != "1") {
        throw InputError(fmt::format("features csv line {}: indicator must be 0 or 1", line_no));
      }
      ind.push_back(v == "1" ? 1 : 0);
    }
  }
  return FeatureMatrix(std::move(rids), std::move(names), std::move(ind));
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace silfid::io
