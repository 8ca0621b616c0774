#include "silfid/ingest.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "silfid/error.hpp"

namespace silfid {

std::string_view to_string(PopularityRule rule) noexcept {
  return rule == PopularityRule::endorsement ? "endorsement" : "any_stance";
}

PopularityRule popularity_rule_from_string(std::string_view s) {
  if (s == "endorsement") return PopularityRule::endorsement;
  if (s == "any_stance") return PopularityRule::any_stance;
  throw InputError("unknown popularity rule: " + std::string(s));
}

const PlanEntry* NormalizationPlan::find(const std::string& question_id) const {
  for (const auto& e : entries) {
    if (e.question_id == question_id) return &e;
  }
  return nullptr;
}

NormalizationPlan build_normalization_plan(const QuestionCatalog& catalog,
                                           const std::vector<RawResponse>& human_raw,
                                           PopularityRule rule) {
  // question -> option -> set of respondents counting towards popularity
  std::unordered_map<std::string, std::map<std::string, std::unordered_set<std::string>>> votes;
  for (const auto& r : human_raw) {
    const QuestionSpec* q = catalog.find(r.question_id);
    if (!q) throw InputError("human response references unknown question: " + r.question_id);
    for (const auto& sel : r.selected) {
      const auto opt = match_option(*q, sel.option);
      if (!opt) continue;
      if (rule == PopularityRule::endorsement && sel.stance.level() <= 0) continue;
      votes[q->question_id][*opt].insert(r.respondent_id);
    }
  }

  NormalizationPlan plan;
  plan.rule = rule;
  plan.entries.reserve(catalog.size());
  for (const auto& q : catalog.questions()) {
    PlanEntry e;
    e.question_id = q.question_id;
    e.is_binary = q.is_binary;
    const auto& counts = votes[q.question_id];
    const auto count_of = [&](const std::string& opt) -> std::size_t {
      auto it = counts.find(opt);
      return it == counts.end() ? 0 : it->second.size();
    };
    if (q.is_binary) {
      e.target_option = q.target_option;
      e.complement_option = q.complement_option;
      e.selection_basis = count_of(q.target_option);
    } else {
      std::size_t best = 0;
      std::vector<std::string> leaders;
      for (const auto& opt : q.options) {
        const std::size_t c = count_of(opt);
        if (c > best) {
          best = c;
          leaders = {opt};
        } else if (c == best && c > 0) {
          leaders.push_back(opt);
        }
      }
      if (best == 0) {
        e.target_option = q.options.front();
        e.flagged = true;
        e.flag_reason = "no_endorsements";
      } else {
        e.target_option = *std::min_element(leaders.begin(), leaders.end());
        if (leaders.size() > 1) {
          e.flagged = true;
          e.flag_reason = "tie";
        }
      }
      e.selection_basis = best;
    }
    plan.entries.push_back(std::move(e));
  }
  return plan;
}

namespace {

// Stance stated on one option within a merged answer; nullopt when the
// respondent contradicted themselves.
struct OptionStance {
  std::optional<StanceCode> stance;
  bool contradictory = false;
};

}  // namespace

NormalizedPanel normalize_panel(const std::vector<RawResponse>& raw, const NormalizationPlan& plan,
                                const QuestionCatalog& catalog, std::string source_tag,
                                const std::vector<std::string>* respondent_order) {
  NormalizationLog log;

  std::vector<std::string> respondents;
  std::unordered_map<std::string, std::size_t> row_of;
  if (respondent_order) {
    respondents = *respondent_order;
    for (std::size_t i = 0; i < respondents.size(); ++i) row_of.emplace(respondents[i], i);
  } else {
    for (const auto& r : raw) {
      if (row_of.emplace(r.respondent_id, respondents.size()).second) {
        respondents.push_back(r.respondent_id);
      }
    }
  }
  std::vector<std::string> questions;
  std::unordered_map<std::string, std::size_t> col_of;
  for (const auto& e : plan.entries) {
    col_of.emplace(e.question_id, questions.size());
    questions.push_back(e.question_id);
  }

  const std::size_t n_cols = questions.size();
  // (row, col) -> option -> stance
  std::map<std::pair<std::size_t, std::size_t>, std::map<std::string, OptionStance>> merged;
  for (const auto& r : raw) {
    auto col_it = col_of.find(r.question_id);
    const QuestionSpec* q = catalog.find(r.question_id);
    if (col_it == col_of.end() || !q) {
      ++log.unknown_question_records;
      continue;
    }
    auto row_it = row_of.find(r.respondent_id);
    if (row_it == row_of.end()) continue;
    auto& cell = merged[{row_it->second, col_it->second}];
    for (const auto& sel : r.selected) {
      const auto opt = match_option(*q, sel.option);
      if (!opt) {
        ++log.unknown_option_selections;
        continue;
      }
      auto& os = cell[*opt];
      if (os.stance && *os.stance != sel.stance) os.contradictory = true;
      if (!os.stance) os.stance = sel.stance;
    }
  }

  std::vector<double> values(respondents.size() * n_cols, 0.0);
  std::vector<std::uint8_t> missing(respondents.size() * n_cols, 1);
  for (const auto& [pos, options] : merged) {
    const auto& entry = plan.entries[pos.second];
    const std::size_t idx = pos.first * n_cols + pos.second;
    const auto contradiction = [&](const std::string& option) {
      log.contradictions.push_back({respondents[pos.first], entry.question_id,
                                    "contradictory stances on option \"" + option + "\""});
    };
    if (auto it = options.find(entry.target_option); it != options.end()) {
      if (it->second.contradictory) {
        contradiction(it->first);
        continue;
      }
      values[idx] = normalize_code(*it->second.stance);
      missing[idx] = 0;
      continue;
    }
    if (entry.is_binary && entry.complement_option) {
      if (auto it = options.find(*entry.complement_option); it != options.end()) {
        if (it->second.contradictory) {
          contradiction(it->first);
          continue;
        }
        values[idx] = 1.0 - normalize_code(*it->second.stance);
        missing[idx] = 0;
      }
    }
  }

  return {ResponseMatrix(std::move(respondents), std::move(questions), std::move(values),
                         std::move(missing), std::move(source_tag)),
          std::move(log)};
}

bool same_basis(const ResponseMatrix& a, const ResponseMatrix& b) noexcept {
  return a.respondent_ids() == b.respondent_ids() && a.question_ids() == b.question_ids();
}

std::pair<ResponseMatrix, ResponseMatrix> align_panels(const ResponseMatrix& a,
                                                       const ResponseMatrix& b) {
  std::vector<std::size_t> rows_a, rows_b, cols_a, cols_b;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (auto rb = b.respondent_index(a.respondent_ids()[r])) {
      rows_a.push_back(r);
      rows_b.push_back(*rb);
    }
  }
  for (std::size_t q = 0; q < a.cols(); ++q) {
    if (auto qb = b.question_index(a.question_ids()[q])) {
      cols_a.push_back(q);
      cols_b.push_back(*qb);
    }
  }
  if (rows_a.empty()) {
    throw AlignmentError("panels " + a.source_tag() + " and " + b.source_tag() +
                         " share no respondents");
  }
  if (cols_a.empty()) {
    throw AlignmentError("panels " + a.source_tag() + " and " + b.source_tag() +
                         " share no questions");
  }
  return {a.select(rows_a, cols_a), b.select(rows_b, cols_b)};
}

}  // namespace silfid
