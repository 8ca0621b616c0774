#include "silfid/finetune.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "silfid/error.hpp"

namespace silfid {

using nlohmann::json;

std::optional<StanceCode> invert_stance(StanceCode code) noexcept {
  if (code.level() == 0) return std::nullopt;
  return StanceCode(-code.level());
}

const char* to_string(RejectedMode mode) noexcept {
  return mode == RejectedMode::same_option ? "same_option" : "complement_option";
}

RejectedMode rejected_mode_from_string(const std::string& s) {
  if (s == "same_option") return RejectedMode::same_option;
  if (s == "complement_option") return RejectedMode::complement_option;
  throw InputError("unknown rejected mode: " + s);
}

namespace {

std::vector<Selection> rejected_selections(const RawResponse& r, const QuestionSpec& q,
                                           RejectedMode mode) {
  std::vector<Selection> out;
  for (const auto& s : r.selected) {
    const int level = s.stance.level();
    if (level == 0) continue;
    if (mode == RejectedMode::complement_option && std::abs(level) == 1 && q.is_binary &&
        q.complement_option) {
      if (s.option == q.target_option) {
        out.push_back({s.stance, *q.complement_option});
        continue;
      }
      if (s.option == *q.complement_option) {
        out.push_back({s.stance, q.target_option});
        continue;
      }
    }
    out.push_back({*invert_stance(s.stance), s.option});
  }
  return out;
}

}  // namespace

PreferenceSet build_preference_pairs(const std::vector<RawResponse>& responses,
                                     const std::vector<Profile>& profiles,
                                     const QuestionCatalog& catalog,
                                     const PreferenceOptions& options) {
  PreferenceSet set;
  set.mode = options.mode;
  set.variant = options.variant;
  const auto index = index_profiles(profiles);
  std::map<std::string, std::optional<std::string>> personas;
  std::map<std::string, std::string> question_prompts;

  std::vector<const RawResponse*> ordered;
  for (const auto& r : responses) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](const RawResponse* a, const RawResponse* b) {
    return std::tie(a->respondent_id, a->question_id) < std::tie(b->respondent_id, b->question_id);
  });

  for (const auto* r : ordered) {
    const auto* q = catalog.find(r->question_id);
    if (q == nullptr) {
      ++set.skipped_unknown_question;
      continue;
    }
    const auto profile = index.find(r->respondent_id);
    if (profile == index.end()) {
      ++set.skipped_no_profile;
      continue;
    }
    auto rejected = rejected_selections(*r, *q, options.mode);
    if (rejected.empty()) {
      ++set.skipped_agnostic;
      continue;
    }
    auto persona = personas.find(r->respondent_id);
    if (persona == personas.end()) {
      std::optional<std::string> text;
      try {
        text = render_persona(*profile->second);
      } catch (const InputError&) {
      }
      persona = personas.emplace(r->respondent_id, std::move(text)).first;
    }
    if (!persona->second) {
      ++set.skipped_incomplete_profile;
      continue;
    }
    auto qp = question_prompts.find(q->question_id);
    if (qp == question_prompts.end()) {
      qp = question_prompts.emplace(q->question_id, render_question_prompt(*q, options.variant)).first;
    }
    set.pairs.push_back({r->respondent_id, r->question_id, *persona->second + "\n\n" + qp->second,
                         serialize_stances(r->selected), serialize_stances(rejected)});
  }
  return set;
}

std::string preference_jsonl(const PreferenceSet& set) {
  std::string out;
  for (const auto& p : set.pairs) {
    out += json{{"prompt", p.prompt}, {"chosen", p.chosen}, {"rejected", p.rejected}}.dump();
    out += "\n";
  }
  return out;
}

std::string supervised_jsonl(const PreferenceSet& set) {
  std::string out;
  for (const auto& p : set.pairs) {
    out += json{{"prompt", p.prompt}, {"completion", p.chosen}}.dump();
    out += "\n";
  }
  return out;
}

std::string preference_manifest_json(const PreferenceSet& set) {
  std::map<std::string, std::size_t> per_respondent, per_question;
  for (const auto& p : set.pairs) {
    ++per_respondent[p.respondent_id];
    ++per_question[p.question_id];
  }
  json j;
  j["pairs"] = set.pairs.size();
  j["respondents"] = per_respondent.size();
  j["questions"] = per_question.size();
  j["rejected_mode"] = to_string(set.mode);
  j["prompt_variant"] = std::string(to_string(set.variant));
  j["skipped"] = {{"agnostic", set.skipped_agnostic},
                  {"no_profile", set.skipped_no_profile},
                  {"incomplete_profile", set.skipped_incomplete_profile},
                  {"unknown_question", set.skipped_unknown_question}};
  j["per_respondent"] = per_respondent;
  j["per_question"] = per_question;
  return j.dump(2) + "\n";
}

double dpo_loss(const DpoInputs& in) {
  for (double lp : {in.logp_chosen_policy, in.logp_rejected_policy, in.logp_chosen_ref,
                    in.logp_rejected_ref}) {
    if (!(lp <= 0)) throw InputError("dpo_loss: log-probabilities must be <= 0");
  }
  if (!(in.beta > 0)) throw InputError("dpo_loss: beta must be positive");
  const double z = in.beta * ((in.logp_chosen_policy - in.logp_chosen_ref) -
                              (in.logp_rejected_policy - in.logp_rejected_ref));
  // -log sigmoid(z) = softplus(-z)
  const double x = -z;
  return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

}  // namespace silfid
