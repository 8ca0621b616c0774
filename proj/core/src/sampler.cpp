#include "silfid/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "silfid/io.hpp"

// Last: <resolv.h>, pulled in by httplib, defines a `_res` macro that
// collides with Eigen parameter names.
#include <httplib.h>

namespace silfid {

using nlohmann::json;

void validate(const SamplerConfig& cfg) {
  if (cfg.endpoint.empty()) throw InputError("sampler: endpoint is required");
  if (cfg.model.empty()) throw InputError("sampler: model is required");
  if (!(cfg.temperature >= 0.0)) throw InputError("sampler: temperature must be >= 0");
  if (cfg.max_parallel < 1) throw InputError("sampler: max parallel must be >= 1");
  if (cfg.retries < 0) throw InputError("sampler: retries must be >= 0");
  if (cfg.resume && !cfg.checkpoint) throw InputError("sampler: resume requires a checkpoint path");
}

std::string chat_request_body(const ChatRequest& req) {
  json body;
  body["model"] = req.model;
  body["temperature"] = req.temperature;
  body["messages"] = json::array({
      {{"role", "system"}, {"content", req.system}},
      {{"role", "user"}, {"content", req.user}},
  });
  return body.dump();
}

std::string chat_response_content(const std::string& body) {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) return body;
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    return body;
  }
}

HttpChatTransport::HttpChatTransport(const SamplerConfig& cfg) : timeout_(cfg.timeout) {
  const auto scheme_end = cfg.endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw InputError("sampler: endpoint must be an absolute URL: " + cfg.endpoint);
  }
  const auto path_start = cfg.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = cfg.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : cfg.endpoint.substr(path_start);
  if (const char* tok = std::getenv(cfg.token_env.c_str())) token_ = tok;
}

std::string HttpChatTransport::complete(const ChatRequest& req) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  auto res = client.Post(path_, headers, chat_request_body(req), "application/json");
  if (!res) {
    throw TransportError("request to " + scheme_host_port_ + path_ +
                         " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
  }
  return chat_response_content(res->body);
}

double QuestionParseStats::success_rate() const {
  return attempted == 0 ? 0.0
                        : static_cast<double>(count(ParseStatus::parsed)) /
                              static_cast<double>(attempted);
}

std::optional<ParseStatus> QuestionParseStats::primary_failure() const {
  std::optional<ParseStatus> best;
  std::size_t best_count = 0;
  for (std::size_t i = 1; i < kParseStatusCount; ++i) {
    if (by_status[i] > best_count) {
      best_count = by_status[i];
      best = static_cast<ParseStatus>(i);
    }
  }
  return best;
}

QuestionParseStats SurveyResult::overall() const {
  QuestionParseStats total;
  total.question_id = "*";
  for (const auto& s : stats) {
    total.attempted += s.attempted;
    for (std::size_t i = 0; i < kParseStatusCount; ++i) total.by_status[i] += s.by_status[i];
  }
  return total;
}

namespace {

ParseStatus status_from_string(const std::string& s) {
  for (std::size_t i = 0; i < kParseStatusCount; ++i) {
    const auto st = static_cast<ParseStatus>(i);
    if (to_string(st) == s) return st;
  }
  throw InputError("checkpoint: unknown status " + s);
}

struct CellRecord {
  std::size_t profile = 0;
  std::size_t question = 0;
  ParseOutcome outcome;
};

std::string checkpoint_line(const Profile& p, const QuestionSpec& q, const ParseOutcome& o) {
  json j;
  j["respondent_id"] = p.respondent_id;
  j["question_id"] = q.question_id;
  j["status"] = std::string(to_string(o.status));
  j["raw_text"] = o.raw_text;
  j["selected"] = json::array();
  for (const auto& s : o.stances) {
    j["selected"].push_back({{"stance", std::string(s.stance.label())}, {"option", s.option}});
  }
  return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
}

}  // namespace

SurveyResult run_survey(const std::vector<Profile>& profiles, const QuestionCatalog& catalog,
                        const SamplerConfig& cfg, ChatTransport& transport) {
  validate(cfg);
  if (profiles.empty()) throw InputError("sampler: no profiles");
  if (catalog.size() == 0) throw InputError("sampler: empty catalog");
  index_profiles(profiles);

  std::vector<std::string> personas;
  personas.reserve(profiles.size());
  for (const auto& p : profiles) personas.push_back(render_persona(p));
  std::vector<std::string> prompts;
  prompts.reserve(catalog.size());
  for (const auto& q : catalog.questions()) prompts.push_back(render_question_prompt(q, cfg.variant));

  std::map<std::string, std::size_t> profile_index;
  for (std::size_t i = 0; i < profiles.size(); ++i) profile_index[profiles[i].respondent_id] = i;
  std::map<std::string, std::size_t> question_index;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    question_index[catalog.questions()[i].question_id] = i;
  }

  std::vector<CellRecord> records;
  std::set<std::pair<std::size_t, std::size_t>> done;
  if (cfg.checkpoint && cfg.resume && std::filesystem::exists(*cfg.checkpoint)) {
    std::ifstream in(*cfg.checkpoint);
    std::string line;
    while (std::getline(in, line)) {
      const json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;  // torn final line from an interrupted run
      auto pi = profile_index.find(j.value("respondent_id", std::string()));
      auto qi = question_index.find(j.value("question_id", std::string()));
      if (pi == profile_index.end() || qi == question_index.end()) continue;
      if (!done.emplace(pi->second, qi->second).second) continue;
      CellRecord rec{pi->second, qi->second, {}};
      rec.outcome.status = status_from_string(j.at("status").get<std::string>());
      rec.outcome.raw_text = j.value("raw_text", std::string());
      for (const auto& s : j.at("selected")) {
        rec.outcome.stances.push_back(
            {code_stance(s.at("stance").get<std::string>()), s.at("option").get<std::string>()});
      }
      records.push_back(std::move(rec));
    }
  }
  const std::size_t resumed = records.size();

  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t p = 0; p < profiles.size(); ++p) {
    for (std::size_t q = 0; q < catalog.size(); ++q) {
      if (!done.contains({p, q})) tasks.emplace_back(p, q);
    }
  }

  std::ofstream sink;
  if (cfg.checkpoint) {
    if (cfg.checkpoint->has_parent_path()) {
      std::filesystem::create_directories(cfg.checkpoint->parent_path());
    }
    sink.open(*cfg.checkpoint, cfg.resume ? std::ios::app : std::ios::trunc);
    if (!sink) throw InputError("cannot open checkpoint " + cfg.checkpoint->string());
  }

  std::mutex sink_mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::string abort_reason;

  const auto worker = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const auto [p, q] = tasks[t];
      const ChatRequest req{cfg.model, cfg.temperature, personas[p], prompts[q]};
      std::optional<std::string> text;
      std::string last_error;
      for (int attempt = 0; attempt <= cfg.retries && !abort.load(); ++attempt) {
        if (attempt > 0) std::this_thread::sleep_for(cfg.backoff * (1 << std::min(attempt - 1, 6)));
        try {
          text = transport.complete(req);
          break;
        } catch (const TransportError& e) {
          last_error = e.what();
        }
      }
      std::lock_guard lock(sink_mutex);
      if (!text) {
        if (!abort.exchange(true)) {
          abort_reason = "cell " + profiles[p].respondent_id + "/" +
                         catalog.questions()[q].question_id + " failed after " +
                         std::to_string(cfg.retries + 1) + " attempts: " + last_error;
        }
        return;
      }
      CellRecord rec{p, q, parse_response(*text, catalog.questions()[q])};
      if (sink.is_open()) {
        sink << checkpoint_line(profiles[p], catalog.questions()[q], rec.outcome);
        sink.flush();
      }
      records.push_back(std::move(rec));
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(1, std::min(cfg.max_parallel, tasks.size()));
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  std::sort(records.begin(), records.end(), [](const CellRecord& a, const CellRecord& b) {
    return std::tie(a.profile, a.question) < std::tie(b.profile, b.question);
  });
  SurveyResult result;
  result.resumed = resumed;
  result.attempted = records.size();
  result.stats.resize(catalog.size());
  for (std::size_t q = 0; q < catalog.size(); ++q) {
    result.stats[q].question_id = catalog.questions()[q].question_id;
  }
  for (auto& rec : records) {
    auto& st = result.stats[rec.question];
    ++st.attempted;
    ++st.by_status[static_cast<std::size_t>(rec.outcome.status)];
    if (rec.outcome.status == ParseStatus::parsed) {
      result.responses.push_back({profiles[rec.profile].respondent_id,
                                  catalog.questions()[rec.question].question_id,
                                  std::move(rec.outcome.stances)});
    }
  }
  if (abort.load()) throw SamplerAborted(abort_reason, std::move(result));
  return result;
}

SurveyResult run_survey(const std::vector<Profile>& profiles, const QuestionCatalog& catalog,
                        const SamplerConfig& cfg) {
  validate(cfg);
  HttpChatTransport transport(cfg);
  return run_survey(profiles, catalog, cfg, transport);
}

std::string parse_stats_to_json(const SurveyResult& result) {
  const auto encode = [](const QuestionParseStats& s) {
    json j;
    j["question_id"] = s.question_id;
    j["attempted"] = s.attempted;
    j["success_rate"] = s.success_rate();
    json counts;
    for (std::size_t i = 0; i < kParseStatusCount; ++i) {
      counts[std::string(to_string(static_cast<ParseStatus>(i)))] = s.by_status[i];
    }
    j["counts"] = counts;
    const auto pf = s.primary_failure();
    j["primary_failure"] = pf ? json(std::string(to_string(*pf))) : json(nullptr);
    return j;
  };
  json out;
  out["overall"] = encode(result.overall());
  out["resumed"] = result.resumed;
  out["questions"] = json::array();
  for (const auto& s : result.stats) out["questions"].push_back(encode(s));
  return out.dump(2) + "\n";
}

}  // namespace silfid
