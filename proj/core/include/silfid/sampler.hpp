#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "silfid/error.hpp"
#include "silfid/ingest.hpp"
#include "silfid/prompts.hpp"
#include "silfid/response_parser.hpp"
#include "silfid/survey.hpp"

namespace silfid {

struct SamplerConfig {
  /// Full URL of a chat-completion endpoint, e.g.
  /// http://127.0.0.1:8000/v1/chat/completions
  std::string endpoint;
  std::string model;
  double temperature = 0.0;
  std::size_t max_parallel = 4;
  /// Extra attempts after the first failed request for a cell.
  int retries = 3;
  std::chrono::milliseconds backoff{500};
  PromptVariant variant = PromptVariant::baseline;
  /// Environment variable holding the bearer token; unset -> no auth header.
  std::string token_env = "SILFID_API_KEY";
  std::chrono::seconds timeout{120};
  /// Line-delimited per-cell results; existing records are reused on resume.
  std::optional<std::filesystem::path> checkpoint;
  bool resume = false;
};

/// Throws InputError on negative temperature, zero parallelism, negative
/// retries, or an empty endpoint/model.
void validate(const SamplerConfig& cfg);

struct ChatRequest {
  std::string model;
  double temperature = 0.0;
  std::string system;  // persona
  std::string user;    // question prompt
};

/// JSON body {model, temperature, messages:[{role:"system"},{role:"user"}]}.
std::string chat_request_body(const ChatRequest& req);

/// Extracts choices[0].message.content from a chat-completion response;
/// falls back to the raw body when the shape is unexpected.
std::string chat_response_content(const std::string& body);

/// Raised by a transport when a request fails in a way worth retrying.
class TransportError : public Error {
 public:
  using Error::Error;
};

class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  /// Returns the assistant text. Throws TransportError on failure.
  virtual std::string complete(const ChatRequest& req) = 0;
};

/// Plain HTTP(S) POST of chat_request_body to the configured endpoint.
class HttpChatTransport final : public ChatTransport {
 public:
  explicit HttpChatTransport(const SamplerConfig& cfg);
  std::string complete(const ChatRequest& req) override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::string token_;
  std::chrono::seconds timeout_;
};

struct QuestionParseStats {
  std::string question_id;
  std::size_t attempted = 0;
  std::array<std::size_t, kParseStatusCount> by_status{};

  [[nodiscard]] std::size_t count(ParseStatus s) const {
    return by_status[static_cast<std::size_t>(s)];
  }
  [[nodiscard]] double success_rate() const;
  /// Most frequent failure status, if any failure occurred.
  [[nodiscard]] std::optional<ParseStatus> primary_failure() const;
};

struct SurveyResult {
  /// Successfully parsed answers, ordered by (profile, question).
  std::vector<RawResponse> responses;
  /// Catalog order.
  std::vector<QuestionParseStats> stats;
  std::size_t attempted = 0;
  std::size_t resumed = 0;

  [[nodiscard]] QuestionParseStats overall() const;
};

/// Raised when a cell still fails after all retries. Everything completed
/// so far is already in the checkpoint file.
class SamplerAborted : public Error {
 public:
  SamplerAborted(const std::string& what, SurveyResult partial)
      : Error(what), partial_(std::move(partial)) {}
  [[nodiscard]] const SurveyResult& partial() const noexcept { return partial_; }

 private:
  SurveyResult partial_;
};

/// One request per (profile, question) not already in the checkpoint.
SurveyResult run_survey(const std::vector<Profile>& profiles, const QuestionCatalog& catalog,
                        const SamplerConfig& cfg, ChatTransport& transport);

/// Same, over HttpChatTransport.
SurveyResult run_survey(const std::vector<Profile>& profiles, const QuestionCatalog& catalog,
                        const SamplerConfig& cfg);

/// JSON summary of per-question parse statistics.
std::string parse_stats_to_json(const SurveyResult& result);

}  // namespace silfid
