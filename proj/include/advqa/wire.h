#pragma once

#include <string>
#include <string_view>

#include "advqa/gateway.h"
#include "json.hpp"

// JSON encoding of the model-gateway HTTP protocol. Every endpoint is a POST
// with a UTF-8 JSON body. Decoders throw ProtocolError on schema mismatch.
namespace advqa::wire {

inline constexpr std::string_view kAnswerPath = "/v1/answer";
inline constexpr std::string_view kScoreAnswerPath = "/v1/score_answer";
inline constexpr std::string_view kAttentionPath = "/v1/attention";
inline constexpr std::string_view kFillMaskPath = "/v1/fill_mask";
inline constexpr std::string_view kEmbedPath = "/v1/embed";
inline constexpr std::string_view kPerplexityPath = "/v1/perplexity";
inline constexpr std::string_view kHealthPath = "/v1/health";

struct AnswerRequest {
  std::string question;
  std::string context;
  QueryKind kind = QueryKind::kInformative;
};

struct ScoreAnswerRequest {
  std::string question;
  std::string context;
  std::string answer;
};

struct AttentionRequest {
  std::string question;
  std::string context;
};

struct FillMaskRequest {
  std::string masked_text;
  std::string original_word_hint;
  std::size_t top_d = 0;
};

struct TextRequest {
  std::string text;
};

nlohmann::json encode(const AnswerRequest& r);
nlohmann::json encode(const ScoreAnswerRequest& r);
nlohmann::json encode(const AttentionRequest& r);
nlohmann::json encode(const FillMaskRequest& r);
nlohmann::json encode(const TextRequest& r);

AnswerRequest decode_answer_request(const nlohmann::json& j);
ScoreAnswerRequest decode_score_answer_request(const nlohmann::json& j);
AttentionRequest decode_attention_request(const nlohmann::json& j);
FillMaskRequest decode_fill_mask_request(const nlohmann::json& j);
TextRequest decode_text_request(const nlohmann::json& j);

nlohmann::json encode(const AnswerReply& r);
nlohmann::json encode_logprob(double logprob);
nlohmann::json encode(const AttentionProfile& r);
nlohmann::json encode(const std::vector<MaskCandidate>& r);
nlohmann::json encode_vector(const Eigen::VectorXd& v);
nlohmann::json encode_ppl(double ppl);
nlohmann::json encode(const HealthStatus& r);

AnswerReply decode_answer_reply(const nlohmann::json& j);
double decode_logprob(const nlohmann::json& j);
AttentionProfile decode_attention(const nlohmann::json& j);
std::vector<MaskCandidate> decode_candidates(const nlohmann::json& j);
Eigen::VectorXd decode_vector(const nlohmann::json& j);
double decode_ppl(const nlohmann::json& j);
HealthStatus decode_health(const nlohmann::json& j);

// Parses a body, mapping JSON syntax errors to ProtocolError.
nlohmann::json parse_body(std::string_view body);

}  // namespace advqa::wire
