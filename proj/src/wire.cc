#include "advqa/wire.h"

#include <cmath>

#include "advqa/errors.h"

namespace advqa::wire {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* name) {
  if (!j.is_object()) throw ProtocolError("expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) {
    throw ProtocolError(std::string("missing field '") + name + "'");
  }
  return *it;
}

std::string string_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_string()) {
    throw ProtocolError(std::string("field '") + name + "' must be a string");
  }
  return v.get<std::string>();
}

double number_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number()) {
    throw ProtocolError(std::string("field '") + name + "' must be a number");
  }
  return v.get<double>();
}

std::size_t index_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ProtocolError(std::string("field '") + name +
                        "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

const json& array_field(const json& j, const char* name) {
  const json& v = field(j, name);
  if (!v.is_array()) {
    throw ProtocolError(std::string("field '") + name + "' must be an array");
  }
  return v;
}

}  // namespace

json encode(const AnswerRequest& r) {
  return {{"question", r.question},
          {"context", r.context},
          {"kind", std::string(to_string(r.kind))}};
}

json encode(const ScoreAnswerRequest& r) {
  return {{"question", r.question}, {"context", r.context}, {"answer", r.answer}};
}

json encode(const AttentionRequest& r) {
  return {{"question", r.question}, {"context", r.context}};
}

json encode(const FillMaskRequest& r) {
  return {{"masked_text", r.masked_text},
          {"original_word_hint", r.original_word_hint},
          {"top_d", r.top_d}};
}

json encode(const TextRequest& r) { return {{"text", r.text}}; }

AnswerRequest decode_answer_request(const json& j) {
  AnswerRequest r;
  r.question = string_field(j, "question");
  r.context = string_field(j, "context");
  const std::string kind = string_field(j, "kind");
  if (kind == "informative") {
    r.kind = QueryKind::kInformative;
  } else if (kind == "boolean") {
    r.kind = QueryKind::kBoolean;
  } else {
    throw ProtocolError("field 'kind' must be \"informative\" or \"boolean\"");
  }
  return r;
}

ScoreAnswerRequest decode_score_answer_request(const json& j) {
  return {string_field(j, "question"), string_field(j, "context"),
          string_field(j, "answer")};
}

AttentionRequest decode_attention_request(const json& j) {
  return {string_field(j, "question"), string_field(j, "context")};
}

FillMaskRequest decode_fill_mask_request(const json& j) {
  return {string_field(j, "masked_text"), string_field(j, "original_word_hint"),
          index_field(j, "top_d")};
}

TextRequest decode_text_request(const json& j) { return {string_field(j, "text")}; }

json encode(const AnswerReply& r) {
  json j = {{"answer_text", r.answer_text}, {"answer_score", r.answer_score}};
  if (r.boolean_scores) {
    j["boolean_scores"] = {{"yes", r.boolean_scores->yes},
                           {"no", r.boolean_scores->no}};
  }
  return j;
}

json encode_logprob(double logprob) { return {{"logprob", logprob}}; }

json encode(const AttentionProfile& r) {
  json subwords = json::array();
  for (const SubwordScore& s : r.subwords) {
    subwords.push_back({{"start", s.start}, {"end", s.end}, {"score", s.score}});
  }
  return {{"subwords", subwords}};
}

json encode(const std::vector<MaskCandidate>& r) {
  json candidates = json::array();
  for (const MaskCandidate& c : r) {
    candidates.push_back({{"token", c.token}, {"score", c.score}});
  }
  return {{"candidates", candidates}};
}

json encode_vector(const Eigen::VectorXd& v) {
  return {{"vector", std::vector<double>(v.data(), v.data() + v.size())}};
}

json encode_ppl(double ppl) { return {{"ppl", ppl}}; }

json encode(const HealthStatus& r) {
  return {{"ok", r.ok}, {"model_ids", r.model_ids}};
}

AnswerReply decode_answer_reply(const json& j) {
  AnswerReply r;
  r.answer_text = string_field(j, "answer_text");
  r.answer_score = number_field(j, "answer_score");
  auto it = j.find("boolean_scores");
  if (it != j.end() && !it->is_null()) {
    r.boolean_scores = BooleanScores{number_field(*it, "yes"),
                                     number_field(*it, "no")};
  }
  return r;
}

double decode_logprob(const json& j) { return number_field(j, "logprob"); }

AttentionProfile decode_attention(const json& j) {
  AttentionProfile p;
  for (const json& s : array_field(j, "subwords")) {
    SubwordScore sw{index_field(s, "start"), index_field(s, "end"),
                    number_field(s, "score")};
    if (sw.end < sw.start) throw ProtocolError("subword end precedes start");
    if (!(sw.score >= 0.0) || !std::isfinite(sw.score)) {
      throw ProtocolError("subword score must be finite and non-negative");
    }
    p.subwords.push_back(sw);
  }
  return p;
}

std::vector<MaskCandidate> decode_candidates(const json& j) {
  std::vector<MaskCandidate> out;
  for (const json& c : array_field(j, "candidates")) {
    MaskCandidate m{string_field(c, "token"), number_field(c, "score")};
    if (m.token.empty()) throw ProtocolError("candidate token is empty");
    out.push_back(std::move(m));
  }
  return out;
}

Eigen::VectorXd decode_vector(const json& j) {
  const json& arr = array_field(j, "vector");
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ProtocolError("vector entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

double decode_ppl(const json& j) {
  const double ppl = number_field(j, "ppl");
  if (!(ppl > 0.0)) throw ProtocolError("ppl must be positive");
  return ppl;
}

HealthStatus decode_health(const json& j) {
  HealthStatus h;
  const json& ok = field(j, "ok");
  if (!ok.is_boolean()) throw ProtocolError("field 'ok' must be a boolean");
  h.ok = ok.get<bool>();
  for (const json& id : array_field(j, "model_ids")) {
    if (!id.is_string()) throw ProtocolError("model_ids must be strings");
    h.model_ids.push_back(id.get<std::string>());
  }
  return h;
}

json parse_body(std::string_view body) {
  try {
    return json::parse(body);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed JSON body: ") + e.what());
  }
}

}  // namespace advqa::wire
