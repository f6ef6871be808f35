#include "advqa/remote_gateway.h"

#include <regex>

#include "advqa/errors.h"
#include "advqa/utf8.h"
#include "advqa/wire.h"
#include "httplib.h"

namespace advqa {

using nlohmann::json;

namespace {

// Releases a semaphore slot on scope exit.
class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<>& s) : s_(s) { s_.acquire(); }
  ~SlotGuard() { s_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<>& s_;
};

}  // namespace

RemoteGateway::RemoteGateway(const std::string& base_url,
                             std::chrono::milliseconds timeout, int max_inflight)
    : base_url_(base_url), timeout_(timeout) {
  static const std::regex kUrl(R"(^(http://[^/:\s]+(:[0-9]{1,5})?)(/[^\s]*)?$)");
  std::smatch m;
  if (!std::regex_match(base_url, m, kUrl)) {
    throw UsageError("malformed gateway URL '" + base_url +
                     "' (expected http://host[:port][/prefix])");
  }
  if (max_inflight < 1) throw UsageError("max_inflight must be >= 1");
  host_port_ = m[1].str();
  prefix_ = m[3].str();
  while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
  inflight_ = std::make_unique<std::counting_semaphore<>>(max_inflight);
}

RemoteGateway::~RemoteGateway() = default;

json RemoteGateway::post(std::string_view path, const json& body) const {
  const std::string payload = body.dump();
  const std::string full_path = prefix_ + std::string(path);
  SlotGuard slot(*inflight_);
  httplib::Result res;
  for (int attempt = 0; attempt < 2; ++attempt) {
    httplib::Client client(host_port_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    res = client.Post(full_path, payload, "application/json");
    if (res) break;
  }
  if (!res) {
    throw GatewayUnreachable("gateway " + base_url_ + full_path +
                             " unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw RemoteModelError(res->status, res->body);
  }
  return wire::parse_body(res->body);
}

AnswerReply RemoteGateway::answer(std::string_view question,
                                  std::string_view context,
                                  QueryKind kind) const {
  const wire::AnswerRequest req{std::string(question), std::string(context), kind};
  AnswerReply reply = wire::decode_answer_reply(post(wire::kAnswerPath, wire::encode(req)));
  if (kind == QueryKind::kBoolean && !reply.boolean_scores) {
    throw ProtocolError("boolean query answered without boolean_scores");
  }
  return reply;
}

double RemoteGateway::score_answer(std::string_view question,
                                   std::string_view context,
                                   std::string_view answer) const {
  const wire::ScoreAnswerRequest req{std::string(question), std::string(context),
                                     std::string(answer)};
  return wire::decode_logprob(post(wire::kScoreAnswerPath, wire::encode(req)));
}

AttentionProfile RemoteGateway::attention_profile(std::string_view question,
                                                  std::string_view context) const {
  const wire::AttentionRequest req{std::string(question), std::string(context)};
  AttentionProfile profile =
      wire::decode_attention(post(wire::kAttentionPath, wire::encode(req)));
  const std::size_t n = utf8::length(context);
  for (const SubwordScore& s : profile.subwords) {
    if (s.end > n) {
      throw ProtocolError("attention subword [" + std::to_string(s.start) + "," +
                          std::to_string(s.end) + ") lies outside the context");
    }
  }
  return profile;
}

std::vector<MaskCandidate> RemoteGateway::fill_mask(
    std::string_view masked_text, std::string_view original_word_hint,
    std::size_t top_d) const {
  if (top_d == 0) return {};
  const wire::FillMaskRequest req{std::string(masked_text),
                                  std::string(original_word_hint), top_d};
  std::vector<MaskCandidate> out =
      wire::decode_candidates(post(wire::kFillMaskPath, wire::encode(req)));
  if (out.size() > top_d) out.resize(top_d);
  return out;
}

Eigen::VectorXd RemoteGateway::embed(std::string_view text) const {
  return wire::decode_vector(
      post(wire::kEmbedPath, wire::encode(wire::TextRequest{std::string(text)})));
}

double RemoteGateway::perplexity(std::string_view text) const {
  return wire::decode_ppl(post(wire::kPerplexityPath,
                               wire::encode(wire::TextRequest{std::string(text)})));
}

HealthStatus RemoteGateway::health() const {
  return wire::decode_health(post(wire::kHealthPath, json::object()));
}

}  // namespace advqa
