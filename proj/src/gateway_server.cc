#include "advqa/gateway_server.h"

#include <functional>

#include "advqa/errors.h"
#include "advqa/wire.h"
#include "httplib.h"

namespace advqa {

using nlohmann::json;

struct GatewayServer::Impl {
  const ModelGateway& gateway;
  httplib::Server server;

  explicit Impl(const ModelGateway& g) : gateway(g) {}

  void route(std::string_view path, std::function<json(const json&)> handler) {
    server.Post(std::string(path), [handler](const httplib::Request& req,
                                             httplib::Response& res) {
      try {
        const json body = wire::parse_body(req.body);
        res.set_content(handler(body).dump(), "application/json");
      } catch (const ProtocolError& e) {
        res.status = 400;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(json{{"error", e.what()}}.dump(), "application/json");
      }
    });
  }

  void install() {
    route(wire::kAnswerPath, [this](const json& j) {
      const auto r = wire::decode_answer_request(j);
      return wire::encode(gateway.answer(r.question, r.context, r.kind));
    });
    route(wire::kScoreAnswerPath, [this](const json& j) {
      const auto r = wire::decode_score_answer_request(j);
      return wire::encode_logprob(
          gateway.score_answer(r.question, r.context, r.answer));
    });
    route(wire::kAttentionPath, [this](const json& j) {
      const auto r = wire::decode_attention_request(j);
      return wire::encode(gateway.attention_profile(r.question, r.context));
    });
    route(wire::kFillMaskPath, [this](const json& j) {
      const auto r = wire::decode_fill_mask_request(j);
      if (r.masked_text.find(kMaskToken) == std::string::npos) {
        throw ProtocolError("masked_text contains no [MASK] placeholder");
      }
      return wire::encode(
          gateway.fill_mask(r.masked_text, r.original_word_hint, r.top_d));
    });
    route(wire::kEmbedPath, [this](const json& j) {
      return wire::encode_vector(gateway.embed(wire::decode_text_request(j).text));
    });
    route(wire::kPerplexityPath, [this](const json& j) {
      return wire::encode_ppl(gateway.perplexity(wire::decode_text_request(j).text));
    });
    auto health = [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(wire::encode(gateway.health()).dump(), "application/json");
    };
    server.Post(std::string(wire::kHealthPath), health);
    server.Get(std::string(wire::kHealthPath), health);
  }
};

GatewayServer::GatewayServer(const ModelGateway& gateway)
    : impl_(std::make_unique<Impl>(gateway)) {
  impl_->install();
}

GatewayServer::~GatewayServer() { stop(); }

int GatewayServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void GatewayServer::serve() { impl_->server.listen_after_bind(); }

int GatewayServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  if (bound < 0) return bound;
  thread_ = std::thread([this] { serve(); });
  impl_->server.wait_until_ready();
  return bound;
}

void GatewayServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace advqa
