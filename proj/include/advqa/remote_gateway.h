#pragma once

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include "advqa/gateway.h"
#include "json.hpp"

namespace advqa {

// HTTP client for the gateway wire protocol. Each capability is one POST.
// At most `max_inflight` requests are outstanding at a time across all
// threads; a transport failure is retried once before GatewayUnreachable is
// raised.
class RemoteGateway final : public ModelGateway {
 public:
  RemoteGateway(const std::string& base_url, std::chrono::milliseconds timeout,
                int max_inflight);
  ~RemoteGateway() override;

  const std::string& base_url() const { return base_url_; }

  AnswerReply answer(std::string_view question, std::string_view context,
                     QueryKind kind) const override;
  double score_answer(std::string_view question, std::string_view context,
                      std::string_view answer) const override;
  AttentionProfile attention_profile(std::string_view question,
                                     std::string_view context) const override;
  std::vector<MaskCandidate> fill_mask(std::string_view masked_text,
                                       std::string_view original_word_hint,
                                       std::size_t top_d) const override;
  Eigen::VectorXd embed(std::string_view text) const override;
  double perplexity(std::string_view text) const override;
  HealthStatus health() const override;

  // Sends `body` to `path` and returns the parsed response body.
  nlohmann::json post(std::string_view path, const nlohmann::json& body) const;

 private:
  std::string base_url_;
  std::string host_port_;  // scheme://host:port
  std::string prefix_;     // optional path prefix, no trailing slash
  std::chrono::milliseconds timeout_;
  std::unique_ptr<std::counting_semaphore<>> inflight_;
};

}  // namespace advqa
