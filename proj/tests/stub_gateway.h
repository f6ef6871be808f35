#pragma once

#include <functional>
#include <optional>

#include "advqa/gateway.h"
#include "advqa/mock_gateway.h"

namespace advqa::testing {

// Mock gateway with individually replaceable capabilities.
class StubGateway final : public ModelGateway {
 public:
  explicit StubGateway(SynonymTable lexicon = {}, int window = 2)
      : mock_(std::move(lexicon), window) {}

  std::function<AttentionProfile(std::string_view, std::string_view)> on_attention;
  std::function<std::vector<MaskCandidate>(std::string_view, std::string_view, std::size_t)>
      on_fill_mask;
  std::function<AnswerReply(std::string_view, std::string_view, QueryKind)> on_answer;
  std::function<double(std::string_view, std::string_view, std::string_view)> on_score;

  AnswerReply answer(std::string_view q, std::string_view c, QueryKind k) const override {
    return on_answer ? on_answer(q, c, k) : mock_.answer(q, c, k);
  }
  double score_answer(std::string_view q, std::string_view c,
                      std::string_view a) const override {
    return on_score ? on_score(q, c, a) : mock_.score_answer(q, c, a);
  }
  AttentionProfile attention_profile(std::string_view q, std::string_view c) const override {
    return on_attention ? on_attention(q, c) : mock_.attention_profile(q, c);
  }
  std::vector<MaskCandidate> fill_mask(std::string_view m, std::string_view hint,
                                       std::size_t d) const override {
    return on_fill_mask ? on_fill_mask(m, hint, d) : mock_.fill_mask(m, hint, d);
  }
  Eigen::VectorXd embed(std::string_view t) const override { return mock_.embed(t); }
  double perplexity(std::string_view t) const override { return mock_.perplexity(t); }
  HealthStatus health() const override { return mock_.health(); }

  const MockGateway& mock() const { return mock_; }

 private:
  MockGateway mock_;
};

}  // namespace advqa::testing
