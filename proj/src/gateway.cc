#include "advqa/gateway.h"

namespace advqa {

AnswerReply CountingGateway::answer(std::string_view question,
                                    std::string_view context,
                                    QueryKind kind) const {
  ++calls_;
  return inner_.answer(question, context, kind);
}

double CountingGateway::score_answer(std::string_view question,
                                     std::string_view context,
                                     std::string_view answer) const {
  ++calls_;
  return inner_.score_answer(question, context, answer);
}

AttentionProfile CountingGateway::attention_profile(
    std::string_view question, std::string_view context) const {
  ++calls_;
  return inner_.attention_profile(question, context);
}

std::vector<MaskCandidate> CountingGateway::fill_mask(
    std::string_view masked_text, std::string_view original_word_hint,
    std::size_t top_d) const {
  // A zero budget never reaches the model.
  if (top_d == 0) return {};
  ++calls_;
  return inner_.fill_mask(masked_text, original_word_hint, top_d);
}

Eigen::VectorXd CountingGateway::embed(std::string_view text) const {
  ++calls_;
  return inner_.embed(text);
}

double CountingGateway::perplexity(std::string_view text) const {
  ++calls_;
  return inner_.perplexity(text);
}

}  // namespace advqa
