#pragma once

#include <atomic>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "advqa/corpus.h"

namespace advqa {

// Literal placeholder put in place of the word sent to fill_mask.
inline constexpr std::string_view kMaskToken = "[MASK]";

struct BooleanScores {
  double yes = 0.0;
  double no = 0.0;
};

struct AnswerReply {
  std::string answer_text;
  // Sum of token log-probabilities of answer_text.
  double answer_score = 0.0;
  // Present iff the query was Boolean.
  std::optional<BooleanScores> boolean_scores;
};

// One subword of the context with its attention mass, averaged over layers,
// heads and target positions by the model side. Offsets are character
// indices into the context (question positions are never included).
struct SubwordScore {
  std::size_t start = 0;
  std::size_t end = 0;
  double score = 0.0;
};

struct AttentionProfile {
  std::vector<SubwordScore> subwords;
};

struct MaskCandidate {
  std::string token;
  double score = 0.0;
};

struct HealthStatus {
  bool ok = false;
  std::vector<std::string> model_ids;
};

// Capability interface to the victim model and the auxiliary models.
// Implementations must be safe to call concurrently and deterministic for
// identical inputs.
class ModelGateway {
 public:
  virtual ~ModelGateway() = default;

  virtual AnswerReply answer(std::string_view question,
                             std::string_view context,
                             QueryKind kind) const = 0;
  // log P(answer | question, context)
  virtual double score_answer(std::string_view question,
                              std::string_view context,
                              std::string_view answer) const = 0;
  virtual AttentionProfile attention_profile(std::string_view question,
                                             std::string_view context) const = 0;
  // At most `top_d` candidates for the "[MASK]" in `masked_text`, best first.
  virtual std::vector<MaskCandidate> fill_mask(
      std::string_view masked_text, std::string_view original_word_hint,
      std::size_t top_d) const = 0;
  virtual Eigen::VectorXd embed(std::string_view text) const = 0;
  virtual double perplexity(std::string_view text) const = 0;
  virtual HealthStatus health() const = 0;
};

// Forwards to another gateway and counts model calls. health() is not
// counted.
class CountingGateway final : public ModelGateway {
 public:
  explicit CountingGateway(const ModelGateway& inner) : inner_(inner) {}

  std::size_t calls() const { return calls_.load(); }

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
  HealthStatus health() const override { return inner_.health(); }

 private:
  const ModelGateway& inner_;
  mutable std::atomic<std::size_t> calls_{0};
};

}  // namespace advqa
