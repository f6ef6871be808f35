#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "advqa/corpus.h"
#include "advqa/gateway.h"

namespace advqa {

// Per-word importance of one context. `fused` is always abr + rbr; single
// ranking modes zero out the unused component.
struct WordScores {
  Eigen::VectorXd abr;
  Eigen::VectorXd rbr;
  Eigen::VectorXd fused;

  Eigen::Index size() const { return fused.size(); }
};

// Word indices in descending fused score, ties by lower index.
struct RankedTargets {
  std::vector<std::size_t> indices;
  std::size_t k_requested = 0;
};

using EligibilityFn = std::function<bool(std::size_t)>;

// Min-max scaling to [0, 1]. Constant (or single-entry) input maps to 0.5.
template <typename Derived>
Eigen::VectorXd min_max_normalize(const Eigen::MatrixBase<Derived>& raw) {
  if (raw.size() == 0) return Eigen::VectorXd();
  const double lo = raw.minCoeff();
  const double hi = raw.maxCoeff();
  if (!(hi > lo)) return Eigen::VectorXd::Constant(raw.size(), 0.5);
  return ((raw.array() - lo) / (hi - lo)).matrix();
}

// Sums subword attention into the word whose [start, end) contains the
// subword's first character. Subwords that start outside every word
// (punctuation) are dropped. Throws ProtocolError for offsets beyond the
// context.
Eigen::VectorXd attention_word_sums(const TokenizedContext& ctx,
                                    const AttentionProfile& profile);

// Attention-based ranking: min-max normalized attention_word_sums.
Eigen::VectorXd abr_scores(std::string_view question, const TokenizedContext& ctx,
                           const ModelGateway& gateway);

// raw_i = log P(a | q, C) - log P(a | q, C without word i), made absolute
// unless `signed_diff`. Issues exactly n + 1 score_answer calls.
Eigen::VectorXd rbr_raw_scores(std::string_view question,
                               const TokenizedContext& ctx, std::string_view answer,
                               const ModelGateway& gateway, bool signed_diff = false);

// Removal-based ranking: min-max normalized rbr_raw_scores.
Eigen::VectorXd rbr_scores(std::string_view question, const TokenizedContext& ctx,
                           std::string_view answer, const ModelGateway& gateway,
                           bool signed_diff = false);

// Hybrid ranking fusion. Throws std::invalid_argument on length mismatch.
WordScores fuse(const Eigen::VectorXd& abr, const Eigen::VectorXd& rbr);

RankedTargets top_k_select(const WordScores& scores, std::size_t k,
                           const EligibilityFn& eligible = {});

}  // namespace advqa
