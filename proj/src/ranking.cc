#include "advqa/ranking.h"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "advqa/errors.h"

namespace advqa {

Eigen::VectorXd attention_word_sums(const TokenizedContext& ctx,
                                    const AttentionProfile& profile) {
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ctx.size()));
  for (const SubwordScore& s : profile.subwords) {
    if (s.end > ctx.char_length || s.start > s.end) {
      throw ProtocolError("attention subword [" + std::to_string(s.start) + "," +
                          std::to_string(s.end) + ") outside context of length " +
                          std::to_string(ctx.char_length));
    }
    // Words are sorted by start; find the last word starting at or before s.
    auto it = std::upper_bound(
        ctx.words.begin(), ctx.words.end(), s.start,
        [](std::size_t pos, const Span& w) { return pos < w.start; });
    if (it == ctx.words.begin()) continue;
    --it;
    if (s.start < it->end) sums[it - ctx.words.begin()] += s.score;
  }
  return sums;
}

Eigen::VectorXd abr_scores(std::string_view question, const TokenizedContext& ctx,
                           const ModelGateway& gateway) {
  const AttentionProfile profile = gateway.attention_profile(question, ctx.source);
  return min_max_normalize(attention_word_sums(ctx, profile));
}

Eigen::VectorXd rbr_raw_scores(std::string_view question,
                               const TokenizedContext& ctx, std::string_view answer,
                               const ModelGateway& gateway, bool signed_diff) {
  const double base = gateway.score_answer(question, ctx.source, answer);
  Eigen::VectorXd raw(static_cast<Eigen::Index>(ctx.size()));
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    const double without = gateway.score_answer(question, delete_word(ctx, i), answer);
    const double diff = base - without;
    raw[static_cast<Eigen::Index>(i)] = signed_diff ? diff : std::abs(diff);
  }
  return raw;
}

Eigen::VectorXd rbr_scores(std::string_view question, const TokenizedContext& ctx,
                           std::string_view answer, const ModelGateway& gateway,
                           bool signed_diff) {
  return min_max_normalize(
      rbr_raw_scores(question, ctx, answer, gateway, signed_diff));
}

WordScores fuse(const Eigen::VectorXd& abr, const Eigen::VectorXd& rbr) {
  if (abr.size() != rbr.size()) {
    throw std::invalid_argument("fuse: abr has " + std::to_string(abr.size()) +
                                " entries but rbr has " +
                                std::to_string(rbr.size()));
  }
  return {abr, rbr, abr + rbr};
}

RankedTargets top_k_select(const WordScores& scores, std::size_t k,
                           const EligibilityFn& eligible) {
  RankedTargets out;
  out.k_requested = k;
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < static_cast<std::size_t>(scores.size()); ++i) {
    if (!eligible || eligible(i)) pool.push_back(i);
  }
  const std::size_t take = std::min(k, pool.size());
  const Eigen::VectorXd& f = scores.fused;
  std::partial_sort(pool.begin(), pool.begin() + static_cast<long>(take), pool.end(),
                    [&f](std::size_t a, std::size_t b) {
                      const double fa = f[static_cast<Eigen::Index>(a)];
                      const double fb = f[static_cast<Eigen::Index>(b)];
                      return fa != fb ? fa > fb : a < b;
                    });
  out.indices.assign(pool.begin(), pool.begin() + static_cast<long>(take));
  return out;
}

}  // namespace advqa
