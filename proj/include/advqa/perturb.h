#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advqa/corpus.h"
#include "advqa/errors.h"
#include "advqa/gateway.h"
#include "advqa/ranking.h"

namespace advqa {

enum class RankingMode { kABR, kRBR, kHRF };
enum class Strategy { kSingleWord, kGreedySequential, kJointBest };

std::string_view to_string(RankingMode mode);   // abr | rbr | hrf
std::string_view to_string(Strategy strategy);  // single | greedy | joint
RankingMode parse_ranking_mode(std::string_view tag);
Strategy parse_strategy(std::string_view tag);

struct AttackConfig {
  std::size_t top_k = 5;
  std::size_t d = 2;
  RankingMode mode = RankingMode::kHRF;
  Strategy strategy = Strategy::kGreedySequential;
  bool signed_rbr = false;
  bool exclude_answer_words = false;
  bool early_stop = true;
  std::uint64_t seed = 0;
};

struct Substitution {
  std::size_t word_index = 0;
  std::string original;
  std::string candidate;
  double mlm_score = 0.0;
};

// A perturbed context and the substitutions (disjoint word indices) that
// produce it from the original.
struct CandidateContext {
  std::string text;
  std::vector<Substitution> substitutions;
};

struct AttackOutcome {
  bool success = false;
  std::optional<CandidateContext> best;
  std::string original_answer;
  std::optional<std::string> attacked_answer;
  std::optional<double> gap;
  std::size_t queries_used = 0;
  std::chrono::duration<double> elapsed{0.0};
};

// Raised when a gateway call fails mid-attack. Carries the number of model
// queries issued before the failure.
class AttackError : public GatewayError {
 public:
  AttackError(const std::string& what, std::size_t queries_used, bool unreachable)
      : GatewayError(what), queries_used_(queries_used), unreachable_(unreachable) {}
  std::size_t queries_used() const { return queries_used_; }
  bool unreachable() const { return unreachable_; }

 private:
  std::size_t queries_used_;
  bool unreachable_;
};

// Builds the candidate text for a set of substitutions.
CandidateContext apply_substitutions(const TokenizedContext& ctx,
                                     std::vector<Substitution> substitutions);

// Masks word `word_index`, asks the mask filler for d + 4 candidates and
// keeps the first d that are usable replacements: not the original word
// (case-insensitive), not punctuation-only, not a "##" continuation piece,
// not a bracketed special token, free of whitespace.
std::vector<Substitution> propose_synonyms(const TokenizedContext& ctx,
                                           std::size_t word_index, std::size_t d,
                                           const ModelGateway& gateway);

// One candidate per (target, synonym), target rank major.
std::vector<CandidateContext> generate_single_word_candidates(
    const TokenizedContext& ctx, const RankedTargets& targets, std::size_t d,
    const ModelGateway& gateway);

// True iff the normalized answers differ.
bool answer_flipped(const AnswerReply& original, const AnswerReply& candidate);

// Informative: candidate.answer_score - original.answer_score.
// Boolean: margin of the original answer class (yes - no, or no - yes) on
// the original context minus the same margin on the candidate.
double answer_gap(const AnswerReply& original, const AnswerReply& candidate,
                  QueryKind kind);

// Picks the max-gap candidate among those that flip the answer (earliest on
// ties). When none flips, returns success = false with the overall max-gap
// candidate for diagnostics.
AttackOutcome select_adversary(std::string_view question,
                               const TokenizedContext& ctx,
                               const AnswerReply& original_reply,
                               const std::vector<CandidateContext>& candidates,
                               QueryKind kind, const ModelGateway& gateway);

struct RankingResult {
  WordScores scores;
  RankedTargets targets;
};

// Scores words according to config.mode and selects config.top_k targets.
RankingResult rank_targets(const QAExample& example, const TokenizedContext& ctx,
                           const AnswerReply& original_reply,
                           const AttackConfig& config, const ModelGateway& gateway);

// The full pipeline: tokenize, answer, rank, perturb, select.
AttackOutcome attack(const QAExample& example, const AttackConfig& config,
                     const ModelGateway& gateway);

}  // namespace advqa
