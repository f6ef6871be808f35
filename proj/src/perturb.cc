#include "advqa/perturb.h"

#include <algorithm>
#include <limits>
#include <set>

#include "advqa/utf8.h"

namespace advqa {

std::string_view to_string(RankingMode mode) {
  switch (mode) {
    case RankingMode::kABR:
      return "abr";
    case RankingMode::kRBR:
      return "rbr";
    case RankingMode::kHRF:
      return "hrf";
  }
  return "hrf";
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kSingleWord:
      return "single";
    case Strategy::kGreedySequential:
      return "greedy";
    case Strategy::kJointBest:
      return "joint";
  }
  return "greedy";
}

RankingMode parse_ranking_mode(std::string_view tag) {
  const std::string t = utf8::to_lower(tag);
  if (t == "abr") return RankingMode::kABR;
  if (t == "rbr") return RankingMode::kRBR;
  if (t == "hrf") return RankingMode::kHRF;
  throw UsageError("unknown ranking mode '" + std::string(tag) +
                   "' (expected abr, rbr or hrf)");
}

Strategy parse_strategy(std::string_view tag) {
  if (tag == "single") return Strategy::kSingleWord;
  if (tag == "greedy") return Strategy::kGreedySequential;
  if (tag == "joint") return Strategy::kJointBest;
  throw UsageError("unknown strategy '" + std::string(tag) +
                   "' (expected single, greedy or joint)");
}

CandidateContext apply_substitutions(const TokenizedContext& ctx,
                                     std::vector<Substitution> substitutions) {
  std::vector<std::pair<std::size_t, std::string>> edits;
  edits.reserve(substitutions.size());
  for (const Substitution& s : substitutions) edits.emplace_back(s.word_index, s.candidate);
  CandidateContext out;
  out.text = splice(ctx, edits);
  std::sort(substitutions.begin(), substitutions.end(),
            [](const Substitution& a, const Substitution& b) {
              return a.word_index < b.word_index;
            });
  out.substitutions = std::move(substitutions);
  return out;
}

namespace {

bool usable_replacement(std::string_view token, std::string_view original) {
  if (token.empty()) return false;
  if (token.starts_with("##")) return false;
  if (token.size() >= 2 && token.front() == '[' && token.back() == ']') return false;
  bool has_alnum = false;
  std::size_t pos = 0;
  while (pos < token.size()) {
    const char32_t cp = utf8::decode(token, pos);
    if (utf8::is_space(cp)) return false;
    has_alnum = has_alnum || utf8::is_alnum(cp);
  }
  return has_alnum && utf8::to_lower(token) != utf8::to_lower(original);
}

// Ordering used everywhere a "best" reply is chosen: flipped beats
// unflipped, then larger gap. Strict, so earlier candidates win ties.
bool better(bool flipped_a, double gap_a, bool flipped_b, double gap_b) {
  if (flipped_a != flipped_b) return flipped_a;
  return gap_a > gap_b;
}

struct Evaluated {
  CandidateContext candidate;
  AnswerReply reply;
  bool flipped = false;
  double gap = 0.0;
};

Evaluated evaluate(std::string_view question, CandidateContext candidate,
                   const AnswerReply& original, QueryKind kind,
                   const ModelGateway& gateway) {
  Evaluated e;
  e.reply = gateway.answer(question, candidate.text, kind);
  e.flipped = answer_flipped(original, e.reply);
  e.gap = answer_gap(original, e.reply, kind);
  e.candidate = std::move(candidate);
  return e;
}

void fill_outcome(AttackOutcome& out, const Evaluated& e) {
  out.success = e.flipped;
  out.best = e.candidate;
  out.attacked_answer = e.reply.answer_text;
  out.gap = e.gap;
}

AttackOutcome run_single_word(std::string_view question, const TokenizedContext& ctx,
                              const AnswerReply& original, const RankedTargets& targets,
                              const AttackConfig& config, QueryKind kind,
                              const ModelGateway& gateway) {
  const auto candidates = generate_single_word_candidates(ctx, targets, config.d, gateway);
  return select_adversary(question, ctx, original, candidates, kind, gateway);
}

AttackOutcome run_greedy(std::string_view question, const TokenizedContext& ctx,
                         const AnswerReply& original, const RankedTargets& targets,
                         const AttackConfig& config, QueryKind kind,
                         const ModelGateway& gateway) {
  AttackOutcome out;
  out.original_answer = original.answer_text;

  std::vector<Substitution> accepted;
  std::optional<Evaluated> current;   // state after the last accepted step
  std::optional<Evaluated> last_flip;  // most recent accepted flipped state
  for (std::size_t target : targets.indices) {
    const std::vector<Substitution> synonyms =
        propose_synonyms(ctx, target, config.d, gateway);
    std::optional<Evaluated> step_best;
    for (const Substitution& s : synonyms) {
      std::vector<Substitution> trial = accepted;
      trial.push_back(s);
      Evaluated e =
          evaluate(question, apply_substitutions(ctx, trial), original, kind, gateway);
      if (!step_best || better(e.flipped, e.gap, step_best->flipped, step_best->gap)) {
        step_best = std::move(e);
      }
    }
    if (!step_best) continue;
    // The first step is always taken; later ones must improve on it.
    if (current && !better(step_best->flipped, step_best->gap, current->flipped, current->gap)) {
      continue;
    }
    accepted = step_best->candidate.substitutions;
    current = std::move(step_best);
    if (current->flipped) {
      last_flip = current;
      if (config.early_stop) break;
    }
  }

  if (current && current->flipped) {
    fill_outcome(out, *current);
  } else if (last_flip) {
    fill_outcome(out, *last_flip);
  } else if (current) {
    fill_outcome(out, *current);
  }
  return out;
}

AttackOutcome run_joint(std::string_view question, const TokenizedContext& ctx,
                        const AnswerReply& original, const RankedTargets& targets,
                        const AttackConfig& config, QueryKind kind,
                        const ModelGateway& gateway) {
  AttackOutcome out;
  out.original_answer = original.answer_text;

  std::vector<Evaluated> singles;
  std::vector<std::size_t> target_bests;
  for (std::size_t target : targets.indices) {
    std::optional<std::size_t> target_best;
    for (const Substitution& s : propose_synonyms(ctx, target, config.d, gateway)) {
      singles.push_back(
          evaluate(question, apply_substitutions(ctx, {s}), original, kind, gateway));
      const Evaluated& e = singles.back();
      if (!target_best || better(e.flipped, e.gap, singles[*target_best].flipped,
                                 singles[*target_best].gap)) {
        target_best = singles.size() - 1;
      }
    }
    if (target_best) target_bests.push_back(*target_best);
  }
  if (singles.empty()) return out;

  std::vector<Substitution> joint_subs;
  for (std::size_t i : target_bests) {
    joint_subs.push_back(singles[i].candidate.substitutions.front());
  }
  const Evaluated joint = target_bests.size() == 1
                              ? singles[target_bests.front()]
                              : evaluate(question, apply_substitutions(ctx, joint_subs),
                                         original, kind, gateway);
  if (joint.flipped) {
    fill_outcome(out, joint);
    return out;
  }
  // Best flipped single, else the overall max-gap context for diagnostics.
  const Evaluated* pick = &joint;
  for (const Evaluated& e : singles) {
    if (better(e.flipped, e.gap, pick->flipped, pick->gap)) pick = &e;
  }
  fill_outcome(out, *pick);
  return out;
}

}  // namespace

std::vector<Substitution> propose_synonyms(const TokenizedContext& ctx,
                                           std::size_t word_index, std::size_t d,
                                           const ModelGateway& gateway) {
  if (word_index >= ctx.size()) {
    throw std::out_of_range("propose_synonyms: word index " +
                            std::to_string(word_index) + " out of range");
  }
  if (d == 0) return {};
  const std::string& original = ctx.words[word_index].text;
  const std::string masked = splice(ctx, word_index, kMaskToken);
  const std::vector<MaskCandidate> raw = gateway.fill_mask(masked, original, d + 4);

  std::vector<Substitution> out;
  std::set<std::string> seen;
  for (const MaskCandidate& c : raw) {
    if (out.size() == d) break;
    if (!usable_replacement(c.token, original)) continue;
    if (!seen.insert(utf8::to_lower(c.token)).second) continue;
    out.push_back({word_index, original, c.token, c.score});
  }
  return out;
}

std::vector<CandidateContext> generate_single_word_candidates(
    const TokenizedContext& ctx, const RankedTargets& targets, std::size_t d,
    const ModelGateway& gateway) {
  std::vector<CandidateContext> out;
  for (std::size_t target : targets.indices) {
    for (Substitution& s : propose_synonyms(ctx, target, d, gateway)) {
      out.push_back(apply_substitutions(ctx, {std::move(s)}));
    }
  }
  return out;
}

bool answer_flipped(const AnswerReply& original, const AnswerReply& candidate) {
  return normalize_answer(original.answer_text) !=
         normalize_answer(candidate.answer_text);
}

double answer_gap(const AnswerReply& original, const AnswerReply& candidate,
                  QueryKind kind) {
  if (kind == QueryKind::kInformative) {
    return candidate.answer_score - original.answer_score;
  }
  if (!original.boolean_scores || !candidate.boolean_scores) {
    throw ProtocolError("boolean reply without boolean_scores");
  }
  const bool was_yes = normalize_answer(original.answer_text) == "yes";
  auto margin = [was_yes](const BooleanScores& s) {
    return was_yes ? s.yes - s.no : s.no - s.yes;
  };
  return margin(*original.boolean_scores) - margin(*candidate.boolean_scores);
}

AttackOutcome select_adversary(std::string_view question,
                               const TokenizedContext& /*ctx*/,
                               const AnswerReply& original_reply,
                               const std::vector<CandidateContext>& candidates,
                               QueryKind kind, const ModelGateway& gateway) {
  AttackOutcome out;
  out.original_answer = original_reply.answer_text;
  std::optional<Evaluated> best;
  for (const CandidateContext& c : candidates) {
    Evaluated e = evaluate(question, c, original_reply, kind, gateway);
    ++out.queries_used;
    if (!best || better(e.flipped, e.gap, best->flipped, best->gap)) {
      best = std::move(e);
    }
  }
  if (best) fill_outcome(out, *best);
  return out;
}

RankingResult rank_targets(const QAExample& example, const TokenizedContext& ctx,
                           const AnswerReply& original_reply,
                           const AttackConfig& config, const ModelGateway& gateway) {
  const auto n = static_cast<Eigen::Index>(ctx.size());
  Eigen::VectorXd abr = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd rbr = Eigen::VectorXd::Zero(n);
  if (config.mode != RankingMode::kRBR) abr = abr_scores(example.question, ctx, gateway);
  if (config.mode != RankingMode::kABR) {
    // Removal is measured against the model's own answer; fall back to the
    // first reference when the model produced nothing.
    std::string a = original_reply.answer_text;
    if (normalize_answer(a).empty() && !example.references.empty()) {
      a = example.references.front();
    }
    if (a.empty() || n == 0) {
      rbr = Eigen::VectorXd::Constant(n, 0.5);
    } else {
      rbr = rbr_scores(example.question, ctx, a, gateway, config.signed_rbr);
    }
  }

  RankingResult result;
  result.scores = fuse(abr, rbr);

  EligibilityFn eligible;
  if (config.exclude_answer_words) {
    std::set<std::string> answer_tokens;
    for (const std::string& ref : example.references) {
      for (std::string& t : normalized_tokens(ref)) answer_tokens.insert(std::move(t));
    }
    eligible = [&ctx, answer_tokens](std::size_t i) {
      const std::string key = normalize_answer(ctx.words[i].text);
      return key.empty() || answer_tokens.count(key) == 0;
    };
  }
  result.targets = top_k_select(result.scores, config.top_k, eligible);
  return result;
}

AttackOutcome attack(const QAExample& example, const AttackConfig& config,
                     const ModelGateway& gateway) {
  const auto started = std::chrono::steady_clock::now();
  CountingGateway counted(gateway);
  AttackOutcome out;
  try {
    const TokenizedContext ctx = tokenize(example.context);
    const AnswerReply original = counted.answer(example.question, ctx.source, example.kind);
    if (config.top_k == 0 || ctx.size() == 0) {
      out.original_answer = original.answer_text;
    } else {
      const RankingResult ranking = rank_targets(example, ctx, original, config, counted);
      switch (config.strategy) {
        case Strategy::kSingleWord:
          out = run_single_word(example.question, ctx, original, ranking.targets, config,
                                example.kind, counted);
          break;
        case Strategy::kGreedySequential:
          out = run_greedy(example.question, ctx, original, ranking.targets, config,
                           example.kind, counted);
          break;
        case Strategy::kJointBest:
          out = run_joint(example.question, ctx, original, ranking.targets, config,
                          example.kind, counted);
          break;
      }
    }
  } catch (const GatewayUnreachable& e) {
    throw AttackError(e.what(), counted.calls(), true);
  } catch (const GatewayError& e) {
    throw AttackError(e.what(), counted.calls(), false);
  }
  out.queries_used = counted.calls();
  out.elapsed = std::chrono::steady_clock::now() - started;
  return out;
}

}  // namespace advqa
