#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "advqa/gateway.h"
#include "json.hpp"

namespace advqa {

// Word -> replacement candidates, best first. Keys are lowercase.
class SynonymTable {
 public:
  SynonymTable() = default;
  explicit SynonymTable(std::map<std::string, std::vector<std::string>> entries);

  void add(std::string_view word, std::vector<std::string> synonyms);
  // Entries for the lowercased word, or nullptr.
  const std::vector<std::string>* find(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::vector<std::string>>& entries() const {
    return entries_;
  }

  nlohmann::json to_json() const;
  // Accepts a plain {word: [synonyms]} object or any object carrying one
  // under a "lexicon" key (such as a corpus manifest).
  static SynonymTable from_json(const nlohmann::json& j);
  static SynonymTable load(const std::string& path);

  // The small table served by `advqa mock-serve` when no lexicon is given.
  static SynonymTable builtin();

 private:
  std::map<std::string, std::vector<std::string>> entries_;
};

// Deterministic stand-in for a QA model and its auxiliary models.
//
// Let Q be the set of normalized question words. The relevance of context
// word i is the number of positions j != i within `window` of i whose word
// is in Q.
//  - Informative answer: the most relevant word, lowest index on ties.
//  - score_answer: ln((1 + r_p) / sum_j (1 + r_j)) for the first word p equal
//    (after normalization) to the answer, ln(0.5 / sum_j (1 + r_j)) if there
//    is none. Answers "yes"/"no" are scored as ln of the Boolean probability
//    below (floored at 1e-9).
//  - Boolean: P(yes) = |Q intersect context words| / |Q|, "yes" iff >= 0.5.
//  - Attention: 1 + [word in Q] for every word, one subword per word.
//  - fill_mask: lexicon entry of the hint, else entity/item/thing; scores
//    0.9, 0.8, 0.7, ... (floored at 0.01).
//  - embed: 64-bin hashed bag of lowercased words.
//  - perplexity: (#distinct words)^2 / #words.
// A context without words scores ln(0.5) and answers "".
class MockGateway final : public ModelGateway {
 public:
  static constexpr int kEmbeddingBins = 64;

  explicit MockGateway(SynonymTable lexicon = {}, int window = 2);

  int window() const { return window_; }
  const SynonymTable& lexicon() const { return lexicon_; }

  // Relevance of every context word; exposed for oracles and generators.
  std::vector<int> relevance(std::string_view question,
                             std::string_view context) const;
  double yes_probability(std::string_view question,
                         std::string_view context) const;
  // Embedding bin of a (lowercased) word.
  static int embedding_bin(std::string_view word);

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

 private:
  SynonymTable lexicon_;
  int window_;
};

}  // namespace advqa
