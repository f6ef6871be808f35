#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advqa/corpus.h"
#include "advqa/gateway.h"
#include "advqa/perturb.h"

namespace advqa {

// Answer-level metrics. Predictions and references go through
// normalize_answer first; an empty reference list counts as [""].
double f1_score(std::string_view prediction, const std::vector<std::string>& references);
double exact_match(std::string_view prediction, const std::vector<std::string>& references);
// Raw string equality with any reference.
double exact_match_strict(std::string_view prediction,
                          const std::vector<std::string>& references);

// Unigram BLEU of the adversarial context against the original: clipped
// precision times the brevity penalty. Tokens are case-folded words.
double bleu1(std::string_view adv_context, std::string_view orig_context);
// Unigram recall of the original's words covered by the adversarial context.
double rouge1(std::string_view adv_context, std::string_view orig_context);

// Cosine similarity of gateway embeddings; 0 if either vector is zero.
double similarity(std::string_view a, std::string_view b, const ModelGateway& gateway);

double modification_rate(const TokenizedContext& orig,
                         const std::vector<Substitution>& substitutions);

// Case-folded word tokens as used by bleu1/rouge1.
std::vector<std::string> metric_tokens(std::string_view text);

// Aggregate metrics, percentages in [0, 100] (sim in [-100, 100]).
struct MetricReport {
  double f1 = 0.0;
  double em = 0.0;
  double em_strict = 0.0;
  double rouge1 = 100.0;
  double bleu1 = 100.0;
  double sim = 100.0;
  double mod_rate = 0.0;
  std::optional<double> ppl;
  std::optional<double> gerr;
  std::optional<double> seconds_per_sample;
};

}  // namespace advqa
