#include "advqa/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "advqa/utf8.h"

namespace advqa {

namespace {

const std::vector<std::string>& or_empty_reference(
    const std::vector<std::string>& references) {
  static const std::vector<std::string> kEmpty = {""};
  return references.empty() ? kEmpty : references;
}

std::size_t clipped_overlap(const std::vector<std::string>& a,
                            const std::vector<std::string>& b) {
  std::map<std::string, std::size_t> counts;
  for (const std::string& t : b) ++counts[t];
  std::size_t hits = 0;
  for (const std::string& t : a) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++hits;
    }
  }
  return hits;
}

double token_f1(const std::vector<std::string>& pred,
                const std::vector<std::string>& ref) {
  if (pred.empty() || ref.empty()) return pred.empty() && ref.empty() ? 1.0 : 0.0;
  const std::size_t common = clipped_overlap(pred, ref);
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace

double f1_score(std::string_view prediction, const std::vector<std::string>& references) {
  const std::vector<std::string> pred = normalized_tokens(prediction);
  double best = 0.0;
  for (const std::string& ref : or_empty_reference(references)) {
    best = std::max(best, token_f1(pred, normalized_tokens(ref)));
  }
  return best;
}

double exact_match(std::string_view prediction,
                   const std::vector<std::string>& references) {
  const std::string pred = normalize_answer(prediction);
  for (const std::string& ref : or_empty_reference(references)) {
    if (normalize_answer(ref) == pred) return 1.0;
  }
  return 0.0;
}

double exact_match_strict(std::string_view prediction,
                          const std::vector<std::string>& references) {
  for (const std::string& ref : or_empty_reference(references)) {
    if (ref == prediction) return 1.0;
  }
  return 0.0;
}

std::vector<std::string> metric_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const Span& w : tokenize(text).words) out.push_back(utf8::to_lower(w.text));
  return out;
}

double bleu1(std::string_view adv_context, std::string_view orig_context) {
  const std::vector<std::string> cand = metric_tokens(adv_context);
  const std::vector<std::string> ref = metric_tokens(orig_context);
  if (cand.empty()) return ref.empty() ? 1.0 : 0.0;
  const double c = static_cast<double>(cand.size());
  const double r = static_cast<double>(ref.size());
  const double precision = static_cast<double>(clipped_overlap(cand, ref)) / c;
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return precision * bp;
}

double rouge1(std::string_view adv_context, std::string_view orig_context) {
  const std::vector<std::string> cand = metric_tokens(adv_context);
  const std::vector<std::string> ref = metric_tokens(orig_context);
  if (ref.empty()) return cand.empty() ? 1.0 : 0.0;
  return static_cast<double>(clipped_overlap(ref, cand)) / static_cast<double>(ref.size());
}

double similarity(std::string_view a, std::string_view b, const ModelGateway& gateway) {
  const Eigen::VectorXd va = gateway.embed(a);
  const Eigen::VectorXd vb = a == b ? va : gateway.embed(b);
  const double na = va.norm();
  const double nb = vb.norm();
  if (na == 0.0 || nb == 0.0 || va.size() != vb.size()) return 0.0;
  return std::clamp(va.dot(vb) / (na * nb), -1.0, 1.0);
}

double modification_rate(const TokenizedContext& orig,
                         const std::vector<Substitution>& substitutions) {
  if (orig.words.empty()) return substitutions.empty() ? 0.0 : 1.0;
  return static_cast<double>(substitutions.size()) /
         static_cast<double>(orig.words.size());
}

}  // namespace advqa
