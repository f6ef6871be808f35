#include "advqa/mock_gateway.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "advqa/errors.h"
#include "advqa/utf8.h"

namespace advqa {

using nlohmann::json;

SynonymTable::SynonymTable(
    std::map<std::string, std::vector<std::string>> entries) {
  for (auto& [word, syns] : entries) add(word, std::move(syns));
}

void SynonymTable::add(std::string_view word, std::vector<std::string> synonyms) {
  entries_[utf8::to_lower(word)] = std::move(synonyms);
}

const std::vector<std::string>* SynonymTable::find(std::string_view word) const {
  auto it = entries_.find(utf8::to_lower(word));
  return it == entries_.end() ? nullptr : &it->second;
}

json SynonymTable::to_json() const { return json(entries_); }

SynonymTable SynonymTable::from_json(const json& j) {
  const json& table = j.is_object() && j.contains("lexicon") ? j.at("lexicon") : j;
  if (!table.is_object()) throw UsageError("lexicon must be a JSON object");
  SynonymTable out;
  for (const auto& [word, syns] : table.items()) {
    if (!syns.is_array()) {
      throw UsageError("lexicon entry '" + word + "' must be an array");
    }
    out.add(word, syns.get<std::vector<std::string>>());
  }
  return out;
}

SynonymTable SynonymTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open lexicon '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw UsageError("lexicon '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

SynonymTable SynonymTable::builtin() {
  return SynonymTable({
      {"film", {"movie", "thriller", "picture"}},
      {"crown", {"throne", "monarchy"}},
      {"directed", {"produced", "made"}},
      {"written", {"authored", "penned"}},
      {"city", {"town", "capital"}},
      {"river", {"stream", "canal"}},
  });
}

namespace {

std::set<std::string> question_words(std::string_view question) {
  std::set<std::string> q;
  for (const Span& w : tokenize(question).words) {
    std::string key = normalize_answer(w.text);
    if (!key.empty()) q.insert(std::move(key));
  }
  return q;
}

std::vector<std::string> word_keys(const TokenizedContext& ctx) {
  std::vector<std::string> keys;
  keys.reserve(ctx.words.size());
  for (const Span& w : ctx.words) keys.push_back(normalize_answer(w.text));
  return keys;
}

std::vector<int> relevance_of(const std::set<std::string>& q,
                              const std::vector<std::string>& keys, int window) {
  const long n = static_cast<long>(keys.size());
  std::vector<char> in_q(keys.size());
  for (long i = 0; i < n; ++i) in_q[i] = q.count(keys[i]) > 0;
  std::vector<int> r(keys.size(), 0);
  for (long i = 0; i < n; ++i) {
    for (long j = std::max(0L, i - window); j <= std::min(n - 1, i + window); ++j) {
      if (j != i && in_q[j]) ++r[i];
    }
  }
  return r;
}

double yes_of(const std::set<std::string>& q, const std::vector<std::string>& keys) {
  if (q.empty()) return 0.0;
  std::set<std::string> present(keys.begin(), keys.end());
  std::size_t hits = 0;
  for (const std::string& w : q) hits += present.count(w);
  return static_cast<double>(hits) / static_cast<double>(q.size());
}

constexpr double kProbabilityFloor = 1e-9;

}  // namespace

MockGateway::MockGateway(SynonymTable lexicon, int window)
    : lexicon_(std::move(lexicon)), window_(window) {}

std::vector<int> MockGateway::relevance(std::string_view question,
                                        std::string_view context) const {
  return relevance_of(question_words(question), word_keys(tokenize(context)),
                      window_);
}

double MockGateway::yes_probability(std::string_view question,
                                    std::string_view context) const {
  return yes_of(question_words(question), word_keys(tokenize(context)));
}

int MockGateway::embedding_bin(std::string_view word) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : word) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return static_cast<int>(h % kEmbeddingBins);
}

AnswerReply MockGateway::answer(std::string_view question,
                                std::string_view context,
                                QueryKind kind) const {
  AnswerReply reply;
  if (kind == QueryKind::kBoolean) {
    const double yes = yes_probability(question, context);
    reply.boolean_scores = BooleanScores{yes, 1.0 - yes};
    reply.answer_text = yes >= 0.5 ? "yes" : "no";
  } else {
    const TokenizedContext ctx = tokenize(context);
    const std::vector<int> r = relevance(question, context);
    if (!r.empty()) {
      const auto best = std::max_element(r.begin(), r.end());
      reply.answer_text = ctx.words[best - r.begin()].text;
    }
  }
  reply.answer_score = score_answer(question, context, reply.answer_text);
  return reply;
}

double MockGateway::score_answer(std::string_view question,
                                 std::string_view context,
                                 std::string_view answer) const {
  const std::string target = normalize_answer(answer);
  const std::set<std::string> q = question_words(question);
  const std::vector<std::string> keys = word_keys(tokenize(context));
  if (target == "yes" || target == "no") {
    const double yes = yes_of(q, keys);
    return std::log(std::max(target == "yes" ? yes : 1.0 - yes,
                             kProbabilityFloor));
  }
  if (keys.empty()) return std::log(0.5);
  const std::vector<int> r = relevance_of(q, keys, window_);
  double total = 0.0;
  for (int ri : r) total += 1.0 + ri;
  const auto it = std::find(keys.begin(), keys.end(), target);
  if (it == keys.end()) return std::log(0.5 / total);
  return std::log((1.0 + r[it - keys.begin()]) / total);
}

AttentionProfile MockGateway::attention_profile(std::string_view question,
                                                std::string_view context) const {
  const std::set<std::string> q = question_words(question);
  const TokenizedContext ctx = tokenize(context);
  AttentionProfile profile;
  profile.subwords.reserve(ctx.words.size());
  for (const Span& w : ctx.words) {
    const bool hit = q.count(normalize_answer(w.text)) > 0;
    profile.subwords.push_back({w.start, w.end, hit ? 2.0 : 1.0});
  }
  return profile;
}

std::vector<MaskCandidate> MockGateway::fill_mask(
    std::string_view /*masked_text*/, std::string_view original_word_hint,
    std::size_t top_d) const {
  static const std::vector<std::string> kFallback = {"entity", "item", "thing"};
  const std::vector<std::string>* found = lexicon_.find(original_word_hint);
  const std::vector<std::string>& tokens = found ? *found : kFallback;
  std::vector<MaskCandidate> out;
  for (std::size_t i = 0; i < tokens.size() && i < top_d; ++i) {
    const double score = std::max(0.9 - 0.1 * static_cast<double>(i), 0.01);
    out.push_back({tokens[i], score});
  }
  return out;
}

Eigen::VectorXd MockGateway::embed(std::string_view text) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kEmbeddingBins);
  for (const Span& w : tokenize(text).words) {
    v[embedding_bin(utf8::to_lower(w.text))] += 1.0;
  }
  return v;
}

double MockGateway::perplexity(std::string_view text) const {
  const TokenizedContext ctx = tokenize(text);
  if (ctx.words.empty()) return 1.0;
  std::set<std::string> distinct;
  for (const Span& w : ctx.words) distinct.insert(utf8::to_lower(w.text));
  const double d = static_cast<double>(distinct.size());
  return d * d / static_cast<double>(ctx.words.size());
}

HealthStatus MockGateway::health() const {
  return {true, {"mock-qa/window=" + std::to_string(window_), "mock-mlm",
                 "mock-embed", "mock-lm"}};
}

}  // namespace advqa
