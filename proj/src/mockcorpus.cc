#include "advqa/mockcorpus.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace advqa::mockcorpus {

using nlohmann::json;

namespace {

constexpr int kWindow = 2;
// Cluster centers this far apart cannot see each other's question words,
// neither directly nor through a neighbouring question word.
constexpr int kClusterGap = 2 * kWindow + 2 * kWindow + 1;
constexpr std::size_t kFillerPool = 300;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Uniform in [0, n).
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  int in(IntRange r) {
    return r.min + static_cast<int>(below(static_cast<std::size_t>(r.max - r.min + 1)));
  }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

// Pronounceable nonce words, never repeated within one generator.
class NonceWords {
 public:
  explicit NonceWords(Rng& rng) : rng_(rng) {}

  std::string fresh() {
    static constexpr std::string_view kConsonants = "bdfgklmnprstvz";
    static constexpr std::string_view kVowels = "aeiou";
    for (;;) {
      std::string w;
      const std::size_t syllables = 2 + rng_.below(2);
      for (std::size_t i = 0; i < syllables; ++i) {
        w += kConsonants[rng_.below(kConsonants.size())];
        w += kVowels[rng_.below(kVowels.size())];
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

struct Draft {
  QAExample example;
  PlantedTruth truth;
};

std::string capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 32);
  return w;
}

// Joins words into sentences of 6-11 words with capitalized openers.
std::string render_context(const std::vector<std::string>& words, Rng& rng) {
  std::string out;
  std::size_t until_stop = 6 + rng.below(6);
  bool sentence_start = true;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += sentence_start ? capitalize(words[i]) : words[i];
    sentence_start = false;
    if (--until_stop == 0 || i + 1 == words.size()) {
      out += '.';
      sentence_start = true;
      until_stop = 6 + rng.below(6);
    } else if (rng.below(12) == 0) {
      out += ',';
    }
  }
  return out;
}

// Picks `count` distinct positions in [center - 2, center + 2] minus center.
std::vector<std::size_t> around(std::size_t center, int count, Rng& rng) {
  std::vector<std::size_t> slots;
  for (int off = -kWindow; off <= kWindow; ++off) {
    if (off != 0) slots.push_back(static_cast<std::size_t>(static_cast<long>(center) + off));
  }
  for (std::size_t i = slots.size(); i > 1; --i) std::swap(slots[i - 1], slots[rng.below(i)]);
  slots.resize(static_cast<std::size_t>(count));
  std::sort(slots.begin(), slots.end());
  return slots;
}

bool flips(const MockGateway& mock, const QAExample& ex, const TokenizedContext& ctx,
           const std::string& original_answer, std::size_t word, std::size_t oracle_d) {
  const std::vector<std::string>* syns = mock.lexicon().find(ctx.words[word].text);
  if (syns == nullptr) return false;
  for (std::size_t s = 0; s < syns->size() && s < oracle_d; ++s) {
    const std::string text = splice(ctx, word, (*syns)[s]);
    const std::string answer = mock.answer(ex.question, text, ex.kind).answer_text;
    if (normalize_answer(answer) != normalize_answer(original_answer)) return true;
  }
  return false;
}

void validate(const SynthSpec& spec) {
  auto check_range = [](IntRange r, int lo, const char* name) {
    if (r.min > r.max || r.min < lo) {
      throw std::invalid_argument(std::string("infeasible spec: bad range for ") + name);
    }
  };
  check_range(spec.context_len, 1, "context_len");
  check_range(spec.overlap_words, 1, "overlap_words");
  check_range(spec.distractors, 0, "distractors");
  if (spec.overlap_words.max > 2 * kWindow) {
    throw std::invalid_argument("infeasible spec: at most 4 overlap words fit in the window");
  }
  if (!(spec.kind_mix >= 0.0 && spec.kind_mix <= 1.0)) {
    throw std::invalid_argument("infeasible spec: kind_mix must lie in [0, 1]");
  }
  if (spec.context_len.max < 2 * kWindow + 1) {
    throw std::invalid_argument("infeasible spec: context too short for the answer cluster");
  }
  if (spec.kind_mix > 0.0 && spec.context_len.max < spec.overlap_words.max) {
    throw std::invalid_argument("infeasible spec: context too short for planted words");
  }
  if (spec.synonyms_per_word < spec.oracle_d) {
    throw std::invalid_argument("infeasible spec: synonyms_per_word < oracle_d");
  }
  if (!(spec.min_solvable >= 0.0 && spec.min_solvable <= 1.0)) {
    throw std::invalid_argument("infeasible spec: min_solvable must lie in [0, 1]");
  }
}

}  // namespace

SynthCorpus generate(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  NonceWords nonce(rng);
  SynthCorpus corpus;

  std::vector<std::string> fillers;
  for (std::size_t i = 0; i < kFillerPool; ++i) fillers.push_back(nonce.fresh());

  auto add_synonyms = [&](const std::string& w) {
    if (corpus.lexicon.find(w) != nullptr) return;
    std::vector<std::string> syns;
    for (std::size_t s = 0; s < spec.synonyms_per_word; ++s) syns.push_back(nonce.fresh());
    corpus.lexicon.add(w, std::move(syns));
  };
  for (const std::string& f : fillers) add_synonyms(f);

  const auto allowed_unsolved = static_cast<std::size_t>(
      std::floor((1.0 - spec.min_solvable) * static_cast<double>(spec.n_examples) + 1e-9));
  std::size_t unsolved = 0;
  std::size_t single = 0;
  const std::size_t max_attempts = 1000 * std::max<std::size_t>(spec.n_examples, 1);
  std::size_t attempts = 0;

  while (corpus.examples.size() < spec.n_examples) {
    if (++attempts > max_attempts) {
      throw std::invalid_argument("infeasible spec: oracle target not reachable");
    }
    const std::string id = "synth-" + std::to_string(corpus.examples.size());
    const bool boolean = rng.unit() < spec.kind_mix;
    const int m = rng.in(spec.overlap_words);
    const std::size_t len = static_cast<std::size_t>(rng.in(spec.context_len));

    std::vector<std::string> q_words;
    for (int i = 0; i < m; ++i) q_words.push_back(nonce.fresh());

    std::vector<std::string> words(len);
    for (std::string& w : words) w = fillers[rng.below(fillers.size())];

    Draft draft;
    draft.truth.example_id = id;
    QAExample& ex = draft.example;
    ex.id = id;

    if (boolean) {
      if (len < static_cast<std::size_t>(m)) continue;
      // "is" never occurs in a context, so planting ceil((m+1)/2) of the
      // m nonce words gives P(yes) >= 0.5 with one word of slack at most.
      const std::size_t planted = static_cast<std::size_t>((m + 2) / 2);
      std::vector<std::size_t> slots(len);
      for (std::size_t i = 0; i < len; ++i) slots[i] = i;
      for (std::size_t i = len; i > 1; --i) std::swap(slots[i - 1], slots[rng.below(i)]);
      slots.resize(planted);
      std::sort(slots.begin(), slots.end());
      for (std::size_t i = 0; i < planted; ++i) words[slots[i]] = q_words[i];
      draft.truth.overlap_indices = slots;
      ex.kind = QueryKind::kBoolean;
      ex.question = "is";
      for (const std::string& w : q_words) ex.question += " " + w;
      ex.question += "?";
    } else {
      int k = rng.in(spec.distractors);
      if (m < 2) k = 0;  // a distractor needs at least one overlap word
      const int need = 2 * kWindow + 1;
      if (static_cast<int>(len) < need) continue;
      k = std::min(k, (static_cast<int>(len) - need) / kClusterGap);
      // Place k + 1 cluster centers kClusterGap apart, inside the margins.
      std::vector<std::size_t> centers;
      for (int tries = 0; tries < 200 && centers.size() < static_cast<std::size_t>(k + 1);
           ++tries) {
        const std::size_t c = kWindow + rng.below(len - 2 * kWindow);
        const bool clear = std::all_of(centers.begin(), centers.end(), [&](std::size_t o) {
          return (c > o ? c - o : o - c) >= static_cast<std::size_t>(kClusterGap);
        });
        if (clear) centers.push_back(c);
      }
      if (centers.size() < static_cast<std::size_t>(k + 1)) continue;

      const std::size_t a = centers.front();
      const std::string answer = nonce.fresh();
      words[a] = answer;
      draft.truth.answer_index = static_cast<long>(a);
      for (std::size_t pos : around(a, m, rng)) {
        words[pos] = q_words[draft.truth.overlap_indices.size() % q_words.size()];
        draft.truth.overlap_indices.push_back(pos);
      }
      for (std::size_t ci = 1; ci < centers.size(); ++ci) {
        const std::size_t b = centers[ci];
        draft.truth.distractor_indices.push_back(b);
        const auto planted = around(b, m - 1, rng);
        for (std::size_t j = 0; j < planted.size(); ++j) words[planted[j]] = q_words[j];
      }
      ex.kind = QueryKind::kInformative;
      ex.question = "what";
      for (const std::string& w : q_words) ex.question += " " + w;
      ex.question += "?";
      add_synonyms(answer);
    }
    for (const std::string& w : q_words) add_synonyms(w);

    ex.context = render_context(words, rng);
    const TokenizedContext ctx = tokenize(ex.context);
    const MockGateway mock(corpus.lexicon, kWindow);
    const AnswerReply reply = mock.answer(ex.question, ex.context, ex.kind);

    if (boolean) {
      if (reply.answer_text != "yes") continue;
      ex.references = {"yes"};
      ex.answer_starts = {-1};
    } else {
      const Span& planted = ctx.words[static_cast<std::size_t>(draft.truth.answer_index)];
      if (reply.answer_text != planted.text) continue;
      ex.references = {planted.text};
      ex.answer_starts = {static_cast<long>(planted.start)};
    }

    // Brute-force oracle over every (word, synonym) single substitution.
    bool any = false;
    bool nontrivial = false;
    for (std::size_t i = 0; i < ctx.size() && !nontrivial; ++i) {
      if (!flips(mock, ex, ctx, reply.answer_text, i, spec.oracle_d)) continue;
      any = true;
      nontrivial = nontrivial || static_cast<long>(i) != draft.truth.answer_index;
    }
    if (!nontrivial) {
      if (unsolved + 1 > allowed_unsolved) {
        ++corpus.rejected;
        continue;
      }
      ++unsolved;
    }
    draft.truth.kind = ex.kind;
    draft.truth.single_flip = any;
    draft.truth.nontrivial_flip = nontrivial;
    single += any ? 1 : 0;
    corpus.examples.push_back(std::move(draft.example));
    corpus.truth.push_back(std::move(draft.truth));
  }

  if (!corpus.examples.empty()) {
    const double n = static_cast<double>(corpus.examples.size());
    corpus.single_flip_rate = static_cast<double>(single) / n;
    corpus.nontrivial_flip_rate = static_cast<double>(corpus.examples.size() - unsolved) / n;
  }
  return corpus;
}

json manifest(const SynthCorpus& corpus, const SynthSpec& spec) {
  json examples = json::array();
  for (const PlantedTruth& t : corpus.truth) {
    examples.push_back({{"id", t.example_id},
                        {"kind", std::string(to_string(t.kind))},
                        {"answer_index", t.answer_index},
                        {"overlap_indices", t.overlap_indices},
                        {"distractor_indices", t.distractor_indices},
                        {"single_flip", t.single_flip},
                        {"nontrivial_flip", t.nontrivial_flip}});
  }
  return {
      {"spec",
       {{"n_examples", spec.n_examples},
        {"context_len", {spec.context_len.min, spec.context_len.max}},
        {"overlap_words", {spec.overlap_words.min, spec.overlap_words.max}},
        {"distractors", {spec.distractors.min, spec.distractors.max}},
        {"seed", spec.seed},
        {"kind_mix", spec.kind_mix},
        {"synonyms_per_word", spec.synonyms_per_word},
        {"min_solvable", spec.min_solvable},
        {"oracle_d", spec.oracle_d},
        {"window", kWindow}}},
      {"oracle",
       {{"single_flip_rate", corpus.single_flip_rate},
        {"nontrivial_flip_rate", corpus.nontrivial_flip_rate},
        {"rejected", corpus.rejected}}},
      {"examples", examples},
      {"lexicon", corpus.lexicon.to_json()},
  };
}

}  // namespace advqa::mockcorpus
