#include "advqa/metrics.h"

#include <gtest/gtest.h>

#include <cmath>

#include "advqa/mock_gateway.h"
#include "test_support.h"

namespace advqa {
namespace {

using Refs = std::vector<std::string>;

struct AnswerCase {
  std::string prediction;
  Refs references;
  double f1;
  double em;
};

// Hand-derived values.
const std::vector<AnswerCase> kAnswerCases = {
    {"Normandy", {"Normandy"}, 1.0, 1.0},
    {"the french crown", {"French crown"}, 1.0, 1.0},
    {"The French crown", {"William I of Normandy"}, 0.0, 0.0},
    {"william i of normandy", {"the french crown"}, 0.0, 0.0},
    {"Yes.", {"yes"}, 1.0, 1.0},
    {"yes", {"no"}, 0.0, 0.0},
    {"", {""}, 1.0, 1.0},
    {"", {"something"}, 0.0, 0.0},
    {"something", {}, 0.0, 0.0},
    // 1 common token: p = 1/2, r = 1/3.
    {"French army", {"the French crown jewels"}, 0.4, 0.0},
    // Clipping: "a a" is all article; "b b c" vs "b c c" shares b and c.
    {"b b c", {"b c c"}, 2.0 / 3.0, 0.0},
    // Max over references.
    {"crown", {"throne", "French crown"}, 2.0 / 3.0, 0.0},
    {"Crown!", {"throne", "crown"}, 1.0, 1.0},
};

TEST(AnswerMetricsTest, HandDerivedFixtures) {
  for (const AnswerCase& c : kAnswerCases) {
    EXPECT_DOUBLE_EQ(f1_score(c.prediction, c.references), c.f1) << c.prediction;
    EXPECT_EQ(exact_match(c.prediction, c.references), c.em) << c.prediction;
  }
}

TEST(AnswerMetricsTest, StrictEm) {
  EXPECT_EQ(exact_match_strict("Yes.", {"yes"}), 0.0);
  EXPECT_EQ(exact_match_strict("yes", {"no", "yes"}), 1.0);
  EXPECT_EQ(exact_match_strict("", {}), 1.0);
}

TEST(AnswerMetricsTest, ReferenceOrderAndF1AtLeastEm) {
  testing::Gen gen(51);
  for (int iter = 0; iter < 300; ++iter) {
    const std::string pred = gen.sentence(gen.words(gen.between(0, 4), 5), false);
    Refs refs;
    for (std::size_t i = gen.between(1, 3); i > 0; --i) {
      refs.push_back(gen.sentence(gen.words(gen.between(0, 4), 5), gen.coin()));
    }
    Refs reversed(refs.rbegin(), refs.rend());
    EXPECT_EQ(f1_score(pred, refs), f1_score(pred, reversed));
    EXPECT_EQ(exact_match(pred, refs), exact_match(pred, reversed));
    EXPECT_GE(f1_score(pred, {refs[0]}), exact_match(pred, {refs[0]}));
  }
}

TEST(ContextMetricsTest, Examples) {
  const std::string orig = "w0 w1 w2 w3 w4 w5 w6 w7 w8 w9";
  const std::string adv = "w0 w1 w2 w3 zz w5 w6 w7 w8 w9";
  EXPECT_DOUBLE_EQ(bleu1(orig, orig), 1.0);
  EXPECT_DOUBLE_EQ(bleu1(adv, orig), 0.9);
  EXPECT_DOUBLE_EQ(bleu1("nothing", orig), 0.0);
  EXPECT_DOUBLE_EQ(rouge1(orig, orig), 1.0);
  EXPECT_DOUBLE_EQ(rouge1(adv, orig), 0.9);
  EXPECT_DOUBLE_EQ(rouge1("", orig), 0.0);
  EXPECT_DOUBLE_EQ(bleu1("", ""), 1.0);
  EXPECT_DOUBLE_EQ(bleu1("", orig), 0.0);
}

TEST(ContextMetricsTest, BrevityPenaltyAndCaseFolding) {
  // 2 of 2 candidate words match a 4-word reference: BP = exp(1 - 4/2).
  EXPECT_DOUBLE_EQ(bleu1("a b", "a b c d"), std::exp(-1.0));
  EXPECT_DOUBLE_EQ(bleu1("A, B!", "a b"), 1.0);
  EXPECT_DOUBLE_EQ(bleu1("a a a a", "a b"), 0.25);
  EXPECT_DOUBLE_EQ(rouge1("a a a a", "a b"), 0.5);
}

double oracle_count(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  std::vector<bool> used(ref.size(), false);
  double hits = 0;
  for (const std::string& h : hyp) {
    for (std::size_t j = 0; j < ref.size(); ++j) {
      if (!used[j] && ref[j] == h) {
        used[j] = true;
        hits += 1;
        break;
      }
    }
  }
  return hits;
}

TEST(ContextMetricsTest, MatchCountingOracle) {
  testing::Gen gen(52);
  for (int iter = 0; iter < 200; ++iter) {
    auto orig_words = gen.words(gen.between(1, 20), 6);
    auto adv_words = orig_words;
    for (std::size_t i = gen.below(4); i > 0; --i) {
      adv_words[gen.below(adv_words.size())] = "s" + std::to_string(gen.below(3));
    }
    if (gen.below(5) == 0) adv_words.resize(gen.between(1, adv_words.size()));
    const std::string orig = gen.sentence(orig_words, true);
    const std::string adv = gen.sentence(adv_words, true);

    const double c = static_cast<double>(adv_words.size());
    const double r = static_cast<double>(orig_words.size());
    const double hits = oracle_count(adv_words, orig_words);
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    EXPECT_NEAR(bleu1(adv, orig), hits / c * bp, 1e-12);
    EXPECT_NEAR(rouge1(adv, orig), oracle_count(orig_words, adv_words) / r, 1e-12);
    EXPECT_DOUBLE_EQ(bleu1(orig, orig), 1.0);
  }
}

TEST(SimilarityTest, MockEmbeddings) {
  const MockGateway mock;
  ASSERT_NE(MockGateway::embedding_bin("a"), MockGateway::embedding_bin("b"));
  ASSERT_NE(MockGateway::embedding_bin("a"), MockGateway::embedding_bin("c"));
  ASSERT_NE(MockGateway::embedding_bin("b"), MockGateway::embedding_bin("c"));
  EXPECT_DOUBLE_EQ(similarity("a b", "a c", mock), 0.5);
  EXPECT_NEAR(similarity("same words here", "same words here", mock), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(similarity("", "a", mock), 0.0);
}

TEST(SimilarityTest, DisjointVocabulary) {
  const MockGateway mock;
  std::string left = "x", right;
  for (const char* w : {"kaba", "lomu", "rito", "sevi", "tuna", "goda"}) {
    if (MockGateway::embedding_bin(w) != MockGateway::embedding_bin("x")) {
      right = w;
      break;
    }
  }
  ASSERT_FALSE(right.empty());
  EXPECT_DOUBLE_EQ(similarity(left, right, mock), 0.0);
}

TEST(ModificationRateTest, Examples) {
  const auto ctx = tokenize("solo");
  EXPECT_DOUBLE_EQ(modification_rate(ctx, {}), 0.0);
  EXPECT_DOUBLE_EQ(modification_rate(ctx, {{0, "solo", "duo", 0.9}}), 1.0);
  std::string text;
  for (int i = 0; i < 69; ++i) text += "w ";
  std::vector<Substitution> five(5);
  EXPECT_NEAR(modification_rate(tokenize(text), five), 0.0725, 5e-5);
}

TEST(MetricTokensTest, CaseFoldedWords) {
  EXPECT_EQ(metric_tokens("Hello, World!"), (std::vector<std::string>{"hello", "world"}));
}

}  // namespace
}  // namespace advqa
