#include "advqa/mockcorpus.h"

#include <gtest/gtest.h>

#include "advqa/mock_gateway.h"

namespace advqa::mockcorpus {
namespace {

TEST(MockCorpusTest, PlantedAnswerIsTheMockAnswer) {
  SynthSpec spec;
  spec.n_examples = 100;
  spec.overlap_words = {2, 2};
  spec.distractors = {1, 1};
  const SynthCorpus corpus = generate(spec);
  ASSERT_EQ(corpus.examples.size(), 100u);
  const MockGateway mock(corpus.lexicon);
  for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
    const QAExample& ex = corpus.examples[i];
    const PlantedTruth& t = corpus.truth[i];
    const auto ctx = tokenize(ex.context);
    ASSERT_GE(t.answer_index, 0);
    const std::string planted = ctx.words[static_cast<std::size_t>(t.answer_index)].text;
    EXPECT_EQ(mock.answer(ex.question, ex.context, ex.kind).answer_text, planted);
    EXPECT_EQ(ex.references, std::vector<std::string>{planted});
    EXPECT_EQ(ex.context.substr(static_cast<std::size_t>(ex.answer_starts[0]), planted.size()),
              planted);
    EXPECT_EQ(t.overlap_indices.size(), 2u);
    EXPECT_EQ(t.distractor_indices.size(), 1u);
  }
}

TEST(MockCorpusTest, SameSeedSameBytes) {
  SynthSpec spec;
  spec.n_examples = 30;
  spec.seed = 99;
  spec.kind_mix = 0.3;
  const SynthCorpus a = generate(spec);
  const SynthCorpus b = generate(spec);
  EXPECT_EQ(to_squad_v1(a.examples).dump(), to_squad_v1(b.examples).dump());
  EXPECT_EQ(manifest(a, spec).dump(), manifest(b, spec).dump());
  spec.seed = 100;
  EXPECT_NE(to_squad_v1(generate(spec).examples).dump(), to_squad_v1(a.examples).dump());
}

TEST(MockCorpusTest, AllBoolean) {
  SynthSpec spec;
  spec.n_examples = 25;
  spec.kind_mix = 1.0;
  const SynthCorpus corpus = generate(spec);
  const MockGateway mock(corpus.lexicon);
  for (const QAExample& ex : corpus.examples) {
    EXPECT_EQ(ex.kind, QueryKind::kBoolean);
    EXPECT_EQ(mock.answer(ex.question, ex.context, ex.kind).answer_text, ex.references[0]);
  }
}

TEST(MockCorpusTest, DefaultSpecMeetsOracleTarget) {
  const SynthSpec spec;
  const SynthCorpus corpus = generate(spec);
  ASSERT_EQ(corpus.examples.size(), spec.n_examples);
  EXPECT_GE(corpus.nontrivial_flip_rate, spec.min_solvable);
  EXPECT_GE(corpus.single_flip_rate, corpus.nontrivial_flip_rate);

  // Re-check the recorded flags by brute force.
  const MockGateway mock(corpus.lexicon);
  std::size_t solvable = 0;
  for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
    const QAExample& ex = corpus.examples[i];
    const auto ctx = tokenize(ex.context);
    const std::string original = mock.answer(ex.question, ex.context, ex.kind).answer_text;
    bool flips = false;
    for (std::size_t w = 0; w < ctx.size() && !flips; ++w) {
      if (static_cast<long>(w) == corpus.truth[i].answer_index) continue;
      const auto* syns = corpus.lexicon.find(ctx.words[w].text);
      ASSERT_NE(syns, nullptr) << ctx.words[w].text;
      ASSERT_GE(syns->size(), spec.oracle_d);
      for (std::size_t s = 0; s < spec.oracle_d && !flips; ++s) {
        const std::string text = splice(ctx, w, (*syns)[s]);
        flips = normalize_answer(mock.answer(ex.question, text, ex.kind).answer_text) !=
                normalize_answer(original);
      }
    }
    EXPECT_EQ(flips, corpus.truth[i].nontrivial_flip) << ex.id;
    solvable += flips ? 1 : 0;
  }
  EXPECT_DOUBLE_EQ(corpus.nontrivial_flip_rate,
                   static_cast<double>(solvable) / static_cast<double>(spec.n_examples));
}

TEST(MockCorpusTest, ManifestShape) {
  SynthSpec spec;
  spec.n_examples = 5;
  const SynthCorpus corpus = generate(spec);
  const nlohmann::json m = manifest(corpus, spec);
  EXPECT_EQ(m["examples"].size(), 5u);
  EXPECT_EQ(m["spec"]["window"], 2);
  EXPECT_TRUE(m["oracle"].contains("nontrivial_flip_rate"));
  EXPECT_EQ(SynonymTable::from_json(m).size(), corpus.lexicon.size());
}

TEST(MockCorpusTest, InfeasibleSpecs) {
  SynthSpec spec;
  spec.context_len = {3, 3};
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = SynthSpec{};
  spec.overlap_words = {5, 6};
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = SynthSpec{};
  spec.distractors = {2, 1};
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = SynthSpec{};
  spec.kind_mix = 1.5;
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec = SynthSpec{};
  spec.synonyms_per_word = 1;
  EXPECT_THROW(generate(spec), std::invalid_argument);
}

}  // namespace
}  // namespace advqa::mockcorpus
