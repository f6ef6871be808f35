#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "advqa/corpus.h"
#include "advqa/mock_gateway.h"
#include "json.hpp"

namespace advqa::mockcorpus {

struct IntRange {
  int min = 0;
  int max = 0;
};

struct SynthSpec {
  std::size_t n_examples = 200;
  IntRange context_len{20, 40};
  // Question words planted within two words of the answer.
  IntRange overlap_words{2, 3};
  // Second-best answer clusters holding one overlap word fewer.
  IntRange distractors{1, 2};
  std::uint64_t seed = 1;
  // Fraction of Boolean examples.
  double kind_mix = 0.0;
  std::size_t synonyms_per_word = 3;
  // Minimum fraction of examples the brute-force oracle can flip with one
  // substitution of a word other than the answer, using `oracle_d`
  // lexicon synonyms per word.
  double min_solvable = 0.8;
  std::size_t oracle_d = 2;
};

struct PlantedTruth {
  std::string example_id;
  QueryKind kind = QueryKind::kInformative;
  long answer_index = -1;  // -1 for Boolean examples
  std::vector<std::size_t> overlap_indices;
  std::vector<std::size_t> distractor_indices;
  bool single_flip = false;      // some single substitution flips the answer
  bool nontrivial_flip = false;  // ... without touching the answer word
};

struct SynthCorpus {
  std::vector<QAExample> examples;
  std::vector<PlantedTruth> truth;
  SynonymTable lexicon;
  std::size_t rejected = 0;
  double single_flip_rate = 0.0;
  double nontrivial_flip_rate = 0.0;
};

// Builds an attackable corpus for the mock gateway (window 2). Examples
// are resampled until the oracle target in `spec` is met. Throws
// std::invalid_argument for an infeasible spec.
SynthCorpus generate(const SynthSpec& spec);

// Ground truth, oracle statistics and the lexicon.
nlohmann::json manifest(const SynthCorpus& corpus, const SynthSpec& spec);

}  // namespace advqa::mockcorpus
