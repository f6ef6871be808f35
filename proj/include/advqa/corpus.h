#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace advqa {

enum class QueryKind { kInformative, kBoolean };

std::string_view to_string(QueryKind kind);
QueryKind parse_query_kind(std::string_view tag);

struct QAExample {
  std::string id;
  std::string question;
  std::string context;
  // Acceptable answers. Empty only for unanswerable squad-v2 items.
  std::vector<std::string> references;
  // Character offset of each reference in `context`, -1 when unknown.
  std::vector<long> answer_starts;
  bool unanswerable = false;
  QueryKind kind = QueryKind::kInformative;
};

enum class DatasetFormat { kSquadV1, kSquadV2, kBoolqJsonl };

DatasetFormat parse_dataset_format(std::string_view tag);

// Loads every question of a dataset file as one QAExample.
// Throws DatasetError (with a line or record locus) on malformed input and
// UsageError if the file cannot be opened.
std::vector<QAExample> load_dataset(const std::string& path,
                                    DatasetFormat format);
std::vector<QAExample> parse_dataset(std::string_view contents,
                                     DatasetFormat format);

// Serializes examples in the squad-v1 schema. Examples sharing a context
// string share a paragraph, in order of first appearance.
nlohmann::json to_squad_v1(const std::vector<QAExample>& examples,
                           std::string_view title = "advqa");

// A maximal run of non-whitespace characters, or the word/non-word piece of
// one. `start`/`end` are character (scalar-value) indices into the source,
// `byte_start`/`byte_end` the matching UTF-8 byte offsets.
struct Span {
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
  bool is_word = false;
  std::size_t byte_start = 0;
  std::size_t byte_end = 0;
};

struct TokenizedContext {
  std::string source;
  std::vector<Span> words;
  std::vector<Span> all_spans;
  std::size_t char_length = 0;

  std::size_t size() const { return words.size(); }
};

// Words are maximal runs of alphanumerics, with apostrophes and hyphens
// kept when they sit between two alphanumerics. Every other non-whitespace
// run becomes a non-word span.
TokenizedContext tokenize(std::string_view text);

// Replaces word `word_index` by `replacement`; all other bytes unchanged.
std::string splice(const TokenizedContext& ctx, std::size_t word_index,
                   std::string_view replacement);

// Applies several replacements at distinct word indices at once.
std::string splice(
    const TokenizedContext& ctx,
    const std::vector<std::pair<std::size_t, std::string>>& replacements);

// Removes word `word_index` together with one adjacent whitespace character
// (the following one if there is one, else the preceding one).
std::string delete_word(const TokenizedContext& ctx, std::size_t word_index);

// SQuAD-style answer normalization: lowercase, strip punctuation, drop the
// articles a/an/the, collapse whitespace.
std::string normalize_answer(std::string_view text);

// Whitespace tokens of normalize_answer(text).
std::vector<std::string> normalized_tokens(std::string_view text);

}  // namespace advqa
