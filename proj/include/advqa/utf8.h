#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// Minimal UTF-8 helpers. Character indices throughout the toolkit are
// Unicode scalar-value indices; these functions convert between them and
// byte offsets. Invalid bytes decode to U+FFFD and count as one character.
namespace advqa::utf8 {

// Decodes the scalar value starting at byte `pos` and advances `pos`.
char32_t decode(std::string_view s, std::size_t& pos);

void append(std::string& out, char32_t cp);

std::u32string to_u32(std::string_view s);
std::string from_u32(std::u32string_view s);

// Number of scalar values in `s`.
std::size_t length(std::string_view s);

// Byte offset of character index `char_index` (== s.size() at the end).
std::size_t byte_offset(std::string_view s, std::size_t char_index);

// Character classes used by the word tokenizer and answer normalization.
// Classification is table-free: ASCII is exact, everything else is a letter
// unless it falls in a known whitespace, punctuation or symbol block.
bool is_space(char32_t cp);
bool is_alnum(char32_t cp);
bool is_apostrophe(char32_t cp);
bool is_hyphen(char32_t cp);

char32_t to_lower(char32_t cp);
std::string to_lower(std::string_view s);

}  // namespace advqa::utf8
