#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Small text utilities shared across the library. All span arithmetic in
// this project is in Unicode scalar values (code points), never bytes, so
// annotation offsets survive re-serialization across encodings.

namespace polifilter::text {

/// Decode UTF-8 into code points. Invalid byte sequences decode to U+FFFD,
/// one replacement character per rejected byte, so decoding never fails.
std::u32string decode_utf8(std::string_view s);

std::string encode_utf8(std::u32string_view s);

/// Number of code points in a UTF-8 string.
std::size_t cp_length(std::string_view s);

/// Substring [pos, pos + n) counted in code points.
std::string cp_substr(std::string_view s, std::size_t pos, std::size_t n);

/// Replace the code-point range [start, end) with `replacement`.
std::string cp_replace(std::string_view s, std::size_t start, std::size_t end,
                       std::string_view replacement);

/// A lowercased, whitespace-collapsed view of a string that remembers where
/// each normalized character came from, so matches can be mapped back to
/// code-point spans in the original.
struct NormalizedText {
  std::u32string chars;
  std::vector<std::size_t> source_index;  // original cp index per normalized char
};

/// Normalization used by the hallucination check: trim the ends, lowercase
/// ASCII letters, collapse whitespace runs to one space.
NormalizedText normalize_for_match(std::string_view s);

/// Same normalization, returned as UTF-8 without the index map.
std::string normalized(std::string_view s);

/// Word tokens: lowercase, split on non-alphanumeric runs, empties dropped.
std::vector<std::string> tokenize_words(std::string_view s);

std::string to_lower_ascii(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace polifilter::text
