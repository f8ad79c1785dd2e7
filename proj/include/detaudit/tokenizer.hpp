#pragma once

// Rule-based word tokenizer.
//
// Whitespace separates tokens; each punctuation or symbol character (general
// category P* or S*) is a token of its own; every other run of characters
// (letters, marks, digits) forms one word token. This approximates the unitok
// behaviour closely enough for vocabulary and out-of-vocabulary accounting,
// as long as the same tokenizer is used for training and evaluation.

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "detaudit/error.hpp"
#include "detaudit/unicode.hpp"

namespace detaudit {

struct ByteSpan {
  std::size_t begin;
  std::size_t end;

  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

/// Tokens plus their byte ranges in the source text.
struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<ByteSpan> offsets;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }
};

/// Identifies the tokenizer rules; stored in model files.
inline constexpr const char* kTokenizerId = "detaudit-rule-tokenizer/v1";

inline TokenSequence tokenize(std::string_view text) {
  TokenSequence seq;
  std::size_t run_start = std::string_view::npos;
  auto flush = [&](std::size_t end) {
    if (run_start != std::string_view::npos) {
      seq.tokens.emplace_back(text.substr(run_start, end - run_start));
      seq.offsets.push_back({run_start, end});
      run_start = std::string_view::npos;
    }
  };
  for (const auto& cp : unicode::decode(text)) {
    if (unicode::is_whitespace(cp.value)) {
      flush(cp.begin);
    } else if (unicode::is_punct_or_symbol(cp.value)) {
      flush(cp.begin);
      seq.tokens.emplace_back(text.substr(cp.begin, cp.end - cp.begin));
      seq.offsets.push_back({cp.begin, cp.end});
    } else if (run_start == std::string_view::npos) {
      run_start = cp.begin;
    }
  }
  flush(text.size());
  return seq;
}

inline std::string lowercase(std::string_view text) { return unicode::to_lower(text); }

inline TokenSequence truncate(const TokenSequence& seq, std::size_t limit = 512) {
  if (limit == 0) throw ValidationError("truncate: limit must be positive");
  const auto n = std::min(limit, seq.size());
  TokenSequence out;
  out.tokens.assign(seq.tokens.begin(), seq.tokens.begin() + static_cast<std::ptrdiff_t>(n));
  out.offsets.assign(seq.offsets.begin(), seq.offsets.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

template <typename Vocab>
concept TokenSet = requires(const Vocab& v, const std::string& s) {
  { v.contains(s) } -> std::convertible_to<bool>;
};

/// Number of tokens absent from `vocab`, lowercased first when `lower`.
template <TokenSet Vocab>
std::size_t oov_count(const TokenSequence& seq, const Vocab& vocab, bool lower = true) {
  return static_cast<std::size_t>(std::count_if(
      seq.tokens.begin(), seq.tokens.end(),
      [&](const std::string& t) { return !vocab.contains(lower ? lowercase(t) : t); }));
}

/// Fraction of tokens absent from `vocab`, lowercased first when `lower`.
template <TokenSet Vocab>
double oov_ratio(const TokenSequence& seq, const Vocab& vocab, bool lower = true) {
  if (seq.empty()) throw ValidationError("oov_ratio: empty token sequence");
  return static_cast<double>(oov_count(seq, vocab, lower)) / static_cast<double>(seq.size());
}

}  // namespace detaudit
