#pragma once

// Random data augmentation (RDA).
//
// Text is punctuation-normalized, split into words, padded with random
// "noise words" of printable Unicode characters, and re-joined with random
// whitespace. All randomness flows through one seeded Rng.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "detaudit/error.hpp"
#include "detaudit/rng.hpp"
#include "detaudit/unicode.hpp"

namespace detaudit {

struct RdaConfig {
  /// Expected fraction of inserted words relative to the original count.
  double inflation_factor = 0.02;
  /// Std of the insertion count is inflation_factor * w / count_std_divisor.
  double count_std_divisor = 5.0;
  double word_len_mean = 1.0;
  double word_len_std = 1.0;
  double single_space_prob = 0.97;
  double ws_len_mean = 1.0;
  double ws_len_std = 0.2;
  std::vector<std::string> ws_alphabet = {"\n", "\t", "\r\n", "\n\n", "\r\n\r\n", "\xC2\xA0"};

  void validate() const {
    if (!(inflation_factor >= 0.0)) throw ValidationError("rda: inflation_factor must be >= 0");
    if (!(count_std_divisor > 0.0)) throw ValidationError("rda: count_std_divisor must be > 0");
    if (!(word_len_std >= 0.0) || !(ws_len_std >= 0.0)) throw ValidationError("rda: negative std");
    if (!(single_space_prob >= 0.0 && single_space_prob <= 1.0)) {
      throw ValidationError("rda: single_space_prob must lie in [0, 1]");
    }
    if (ws_alphabet.empty()) throw ValidationError("rda: empty whitespace alphabet");
  }
};

namespace detail {

struct PunctRule {
  char32_t from;
  const char* to;
};

// Typographic punctuation folded onto ASCII.
inline constexpr PunctRule kPunctRules[] = {
    {U'‘', "'"},  {U'’', "'"},  {U'‚', "'"},  {U'‛', "'"},
    {U'′', "'"},  {U'“', "\""}, {U'”', "\""}, {U'„', "\""},
    {U'‟', "\""}, {U'«', "\""}, {U'»', "\""}, {U'″', "\""},
    {U'‒', "-"},  {U'–', "-"},  {U'—', "-"},  {U'―', "-"},
    {U'−', "-"},  {U'…', "..."},
};

inline const char* punct_replacement(char32_t cp) {
  for (const auto& r : kPunctRules) {
    if (r.from == cp) return r.to;
  }
  return nullptr;
}

// Noise characters are drawn from planes 0-3 (BMP, SMP, SIP, TIP).
inline constexpr char32_t kNoisePlaneLimit = 0x40000;

}  // namespace detail

/// Folds curly quotes, dashes and the ellipsis to ASCII and collapses runs of
/// U+0020 to a single space. Idempotent.
inline std::string normalize_punct(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (const auto& cp : unicode::decode(text)) {
    if (cp.value == U' ' && !out.empty() && out.back() == ' ') continue;
    if (const char* rep = detail::punct_replacement(cp.value)) {
      out += rep;
    } else {
      out.append(text.substr(cp.begin, cp.end - cp.begin));
    }
  }
  return out;
}

/// max(0, round(x)), x ~ N(f*w, f*w/divisor).
inline std::size_t draw_insertion_count(std::size_t w, const RdaConfig& cfg, Rng& rng) {
  const double mean = cfg.inflation_factor * static_cast<double>(w);
  if (mean <= 0.0) return 0;
  const double x = rng.normal(mean, mean / cfg.count_std_divisor);
  return static_cast<std::size_t>(std::max(0.0, round_half_even(x)));
}

inline char32_t draw_printable_char(Rng& rng) {
  for (;;) {
    const auto cp = static_cast<char32_t>(rng.uniform_index(detail::kNoisePlaneLimit));
    if (unicode::is_printable_nonspace(cp)) return cp;
  }
}

/// Random word of max(0, round(y)) printable characters, y ~ N(mean, std).
/// May be empty.
inline std::string gen_noise_word(const RdaConfig& cfg, Rng& rng) {
  const double y = rng.normal(cfg.word_len_mean, cfg.word_len_std);
  const auto len = static_cast<std::size_t>(std::max(0.0, round_half_even(y)));
  std::string word;
  for (std::size_t i = 0; i < len; ++i) unicode::append_utf8(word, draw_printable_char(rng));
  return word;
}

/// A single space with probability single_space_prob, otherwise
/// max(1, round(z)) elements of the whitespace alphabet, z ~ N(mean, std).
inline std::string mutate_whitespace(const RdaConfig& cfg, Rng& rng) {
  if (rng.bernoulli(cfg.single_space_prob)) return " ";
  const double z = rng.normal(cfg.ws_len_mean, cfg.ws_len_std);
  const auto len = static_cast<std::size_t>(std::max(1.0, round_half_even(z)));
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    out += cfg.ws_alphabet[rng.uniform_index(cfg.ws_alphabet.size())];
  }
  return out;
}

struct RdaResult {
  std::string text;
  std::size_t original_words = 0;
  /// Includes zero-length noise words, which leave no visible token.
  std::size_t inserted_words = 0;
  /// Separators between adjacent words, in output order.
  std::vector<std::string> joints;
};

inline RdaResult rda_augment_detailed(std::string_view text, const RdaConfig& cfg,
                                      std::uint64_t seed) {
  cfg.validate();
  RdaResult res;
  const auto words = unicode::split_whitespace(normalize_punct(text));
  if (words.empty()) return res;

  Rng rng(seed);
  const auto w = words.size();
  const auto k = draw_insertion_count(w, cfg, rng);
  std::vector<std::string> noise;
  noise.reserve(k);
  for (std::size_t i = 0; i < k; ++i) noise.push_back(gen_noise_word(cfg, rng));

  // Gap g sits before original word g; gap w is after the last word.
  std::vector<std::vector<std::size_t>> gaps(w + 1);
  for (std::size_t i = 0; i < k; ++i) gaps[rng.uniform_index(w + 1)].push_back(i);

  std::vector<const std::string*> sequence;
  sequence.reserve(w + k);
  for (std::size_t g = 0; g <= w; ++g) {
    for (auto i : gaps[g]) sequence.push_back(&noise[i]);
    if (g < w) sequence.push_back(&words[g]);
  }

  res.original_words = w;
  res.inserted_words = k;
  res.joints.reserve(sequence.size() - 1);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (i > 0) {
      res.joints.push_back(mutate_whitespace(cfg, rng));
      res.text += res.joints.back();
    }
    res.text += *sequence[i];
  }
  return res;
}

inline std::string rda_augment(std::string_view text, const RdaConfig& cfg, std::uint64_t seed) {
  return rda_augment_detailed(text, cfg, seed).text;
}

}  // namespace detaudit
