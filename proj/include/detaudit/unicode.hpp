#pragma once

// Thin UTF-8 / ICU helpers shared by the tokenizer, corpus and augment code.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

namespace detaudit::unicode {

struct CodePoint {
  char32_t value;
  std::size_t begin;  // byte offset
  std::size_t end;
};

/// Decodes UTF-8; ill-formed sequences yield U+FFFD spanning the bad bytes.
inline std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) c = 0xFFFD;
    out.push_back({static_cast<char32_t>(c), static_cast<std::size_t>(start),
                   static_cast<std::size_t>(i)});
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(char32_t cp) {
  std::string s;
  append_utf8(s, cp);
  return s;
}

/// Number of Unicode scalar values in a UTF-8 string.
inline std::size_t length(std::string_view text) {
  std::size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

inline bool is_valid_utf8(std::string_view text) {
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(s, i, length, c);
    if (c < 0) return false;
  }
  return true;
}

inline bool is_whitespace(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

/// General category P* or S*.
inline bool is_punct_or_symbol(char32_t cp) {
  const auto mask = U_GET_GC_MASK(static_cast<UChar32>(cp));
  return (mask & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

/// Assigned, visible, non-whitespace scalar value (excludes C* and Z*).
inline bool is_printable_nonspace(char32_t cp) {
  const auto c = static_cast<UChar32>(cp);
  if (u_isUWhiteSpace(c)) return false;
  const auto mask = U_GET_GC_MASK(c);
  return (mask & (U_GC_C_MASK | U_GC_Z_MASK)) == 0;
}

/// Full (context-free, root locale) lowercase mapping.
inline std::string to_lower(std::string_view text) {
  auto u = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  u.toLower(icu::Locale::getRoot());
  std::string out;
  u.toUTF8String(out);
  return out;
}

/// Splits on runs of Unicode whitespace.
inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> words;
  std::size_t start = std::string_view::npos;
  for (const auto& cp : decode(text)) {
    if (is_whitespace(cp.value)) {
      if (start != std::string_view::npos) {
        words.emplace_back(text.substr(start, cp.begin - start));
        start = std::string_view::npos;
      }
    } else if (start == std::string_view::npos) {
      start = cp.begin;
    }
  }
  if (start != std::string_view::npos) words.emplace_back(text.substr(start));
  return words;
}

}  // namespace detaudit::unicode
