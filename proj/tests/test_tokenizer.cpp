#include <set>
#include <string>
#include <unordered_set>

#include <gtest/gtest.h>

#include "detaudit/rng.hpp"
#include "detaudit/tokenizer.hpp"

using namespace detaudit;

TEST(Tokenize, Empty) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, PunctuationSplitsOff) {
  const auto seq = tokenize("Ahoj, světe!");
  EXPECT_EQ(seq.tokens, (std::vector<std::string>{"Ahoj", ",", "světe", "!"}));
  EXPECT_EQ(seq.offsets[2], (ByteSpan{6, 12}));
  EXPECT_EQ(seq.offsets[3], (ByteSpan{12, 13}));
}

TEST(Tokenize, WhitespaceCollapse) {
  const auto seq = tokenize("a  b");
  EXPECT_EQ(seq.tokens, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(seq.offsets, (std::vector<ByteSpan>{{0, 1}, {3, 4}}));
}

TEST(Tokenize, UnicodeWhitespaceAndSymbols) {
  const auto seq = tokenize("a\xC2\xA0" "b\t\r\nc 5€ «d»");
  EXPECT_EQ(seq.tokens, (std::vector<std::string>{"a", "b", "c", "5", "€", "«", "d", "»"}));
}

TEST(Tokenize, OffsetsSliceSource) {
  const std::string text = "Příliš  žluťoučký kůň, úpěl (ďábelské) ódy...";
  const auto seq = tokenize(text);
  ASSERT_EQ(seq.tokens.size(), seq.offsets.size());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    EXPECT_EQ(text.substr(seq.offsets[i].begin, seq.offsets[i].end - seq.offsets[i].begin), seq.tokens[i]);
  }
  EXPECT_EQ(seq.size(), 12u);
}

TEST(Lowercase, Examples) {
  EXPECT_EQ(lowercase("ŠKOLA"), "škola");
  EXPECT_EQ(lowercase("abc"), "abc");
  EXPECT_EQ(lowercase("Praha 1"), "praha 1");
}

TEST(Truncate, Limits) {
  TokenSequence ten;
  for (int i = 0; i < 10; ++i) {
    ten.tokens.push_back("t" + std::to_string(i));
    ten.offsets.push_back({0, 0});
  }
  EXPECT_EQ(truncate(ten).tokens, ten.tokens);
  EXPECT_EQ(truncate(ten, 1).tokens, std::vector<std::string>{"t0"});
  EXPECT_THROW(truncate(ten, 0), ValidationError);

  std::string text;
  for (int i = 0; i < 600; ++i) text += "w" + std::to_string(i) + " ";
  const auto full = tokenize(text);
  const auto cut = truncate(full, 512);
  ASSERT_EQ(cut.size(), 512u);
  EXPECT_TRUE(std::equal(cut.tokens.begin(), cut.tokens.end(), full.tokens.begin()));
}

TEST(OovRatio, SimpleCounts) {
  const std::set<std::string> vocab{"a", "b", "c", "d"};
  EXPECT_DOUBLE_EQ(oov_ratio(tokenize("a b c d"), vocab), 0.0);
  EXPECT_DOUBLE_EQ(oov_ratio(tokenize("a x b y"), vocab), 0.5);
  EXPECT_DOUBLE_EQ(oov_ratio(tokenize("A B"), vocab), 0.0);
  EXPECT_DOUBLE_EQ(oov_ratio(tokenize("A B"), vocab, false), 1.0);
  EXPECT_THROW(oov_ratio(tokenize(""), vocab), ValidationError);
}

TEST(OovRatio, MatchesBruteForceRecount) {
  Rng rng(5);
  std::unordered_set<std::string> vocab;
  for (int i = 0; i < 300; ++i) vocab.insert("w" + std::to_string(rng.uniform_index(600)));
  std::string text;
  std::vector<std::string> drawn;
  for (int i = 0; i < 1000; ++i) {
    drawn.push_back("w" + std::to_string(rng.uniform_index(600)));
    text += drawn.back() + " ";
  }
  std::size_t missing = 0;
  for (const auto& w : drawn) missing += vocab.count(w) == 0 ? 1 : 0;
  EXPECT_DOUBLE_EQ(oov_ratio(tokenize(text), vocab), static_cast<double>(missing) / 1000.0);
}
