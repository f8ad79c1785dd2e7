#pragma once

// Synthetic audit corpora.
//
// Human and generated text are drawn from two different Zipfian unigram
// distributions over one pseudo-Czech vocabulary. Human documents come from
// two writer groups (native / nonnative) that share the human distribution
// unless a shift is injected, in which case a fraction of each nonnative
// token is drawn from the generated distribution instead. A unigram mixture
// of both distributions serves as the reference model for log-prob caches.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "detaudit/corpus.hpp"
#include "detaudit/entropy.hpp"
#include "detaudit/rng.hpp"
#include "detaudit/tokenizer.hpp"

namespace detaudit::synth {

struct SynthConfig {
  std::uint64_t seed = 20240917;
  std::size_t vocab_size = 3000;
  double zipf_exponent = 1.05;
  std::size_t train_per_class = 300;
  std::size_t test_per_class = 200;
  std::size_t audit_docs = 150;  // per writer group
  std::size_t min_words = 120;
  std::size_t max_words = 260;
  /// Probability that a nonnative token comes from the generated
  /// distribution; 0 means both writer groups are identically distributed.
  double nonnative_shift = 0.0;
};

struct SynthCorpus {
  Dataset train;
  Dataset test;
  Dataset native;
  Dataset nonnative;
};

class UnigramSource {
 public:
  UnigramSource(const std::vector<std::string>& words, std::vector<std::size_t> rank_of, double exponent)
      : words_(&words) {
    std::vector<double> weight(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      weight[i] = 1.0 / std::pow(static_cast<double>(rank_of[i] + 1), exponent);
    }
    const double total = std::accumulate(weight.begin(), weight.end(), 0.0);
    prob_.resize(words.size());
    cdf_.resize(words.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < words.size(); ++i) {
      prob_[i] = weight[i] / total;
      acc += prob_[i];
      cdf_[i] = acc;
    }
    cdf_.back() = 1.0;
  }

  std::size_t draw(Rng& rng) const {
    const double u = rng.uniform();
    return static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
  }

  double prob(std::size_t i) const { return prob_[i]; }
  const std::string& word(std::size_t i) const { return (*words_)[i]; }

 private:
  const std::vector<std::string>* words_;
  std::vector<double> prob_;
  std::vector<double> cdf_;
};

/// Deterministic pseudo-Czech word list.
inline std::vector<std::string> make_vocabulary(std::size_t n, std::uint64_t seed) {
  static constexpr std::array<const char*, 24> kOnsets = {"b", "c", "č", "d", "h", "ch", "j", "k",
                                                          "l", "m", "n", "p", "r", "ř", "s", "š",
                                                          "t", "v", "z", "ž", "st", "pr", "kr", "sl"};
  static constexpr std::array<const char*, 12> kNuclei = {"a", "á", "e", "é", "ě", "i",
                                                          "í", "o", "u", "ů", "y", "ý"};
  Rng rng(derive_seed(seed, 0x766F6361));
  std::vector<std::string> words;
  std::unordered_map<std::string, bool> seen;
  while (words.size() < n) {
    const auto syllables = 1 + rng.uniform_index(3);
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) {
      w += kOnsets[rng.uniform_index(kOnsets.size())];
      w += kNuclei[rng.uniform_index(kNuclei.size())];
    }
    if (seen.emplace(w, true).second) words.push_back(std::move(w));
  }
  return words;
}

class Generator {
 public:
  explicit Generator(const SynthConfig& cfg)
      : cfg_(cfg), words_(make_vocabulary(cfg.vocab_size, cfg.seed)),
        human_(words_, identity(cfg.vocab_size), cfg.zipf_exponent),
        generated_(words_, shuffled(cfg.vocab_size, derive_seed(cfg.seed, 0x67656E)), cfg.zipf_exponent) {}

  // The unigram sources point into words_.
  Generator(const Generator&) = delete;
  Generator& operator=(const Generator&) = delete;

  SynthCorpus corpus() const {
    SynthCorpus c;
    c.train = make_dataset("train", cfg_.train_per_class, cfg_.train_per_class, 0.0, 1);
    c.test = make_dataset("test", cfg_.test_per_class, cfg_.test_per_class, 0.0, 2);
    c.native = make_dataset("native", cfg_.audit_docs, 0, 0.0, 3);
    c.nonnative = make_dataset("nonnative", cfg_.audit_docs, 0, cfg_.nonnative_shift, 4);
    return c;
  }

  /// Reference-model log-probabilities: every token scored under the
  /// 50/50 mixture of both unigram distributions; punctuation and unseen
  /// tokens get a fixed floor probability.
  LogProbRecord logprobs(const Document& d, std::size_t max_tokens = kDefaultMaxTokens) const {
    LogProbRecord rec{d.id, model_id(), {}, {}};
    auto seq = truncate(tokenize(d.text), std::max<std::size_t>(max_tokens, 1));
    rec.tokens = std::move(seq.tokens);
    rec.logprobs.reserve(rec.tokens.size());
    for (std::size_t i = 0; i < rec.tokens.size(); ++i) {
      if (i == 0) {
        rec.logprobs.emplace_back();
        continue;
      }
      double p = kFloor;
      if (auto it = index_.find(rec.tokens[i]); it != index_.end()) {
        p = 0.5 * human_.prob(it->second) + 0.5 * generated_.prob(it->second);
      }
      rec.logprobs.emplace_back(std::log(p));
    }
    return rec;
  }

  static std::string model_id() { return "synthetic-unigram-mixture/v1"; }

 private:
  static constexpr double kFloor = 0.05;

  static std::vector<std::size_t> identity(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
  }

  static std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
    auto v = identity(n);
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
    return v;
  }

  std::string make_text(Rng& rng, const UnigramSource& base, double shift) const {
    const auto n = cfg_.min_words + rng.uniform_index(cfg_.max_words - cfg_.min_words + 1);
    std::string text;
    std::size_t sentence = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& src = shift > 0.0 && rng.bernoulli(shift) ? generated_ : base;
      const auto& w = src.word(src.draw(rng));
      if (!text.empty()) text += ' ';
      text += w;
      ++sentence;
      if (sentence >= 8 && rng.bernoulli(0.2)) {
        text += '.';
        sentence = 0;
      } else if (rng.bernoulli(0.05)) {
        text += ',';
      }
    }
    if (sentence > 0) text += '.';
    return text;
  }

  Dataset make_dataset(const std::string& name, std::size_t n_human, std::size_t n_generated, double shift,
                       std::uint64_t stream) const {
    Dataset ds{name, {}, false};
    Rng rng(derive_seed(cfg_.seed, stream));
    for (std::size_t i = 0; i < n_human + n_generated; ++i) {
      const bool human = i < n_human;
      Document d;
      d.id = name + "-" + (human ? "h" : "g") + std::to_string(human ? i : i - n_human);
      d.label = human ? Label::human : Label::generated;
      d.dataset_name = name;
      d.text = make_text(rng, human ? human_ : generated_, human ? shift : 0.0);
      ds.documents.push_back(std::move(d));
    }
    return ds;
  }

  SynthConfig cfg_;
  std::vector<std::string> words_;
  UnigramSource human_;
  UnigramSource generated_;
  std::unordered_map<std::string, std::size_t> index_ = build_index(words_);

  static std::unordered_map<std::string, std::size_t> build_index(const std::vector<std::string>& w) {
    std::unordered_map<std::string, std::size_t> m;
    for (std::size_t i = 0; i < w.size(); ++i) m.emplace(w[i], i);
    return m;
  }
};

}  // namespace detaudit::synth
