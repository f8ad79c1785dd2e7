#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "detaudit/detector_nb.hpp"
#include "detaudit/rng.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace detaudit;

namespace {

std::vector<TokenSequence> seqs(const std::vector<std::string>& texts) {
  std::vector<TokenSequence> out;
  for (const auto& t : texts) out.push_back(tokenize(t));
  return out;
}

std::vector<std::vector<std::string>> split(const std::vector<std::string>& texts) {
  std::vector<std::vector<std::string>> out;
  for (const auto& t : texts) out.push_back(tokenize(t).tokens);
  return out;
}

const std::vector<std::string> kToy = {"a b b c", "a a d", "c c d d", "b d", "a c c"};
const std::vector<Label> kToyLabels = {Label::human, Label::human, Label::generated, Label::generated,
                                       Label::human};
const std::vector<int> kToyInts = {0, 0, 1, 1, 0};

}  // namespace

TEST(FitTfidf, IdfFormula) {
  const auto one = fit_tfidf(seqs({"a"}));
  EXPECT_DOUBLE_EQ(one.idf.at(*one.vocab.find("a")), 1.0);

  const auto two = fit_tfidf(seqs({"x y", "y"}));
  EXPECT_NEAR(two.idf.at(*two.vocab.find("x")), 1.405465108108164, 1e-12);
  EXPECT_DOUBLE_EQ(two.idf.at(*two.vocab.find("y")), 1.0);

  const auto toy = fit_tfidf(seqs({"a b c", "a b", "a"}));
  for (double v : toy.idf) EXPECT_GE(v, toy.idf.at(*toy.vocab.find("a")));
  EXPECT_THROW(fit_tfidf(seqs({"", ""})), ValidationError);
}

TEST(FitTfidf, LowercasesByDefault) {
  const auto fit = fit_tfidf(seqs({"Praha praha PRAHA"}));
  EXPECT_EQ(fit.vocab.size(), 1u);
  EXPECT_EQ(fit_tfidf(seqs({"Praha praha"}), false).vocab.size(), 2u);
}

TEST(Vectorize, NormalizationContract) {
  const auto fit = fit_tfidf(seqs({"a b", "c d e"}));
  EXPECT_TRUE(vectorize(fit.vocab, fit.idf, tokenize("zzz qqq")).empty());
  const auto v = vectorize(fit.vocab, fit.idf, tokenize("a b"));
  ASSERT_EQ(v.size(), 2u);
  EXPECT_NEAR(v[0].value, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(v[1].value, 1.0 / std::sqrt(2.0), 1e-15);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    std::string text;
    for (int k = 0; k < 8; ++k) text += std::string(1, static_cast<char>('a' + rng.uniform_index(6))) + " ";
    const auto w = vectorize(fit.vocab, fit.idf, tokenize(text));
    if (!w.empty()) {
      EXPECT_NEAR(l2_norm(w), 1.0, 1e-9);
    }
  }
}

TEST(TrainNb, BalancedPriors) {
  const auto m = train_detector(seqs({"a", "b", "c", "d"}),
                                std::vector<Label>{Label::human, Label::generated, Label::human, Label::generated});
  EXPECT_DOUBLE_EQ(m.class_log_prior[0], std::log(0.5));
  EXPECT_DOUBLE_EQ(m.class_log_prior[1], std::log(0.5));
}

TEST(TrainNb, FeatureLogProbMatchesClosedFormCounts) {
  const auto m = train_detector(seqs(kToy), kToyLabels);
  ASSERT_EQ(m.vocab.size(), 4u);
  // Recompute the per-class smoothed feature distribution from dense rows.
  const auto docs = split(kToy);
  const double n = static_cast<double>(docs.size());
  std::vector<double> idf;
  for (const auto& term : m.vocab.terms()) {
    double df = 0.0;
    for (const auto& d : docs) df += std::count(d.begin(), d.end(), term) > 0 ? 1.0 : 0.0;
    idf.push_back(std::log((1.0 + n) / (1.0 + df)) + 1.0);
  }
  for (int c = 0; c < 2; ++c) {
    std::vector<double> mass(4, 0.0);
    for (std::size_t d = 0; d < docs.size(); ++d) {
      if (kToyInts[d] != c) continue;
      std::vector<double> x(4);
      double ss = 0.0;
      for (std::size_t t = 0; t < 4; ++t) {
        x[t] = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), m.vocab.term(t))) * idf[t];
        ss += x[t] * x[t];
      }
      for (std::size_t t = 0; t < 4; ++t) mass[t] += x[t] / std::sqrt(ss);
    }
    double total = 4.0;
    for (double v : mass) total += v;
    for (std::size_t t = 0; t < 4; ++t) {
      EXPECT_NEAR(m.feature_log_prob[c][t], std::log((mass[t] + 1.0) / total), 1e-12);
    }
  }
}

TEST(TrainNb, LargeAlphaApproachesUniform) {
  const auto m = train_detector(seqs(kToy), kToyLabels, 1e9);
  for (int c = 0; c < 2; ++c) {
    for (double lp : m.feature_log_prob[c]) EXPECT_NEAR(std::exp(lp), 0.25, 1e-8);
  }
}

TEST(TrainNb, Preconditions) {
  EXPECT_THROW(train_detector(seqs(kToy), kToyLabels, 0.0), ValidationError);
  EXPECT_THROW(train_detector(seqs({"a", "b"}), std::vector<Label>{Label::human, Label::human}), ValidationError);
  EXPECT_THROW(train_detector(seqs({"a", "b"}), std::vector<Label>{Label::human, Label::unknown}), ValidationError);
}

TEST(PredictProba, NoEvidenceGivesPrior) {
  const auto m = train_detector(seqs({"a", "b", "c", "d"}),
                                std::vector<Label>{Label::human, Label::generated, Label::human, Label::generated});
  EXPECT_DOUBLE_EQ(predict_proba(m, std::string_view("unseen words only")), 0.5);
  const auto u = train_detector(seqs(kToy), kToyLabels);
  EXPECT_NEAR(predict_proba(u, std::string_view("")), 0.4, 1e-15);
}

TEST(PredictProba, HeldInDocsMatchBruteForce) {
  const auto m = train_detector(seqs(kToy), kToyLabels);
  const auto docs = split(kToy);
  for (const auto& text : kToy) {
    const auto both = predict_proba_both(m, tokenize(text));
    EXPECT_NEAR(both[0] + both[1], 1.0, 1e-12);
    EXPECT_NEAR(both[1], oracle::nb_posterior(docs, kToyInts, tokenize(text).tokens, 1.0), 1e-12);
  }
}

TEST(ModelIo, RoundTripPreservesPredictions) {
  Rng rng(11);
  std::vector<std::string> texts;
  std::vector<Label> labels;
  for (int i = 0; i < 40; ++i) {
    std::string t;
    for (int k = 0; k < 30; ++k) t += "t" + std::to_string(rng.uniform_index(i % 2 ? 50 : 80)) + " ";
    texts.push_back(t);
    labels.push_back(i % 2 ? Label::generated : Label::human);
  }
  const auto m = train_detector(seqs(texts), labels);
  const auto path = fs::temp_directory_path() / "detaudit-model-roundtrip.json";
  save_model(m, path);
  const auto loaded = load_model(path);
  EXPECT_EQ(serialize_model(loaded), serialize_model(m));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::string t;
    for (int k = 0; k < 20; ++k) t += "t" + std::to_string(rng.uniform_index(100)) + " ";
    worst = std::max(worst, std::fabs(predict_proba(m, std::string_view(t)) - predict_proba(loaded, std::string_view(t))));
  }
  EXPECT_LT(worst, 1e-12);

  const auto text = serialize_model(m);
  std::ofstream(path, std::ios::binary | std::ios::trunc) << text.substr(0, text.size() / 2);
  EXPECT_THROW(load_model(path), CorruptFileError);

  auto j = nlohmann::json::parse(text);
  j["format_version"] = kModelFormatVersion + 1;
  std::ofstream(path, std::ios::binary | std::ios::trunc) << j.dump();
  EXPECT_THROW(load_model(path), VersionError);

  j = nlohmann::json::parse(text);
  j["idf"].erase(0);
  EXPECT_THROW(model_from_json(j), CorruptFileError);
  fs::remove(path);
  EXPECT_THROW(load_model(path), IoError);
}
