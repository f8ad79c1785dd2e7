#include <cmath>
#include <regex>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "detaudit/entropy.hpp"
#include "detaudit/rng.hpp"
#include "oracles.hpp"

using namespace detaudit;

namespace {

LogProbRecord record(const std::string& id, const std::vector<double>& lps) {
  LogProbRecord r{id, "test-model", {}, {}};
  for (std::size_t i = 0; i < lps.size(); ++i) {
    r.tokens.push_back("t" + std::to_string(i));
    if (i == 0) {
      r.logprobs.emplace_back();
    } else {
      r.logprobs.emplace_back(lps[i]);
    }
  }
  return r;
}

LogProbRecord constant(const std::string& id, std::size_t n, double lp) {
  return record(id, std::vector<double>(n, lp));
}

}  // namespace

TEST(DocumentEntropy, UniformProviderIsLnV) {
  const UniformProvider p(50);
  std::string text;
  for (int i = 0; i < 300; ++i) text += "slovo ";
  const auto rec = p.score("d", text);
  EXPECT_EQ(rec.model_id, "uniform-50");
  EXPECT_FALSE(rec.logprobs[0].has_value());
  EXPECT_NEAR(document_entropy(rec), std::log(50.0), 1e-12);
}

TEST(DocumentEntropy, ThreeTermHandSum) {
  std::vector<double> lps(53, -9.0);
  lps[50] = -1.0;
  lps[51] = -2.0;
  lps[52] = -3.0;
  EXPECT_DOUBLE_EQ(document_entropy(record("d", lps)), 2.0);
}

TEST(DocumentEntropy, TooShort) {
  EXPECT_THROW(document_entropy(constant("d", 40, -1.0)), TooShortError);
  EXPECT_THROW(document_entropy(constant("d", 50, -1.0)), TooShortError);
  EXPECT_NO_THROW(document_entropy(constant("d", 51, -1.0)));
  EXPECT_THROW(document_entropy(constant("d", 600, -1.0), 50, 50), TooShortError);
}

TEST(DocumentEntropy, TruncatesToMaxTokens) {
  std::vector<double> lps(600, -1.0);
  for (std::size_t i = 512; i < 600; ++i) lps[i] = -100.0;
  EXPECT_DOUBLE_EQ(document_entropy(record("d", lps)), 1.0);
}

TEST(DocumentEntropy, RejectsMalformedRecords) {
  auto r = constant("d", 60, -1.0);
  r.logprobs[55].reset();
  EXPECT_THROW(document_entropy(r), ValidationError);
  r = constant("d", 60, -1.0);
  r.logprobs[55] = 0.5;
  EXPECT_THROW(document_entropy(r), ValidationError);
  r = constant("d", 60, -1.0);
  r.tokens.pop_back();
  EXPECT_THROW(document_entropy(r), ValidationError);
}

TEST(Perplexity, Values) {
  EXPECT_DOUBLE_EQ(perplexity(0.0), 1.0);
  EXPECT_NEAR(perplexity(std::log(2.0)), 2.0, 1e-15);
  EXPECT_NEAR(perplexity(2.14), 8.49944, 1e-5);
}

TEST(DatasetEntropy, ClosedForms) {
  const std::vector<LogProbRecord> same = {constant("a", 100, -2.0), constant("b", 100, -2.0)};
  EXPECT_DOUBLE_EQ(dataset_entropy(same).std, 0.0);
  const std::vector<LogProbRecord> two = {constant("a", 100, -2.0), constant("b", 100, -4.0), constant("c", 10, -1.0)};
  const auto s = dataset_entropy(two);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_DOUBLE_EQ(s.std, 1.0);
  EXPECT_EQ(s.n, 2u);
  EXPECT_EQ(s.skipped, std::vector<std::string>{"c"});
  EXPECT_THROW(dataset_entropy(std::vector<LogProbRecord>{constant("c", 10, -1.0)}), ValidationError);
}

TEST(DatasetEntropy, MatchesRecountOracle) {
  Rng rng(8);
  std::vector<LogProbRecord> recs;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> lps(51 + rng.uniform_index(600));
    for (auto& v : lps) v = -10.0 * rng.uniform();
    recs.push_back(record("r" + std::to_string(i), lps));
  }
  const auto s = dataset_entropy(recs);
  long double sum = 0.0L;
  std::vector<double> h;
  for (const auto& r : recs) h.push_back(oracle::windowed_entropy(r.logprobs, 50, 512));
  for (double v : h) sum += v;
  const double mean = static_cast<double>(sum / h.size());
  long double ss = 0.0L;
  for (double v : h) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(s.mean, mean, 1e-9);
  EXPECT_NEAR(s.std, std::sqrt(static_cast<double>(ss / h.size())), 1e-9);
  for (std::size_t i = 0; i < h.size(); ++i) EXPECT_NEAR(s.values[i], h[i], 1e-9);
}

TEST(FitGaussian, Values) {
  const std::vector<double> v{1.0, 3.0};
  const auto g = fit_gaussian(v);
  EXPECT_DOUBLE_EQ(g.mu, 2.0);
  EXPECT_DOUBLE_EQ(g.sigma, 1.0);
  EXPECT_THROW(fit_gaussian(std::vector<double>{2.0, 2.0}), ValidationError);

  Rng rng(9);
  std::vector<double> draws(100000);
  for (auto& d : draws) d = rng.normal(3.30, 0.27);
  const auto f = fit_gaussian(draws);
  EXPECT_NEAR(f.mu, 3.30, 0.005);
  EXPECT_NEAR(f.sigma, 0.27, 0.005);
}

TEST(DensityExport, SymmetryNormalizationAndMode) {
  const auto sym = density_export(std::vector<double>{-1.0, 1.0}, 201);
  for (std::size_t i = 0; i < sym.points.size(); ++i) {
    const auto& a = sym.points[i];
    const auto& b = sym.points[sym.points.size() - 1 - i];
    EXPECT_NEAR(a.x, -b.x, 1e-9);
    EXPECT_NEAR(a.density, b.density, 1e-9);
  }

  Rng rng(10);
  std::vector<double> draws(10000);
  for (auto& d : draws) d = rng.normal(2.0, 0.3);
  const auto g = density_export(draws, 512);
  EXPECT_GT(g.bandwidth, 0.0);
  double integral = 0.0;
  for (std::size_t i = 1; i < g.points.size(); ++i) {
    integral += 0.5 * (g.points[i].density + g.points[i - 1].density) * (g.points[i].x - g.points[i - 1].x);
  }
  EXPECT_NEAR(integral, 1.0, 0.01);
  // Isolated tail draws leave bumps far below 1% of the peak; count modes above that.
  double peak = 0.0;
  for (const auto& p : g.points) peak = std::max(peak, p.density);
  int maxima = 0;
  for (std::size_t i = 1; i + 1 < g.points.size(); ++i) {
    const auto& p = g.points[i];
    if (p.density > g.points[i - 1].density && p.density > g.points[i + 1].density && p.density >= 0.01 * peak) {
      ++maxima;
    }
  }
  EXPECT_EQ(maxima, 1);
  EXPECT_THROW(density_export(std::vector<double>{1.0}), ValidationError);
}

TEST(TokenHeatmap, ColorsAndWellFormedness) {
  std::vector<double> lps(200);
  Rng rng(12);
  for (auto& v : lps) v = -8.0 * rng.uniform();
  lps[120] = -0.001;
  auto rec = record("d", lps);
  rec.tokens[5] = "<&\"x\">";
  const auto html = token_heatmap(rec, 50);

  std::regex span_re("<span class=\"[^\"]*\" style=\"background-color:rgb\\((\\d+),(\\d+),(\\d+)\\)\"");
  std::vector<std::string> colors;
  for (auto it = std::sregex_iterator(html.begin(), html.end(), span_re); it != std::sregex_iterator(); ++it) {
    colors.push_back((*it)[1].str() + "," + (*it)[2].str() + "," + (*it)[3].str());
  }
  ASSERT_EQ(colors.size(), 200u);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(colors[i], "160,160,160");
  EXPECT_EQ(colors[120], "40,160,80");
  EXPECT_NE(html.find("&lt;&amp;&quot;x&quot;&gt;"), std::string::npos);

  // Every opened tag closes, in order.
  std::vector<std::string> stack;
  std::regex tag_re("<(/?)([a-zA-Z][a-zA-Z0-9]*)[^>]*?(/?)>");
  for (auto it = std::sregex_iterator(html.begin(), html.end(), tag_re); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    if (m[3] == "/") continue;
    if (m[1] == "/") {
      ASSERT_FALSE(stack.empty());
      ASSERT_EQ(stack.back(), m[2].str());
      stack.pop_back();
    } else {
      stack.push_back(m[2].str());
    }
  }
  EXPECT_TRUE(stack.empty());

  const auto flat = token_heatmap(constant("f", 80, -2.0), 50);
  std::set<std::string> scored;
  std::size_t idx = 0;
  for (auto it = std::sregex_iterator(flat.begin(), flat.end(), span_re); it != std::sregex_iterator(); ++it, ++idx) {
    if (idx >= 50) scored.insert((*it)[1].str() + "," + (*it)[2].str() + "," + (*it)[3].str());
  }
  EXPECT_EQ(scored.size(), 1u);
}

TEST(LogProbCache, RoundTripAndErrors) {
  std::vector<LogProbRecord> recs = {record("a", {0.0, -1.25, -3.5}), record("b", {0.0, -0.1})};
  const auto text = logprob_cache_to_jsonl(recs);
  EXPECT_NE(text.find("\"logprobs\":[null,-1.25,-3.5]"), std::string::npos);
  EXPECT_EQ(parse_logprob_cache(text), recs);
  try {
    parse_logprob_cache(text + "\n{\"doc_id\":\"c\"}\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  const CacheProvider cache(recs);
  EXPECT_EQ(cache.model_id(), "test-model");
  EXPECT_EQ(cache.score("a", "", 2).size(), 2u);
  EXPECT_THROW(cache.score("zzz", ""), ValidationError);
  EXPECT_THROW(CacheProvider(std::vector<LogProbRecord>{recs[0], recs[0]}), ValidationError);
}
