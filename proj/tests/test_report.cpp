#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "detaudit/report.hpp"

using namespace detaudit;

namespace {

EvalRow row(const std::string& name, std::size_t neg, std::size_t fp, std::size_t pos = 0, std::size_t fn = 0,
            std::optional<double> oov = std::nullopt) {
  return make_eval_row(name, metrics_from_counts({pos, neg, fp, fn}), oov);
}

AuditBundle bundle_with(const std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>>& fps) {
  // fps: detector -> (FP on nonnative of 100, FP on native of 100)
  AuditBundle b;
  for (const auto& [det, counts] : fps) {
    b.eval_reports[det].rows = {row("nonnative", 100, counts.first), row("native", 100, counts.second)};
  }
  return b;
}

std::vector<std::string> cells(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string c;
  while (std::getline(ss, c, sep)) {
    const auto b = c.find_first_not_of(' ');
    const auto e = c.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(c.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

TEST(FormatPercent, HalfEvenOneDecimal) {
  EXPECT_EQ(format_percent(99.15), "99.2");
  EXPECT_EQ(format_percent(0.25), "0.2");
  EXPECT_EQ(format_percent(0.35), "0.4");
  EXPECT_EQ(format_percent(100.0), "100.0");
  EXPECT_EQ(format_percent(std::nullopt), "--");
}

TEST(RenderEvalTable, MissingFnrAndHeaderOnly) {
  EvalReport empty;
  EXPECT_EQ(render_eval_table(empty, TableFormat::csv), "Dataset,ACC,FPR,FNR,UNK\n");
  EXPECT_EQ(render_eval_table(empty, TableFormat::markdown),
            "| Dataset | ACC | FPR | FNR | UNK |\n|---|---:|---:|---:|---:|\n");
  EvalReport rep{{row("NonNative", 200, 9, 0, 0, 13.06)}};
  EXPECT_EQ(render_eval_table(rep, TableFormat::csv), "Dataset,ACC,FPR,FNR,UNK\nNonNative,95.5,4.5,--,13.1\n");
}

TEST(RenderEvalTable, CsvAndMarkdownAgreeAndReparse) {
  EvalReport rep{{row("a,b", 1000, 8, 1000, 10, 13.1), row("val|x", 598, 6, 600, 4, 15.44), row("h", 30, 0)}};
  std::stringstream csv(render_eval_table(rep, TableFormat::csv));
  std::stringstream md(render_eval_table(rep, TableFormat::markdown));
  std::string cl, ml;
  std::getline(csv, cl);
  std::getline(md, ml);
  std::getline(md, ml);
  for (const auto& r : rep.rows) {
    std::getline(csv, cl);
    std::getline(md, ml);
    auto c = cells(cl, ',');
    auto m = cells(ml, '|');
    ASSERT_GE(c.size(), 4u);
    ASSERT_GE(m.size(), 5u);
    const std::vector<std::string> cn(c.end() - 4, c.end());
    const std::vector<std::string> mn(m.end() - 4, m.end());
    EXPECT_EQ(cn, mn);
    EXPECT_NEAR(std::stod(cn[0]), r.acc, 0.05);
    if (r.fpr) {
      EXPECT_NEAR(std::stod(cn[1]), *r.fpr, 0.05);
    }
  }
}

TEST(BiasSummary, NegativeGapNeverFlags) {
  const auto b = bundle_with({{"d1", {0, 30}}, {"d2", {1, 40}}});
  const auto f = bias_findings(b, {{"nonnative", "native"}});
  ASSERT_EQ(f.size(), 1u);
  EXPECT_FALSE(f[0].systematic);
  EXPECT_LT(f[0].detectors[0].delta_fpr, 0.0);
}

TEST(BiasSummary, MixedSignsDoNotFlag) {
  const auto b = bundle_with({{"d1", {40, 5}}, {"d2", {2, 30}}});
  EXPECT_FALSE(bias_findings(b, {{"nonnative", "native"}})[0].systematic);
  const auto text = render_bias_summary(b, std::vector<BiasPair>{{"nonnative", "native"}});
  EXPECT_NE(text.find("systematic: no"), std::string::npos);
}

TEST(BiasSummary, UnanimousSignificantGapFlags) {
  const auto b = bundle_with({{"d1", {35, 5}}, {"d2", {40, 10}}, {"d3", {31, 1}}});
  const auto f = bias_findings(b, {{"nonnative", "native"}, {"nonnative", "native"}});
  ASSERT_EQ(f.size(), 1u);
  EXPECT_TRUE(f[0].systematic);
  for (const auto& d : f[0].detectors) {
    EXPECT_NEAR(d.delta_fpr, 30.0, 1e-9);
    EXPECT_LT(d.p_value, 0.001);
  }
  const auto text = render_bias_summary(b, std::vector<BiasPair>{{"nonnative", "native"}});
  EXPECT_NE(text.find("systematic: yes"), std::string::npos);
  EXPECT_NE(text.find("| d3 | +30.0 |"), std::string::npos);
}

TEST(BiasSummary, SmallGapNotSignificant) {
  const auto b = bundle_with({{"d1", {6, 4}}});
  EXPECT_FALSE(bias_findings(b, {{"nonnative", "native"}})[0].systematic);
}

TEST(BiasSummary, UnknownDatasetRejected) {
  const auto b = bundle_with({{"d1", {6, 4}}});
  EXPECT_THROW(bias_findings(b, {{"nonnative", "missing"}}), ValidationError);
}

TEST(HeatmapGrid, RoundTripAndShape) {
  CorrelationMatrix m;
  m.model_names = {"x", "y"};
  m.per_dataset["d1"] = {{1.0, 0.25}, {0.25, 1.0}};
  m.per_dataset["d2"] = {{1.0, 0.75}, {0.75, 1.0}};
  m.n_docs = {{"d1", 10}, {"d2", 20}};
  m.mean = {{1.0, 0.5}, {0.5, 1.0}};
  const auto j = export_heatmap_grid(m);
  EXPECT_EQ(j["mean"].size(), 2u);
  EXPECT_EQ(j["mean"][0].size(), 2u);
  EXPECT_EQ(j["mean"][0][1], j["mean"][1][0]);
  EXPECT_EQ(parse_heatmap_grid(nlohmann::json::parse(j.dump())), m);
}

TEST(AuditBundle, JsonRoundTripAndValidation) {
  auto b = bundle_with({{"nb", {20, 5}}});
  b.entropy_stats["native"] = {2.0, 0.5, 2, {1.5, 2.5}, {"a", "b"}, {}};
  b.entropy_stats["nonnative"] = {2.5, 0.5, 2, {2.0, 3.0}, {"c", "d"}, {"e"}};
  const std::vector<BiasPair> pairs{{"nonnative", "native"}};
  add_pair_tests(b, pairs);
  ASSERT_EQ(b.tests.size(), 2u);
  EXPECT_EQ(b.tests[0].statistic_kind, "fisher_exact_two_sided");
  EXPECT_EQ(b.tests[1].statistic_kind, "welch_t_two_sided");
  b.metadata.tool_version = "1.2.3";
  b.metadata.input_digests = {{"x.json", "abc"}};
  b.stochastic = true;
  EXPECT_THROW(validate(b), ValidationError);
  b.metadata.seed = 7;
  b.metadata.rng_algorithm = Rng::kAlgorithm;
  validate(b);
  const auto j = nlohmann::json::parse(bundle_to_json(b).dump());
  EXPECT_EQ(bundle_from_json(j), b);

  auto future = j;
  future["format_version"] = kBundleFormatVersion + 1;
  EXPECT_THROW(bundle_from_json(future), VersionError);
  auto broken = j;
  broken.erase("metadata");
  EXPECT_THROW(bundle_from_json(broken), CorruptFileError);
  b.tests.push_back({"bogus", "fisher_exact_two_sided", 0.5, {"nowhere"}});
  EXPECT_THROW(validate(b), ValidationError);
}
