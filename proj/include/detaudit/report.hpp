#pragma once

// Audit artifacts: evaluation tables, bias summaries, correlation grids and
// the versioned audit bundle that ties them together.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "detaudit/corpus.hpp"
#include "detaudit/entropy.hpp"
#include "detaudit/error.hpp"
#include "detaudit/evalstats.hpp"
#include "detaudit/rng.hpp"

namespace detaudit {

inline constexpr int kBundleFormatVersion = 1;
inline constexpr double kSignificanceLevel = 0.05;

struct EvalRow {
  std::string dataset_name;
  std::size_t n = 0;
  double acc = 0.0;
  std::optional<double> fpr;
  std::optional<double> fnr;
  std::optional<double> oov_ratio;
  ConfusionCounts counts;

  friend bool operator==(const EvalRow&, const EvalRow&) = default;
};

struct EvalReport {
  std::vector<EvalRow> rows;

  const EvalRow* find(const std::string& dataset) const {
    for (const auto& r : rows) {
      if (r.dataset_name == dataset) return &r;
    }
    return nullptr;
  }

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

inline EvalRow make_eval_row(std::string dataset, const ConfusionMetrics& m,
                             std::optional<double> oov_ratio = std::nullopt) {
  EvalRow r;
  r.dataset_name = std::move(dataset);
  r.n = m.counts.total();
  r.acc = m.acc;
  r.fpr = m.fpr;
  r.fnr = m.fnr;
  r.oov_ratio = oov_ratio;
  r.counts = m.counts;
  return r;
}

inline void validate(const EvalReport& rep) {
  for (const auto& r : rep.rows) {
    auto in_range = [](std::optional<double> v) { return !v || (*v >= 0.0 && *v <= 100.0); };
    if (!(r.acc >= 0.0 && r.acc <= 100.0) || !in_range(r.fpr) || !in_range(r.fnr) || !in_range(r.oov_ratio)) {
      throw ValidationError("eval report: percentage outside [0, 100] in row '" + r.dataset_name + "'");
    }
    if (r.fpr.has_value() != (r.counts.negatives > 0) || r.fnr.has_value() != (r.counts.positives > 0)) {
      throw ValidationError("eval report: FPR/FNR presence does not match class counts in row '" +
                            r.dataset_name + "'");
    }
  }
}

// ---- tables -----------------------------------------------------------------

enum class TableFormat { csv, markdown };

/// One decimal, ties to even; "--" for an absent value.
inline std::string format_percent(std::optional<double> v) {
  if (!v) return "--";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", round_half_even(*v * 10.0) / 10.0);
  return buf;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string md_field(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

/// Dataset | ACC | FPR | FNR | UNK, in percent.
inline std::string render_eval_table(const EvalReport& report, TableFormat format) {
  std::string out;
  if (format == TableFormat::csv) {
    out = "Dataset,ACC,FPR,FNR,UNK\n";
    for (const auto& r : report.rows) {
      out += detail::csv_field(r.dataset_name) + "," + format_percent(r.acc) + "," + format_percent(r.fpr) +
             "," + format_percent(r.fnr) + "," + format_percent(r.oov_ratio) + "\n";
    }
  } else {
    out = "| Dataset | ACC | FPR | FNR | UNK |\n|---|---:|---:|---:|---:|\n";
    for (const auto& r : report.rows) {
      out += "| " + detail::md_field(r.dataset_name) + " | " + format_percent(r.acc) + " | " +
             format_percent(r.fpr) + " | " + format_percent(r.fnr) + " | " + format_percent(r.oov_ratio) +
             " |\n";
    }
  }
  return out;
}

// ---- bundle -------------------------------------------------------------------

struct StatTest {
  std::string comparison;
  std::string statistic_kind;
  double p_value = 1.0;
  /// Datasets the comparison draws on.
  std::vector<std::string> datasets;

  friend bool operator==(const StatTest&, const StatTest&) = default;
};

struct BundleMetadata {
  std::optional<std::uint64_t> seed;
  std::string rng_algorithm;
  std::string config_digest;
  std::string provider_model_id;
  std::string tool_version;
  std::map<std::string, std::string> input_digests;
  std::map<std::string, std::string> timestamps;

  friend bool operator==(const BundleMetadata&, const BundleMetadata&) = default;
};

struct AuditBundle {
  std::map<std::string, EvalReport> eval_reports;
  std::map<std::string, EntropyStats> entropy_stats;
  std::optional<CorrelationMatrix> correlations;
  std::vector<StatTest> tests;
  BundleMetadata metadata;
  /// Set when any stochastic step contributed to the bundle.
  bool stochastic = false;

  bool has_dataset(const std::string& name) const {
    if (entropy_stats.contains(name)) return true;
    return std::any_of(eval_reports.begin(), eval_reports.end(),
                       [&](const auto& kv) { return kv.second.find(name) != nullptr; });
  }

  friend bool operator==(const AuditBundle&, const AuditBundle&) = default;
};

inline void validate(const AuditBundle& b) {
  for (const auto& [_, rep] : b.eval_reports) validate(rep);
  for (const auto& t : b.tests) {
    for (const auto& ds : t.datasets) {
      if (!b.has_dataset(ds)) {
        throw ValidationError("audit bundle: test '" + t.comparison + "' references unknown dataset '" + ds + "'");
      }
    }
  }
  if (b.stochastic && !b.metadata.seed) throw ValidationError("audit bundle: stochastic steps ran but no seed recorded");
}

// ---- bias summary ---------------------------------------------------------------

struct BiasPair {
  std::string nonnative;
  std::string native;

  auto operator<=>(const BiasPair&) const = default;
};

struct DetectorBias {
  std::string detector;
  double delta_fpr;  // percentage points, nonnative - native
  double p_value;    // two-sided Fisher exact on flagged/not-flagged human docs
};

struct PairFinding {
  BiasPair pair;
  std::vector<DetectorBias> detectors;
  /// Every detector shows a positive, significant FPR gap.
  bool systematic = false;
};

inline constexpr const char* kBiasRule =
    "systematic = FPR(nonnative) > FPR(native) with two-sided Fisher exact p < 0.05, "
    "for every audited detector simultaneously";

inline std::vector<PairFinding> bias_findings(const AuditBundle& bundle, std::vector<BiasPair> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  if (bundle.eval_reports.empty()) throw ValidationError("bias summary: bundle has no evaluation reports");
  std::vector<PairFinding> out;
  for (const auto& pair : pairs) {
    PairFinding f{pair, {}, true};
    for (const auto& [detector, rep] : bundle.eval_reports) {
      const auto* nn = rep.find(pair.nonnative);
      const auto* na = rep.find(pair.native);
      if (nn == nullptr) throw ValidationError("bias summary: unknown dataset '" + pair.nonnative + "' for detector '" + detector + "'");
      if (na == nullptr) throw ValidationError("bias summary: unknown dataset '" + pair.native + "' for detector '" + detector + "'");
      if (!nn->fpr || !na->fpr) {
        throw ValidationError("bias summary: datasets '" + pair.nonnative + "' and '" + pair.native +
                              "' must both contain human documents");
      }
      DetectorBias d{detector, *nn->fpr - *na->fpr,
                     fisher_exact(nn->counts.false_positives, nn->counts.negatives, na->counts.false_positives,
                                  na->counts.negatives)};
      f.systematic = f.systematic && d.delta_fpr > 0.0 && d.p_value < kSignificanceLevel;
      f.detectors.push_back(std::move(d));
    }
    out.push_back(std::move(f));
  }
  return out;
}

/// Appends the FPR comparisons (and entropy comparisons, when both datasets
/// have entropy statistics) for each pair to `bundle.tests`.
inline void add_pair_tests(AuditBundle& bundle, std::span<const BiasPair> pairs) {
  std::vector<BiasPair> sorted(pairs.begin(), pairs.end());
  for (const auto& f : bias_findings(bundle, sorted)) {
    for (const auto& d : f.detectors) {
      bundle.tests.push_back({"fpr " + f.pair.nonnative + " vs " + f.pair.native + " [" + d.detector + "]",
                              "fisher_exact_two_sided", d.p_value, {f.pair.nonnative, f.pair.native}});
    }
    auto a = bundle.entropy_stats.find(f.pair.nonnative);
    auto b = bundle.entropy_stats.find(f.pair.native);
    if (a != bundle.entropy_stats.end() && b != bundle.entropy_stats.end()) {
      bundle.tests.push_back({"entropy " + f.pair.nonnative + " vs " + f.pair.native, "welch_t_two_sided",
                              welch_ttest(a->second.values, b->second.values).p_value,
                              {f.pair.nonnative, f.pair.native}});
    }
  }
}

inline std::string render_bias_summary(const AuditBundle& bundle, std::span<const BiasPair> pairs) {
  const auto findings = bias_findings(bundle, {pairs.begin(), pairs.end()});
  std::string out = "# Bias audit\n\nRule: ";
  out += kBiasRule;
  out += ".\n";
  char buf[64];
  for (const auto& f : findings) {
    out += "\n## " + f.pair.nonnative + " vs " + f.pair.native + "\n\n";
    out += "| Detector | dFPR (pp) | p (Fisher) |\n|---|---:|---:|\n";
    for (const auto& d : f.detectors) {
      std::snprintf(buf, sizeof buf, "%+.1f", round_half_even(d.delta_fpr * 10.0) / 10.0);
      std::string delta = buf;
      std::snprintf(buf, sizeof buf, "%.3g", d.p_value);
      out += "| " + detail::md_field(d.detector) + " | " + delta + " | " + buf + " |\n";
    }
    out += f.systematic ? "\nsystematic: yes\n" : "\nsystematic: no\n";
  }
  return out;
}

// ---- JSON -----------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json opt_json(std::optional<double> v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline std::optional<double> opt_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace detail

inline nlohmann::ordered_json eval_report_to_json(const EvalReport& rep) {
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : rep.rows) {
    nlohmann::ordered_json j;
    j["dataset"] = r.dataset_name;
    j["n"] = r.n;
    j["acc"] = r.acc;
    j["fpr"] = detail::opt_json(r.fpr);
    j["fnr"] = detail::opt_json(r.fnr);
    j["oov_ratio"] = detail::opt_json(r.oov_ratio);
    j["counts"] = {{"positives", r.counts.positives},
                   {"negatives", r.counts.negatives},
                   {"false_positives", r.counts.false_positives},
                   {"false_negatives", r.counts.false_negatives}};
    rows.push_back(std::move(j));
  }
  return {{"rows", std::move(rows)}};
}

inline EvalReport eval_report_from_json(const nlohmann::json& j) {
  EvalReport rep;
  for (const auto& r : j.at("rows")) {
    EvalRow row;
    row.dataset_name = r.at("dataset").get<std::string>();
    row.n = r.at("n").get<std::size_t>();
    row.acc = r.at("acc").get<double>();
    row.fpr = detail::opt_from(r, "fpr");
    row.fnr = detail::opt_from(r, "fnr");
    row.oov_ratio = detail::opt_from(r, "oov_ratio");
    const auto& c = r.at("counts");
    row.counts.positives = c.at("positives").get<std::size_t>();
    row.counts.negatives = c.at("negatives").get<std::size_t>();
    row.counts.false_positives = c.at("false_positives").get<std::size_t>();
    row.counts.false_negatives = c.at("false_negatives").get<std::size_t>();
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

/// {models, datasets, per_dataset, n_docs, mean}; per_dataset and n_docs
/// follow the order of `datasets`.
inline nlohmann::ordered_json export_heatmap_grid(const CorrelationMatrix& m) {
  nlohmann::ordered_json j;
  j["models"] = m.model_names;
  auto datasets = nlohmann::ordered_json::array();
  auto grids = nlohmann::ordered_json::array();
  auto counts = nlohmann::ordered_json::array();
  for (const auto& [name, grid] : m.per_dataset) {
    datasets.push_back(name);
    grids.push_back(grid);
    auto it = m.n_docs.find(name);
    counts.push_back(it == m.n_docs.end() ? 0 : it->second);
  }
  j["datasets"] = std::move(datasets);
  j["per_dataset"] = std::move(grids);
  j["n_docs"] = std::move(counts);
  j["mean"] = m.mean;
  return j;
}

inline CorrelationMatrix parse_heatmap_grid(const nlohmann::json& j) {
  CorrelationMatrix m;
  m.model_names = j.at("models").get<std::vector<std::string>>();
  const auto datasets = j.at("datasets").get<std::vector<std::string>>();
  const auto grids = j.at("per_dataset").get<std::vector<Matrix>>();
  if (grids.size() != datasets.size()) throw ValidationError("heatmap grid: datasets/per_dataset mismatch");
  std::vector<std::size_t> counts;
  if (j.contains("n_docs")) counts = j.at("n_docs").get<std::vector<std::size_t>>();
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    m.per_dataset.emplace(datasets[i], grids[i]);
    if (i < counts.size()) m.n_docs.emplace(datasets[i], counts[i]);
  }
  m.mean = j.at("mean").get<Matrix>();
  return m;
}

inline nlohmann::ordered_json entropy_stats_to_json(const EntropyStats& s) {
  nlohmann::ordered_json j;
  j["mean"] = s.mean;
  j["std"] = s.std;
  j["n"] = s.n;
  j["values"] = s.values;
  j["doc_ids"] = s.doc_ids;
  j["skipped"] = s.skipped;
  return j;
}

inline EntropyStats entropy_stats_from_json(const nlohmann::json& j) {
  EntropyStats s;
  s.mean = j.at("mean").get<double>();
  s.std = j.at("std").get<double>();
  s.n = j.at("n").get<std::size_t>();
  s.values = j.at("values").get<std::vector<double>>();
  s.doc_ids = j.value("doc_ids", std::vector<std::string>{});
  s.skipped = j.value("skipped", std::vector<std::string>{});
  if (s.n != s.values.size()) throw ValidationError("entropy stats: n does not match values");
  return s;
}

inline nlohmann::ordered_json bundle_to_json(const AuditBundle& b) {
  nlohmann::ordered_json j;
  j["format_version"] = kBundleFormatVersion;
  nlohmann::ordered_json meta;
  meta["seed"] = b.metadata.seed ? nlohmann::ordered_json(*b.metadata.seed) : nlohmann::ordered_json(nullptr);
  meta["rng_algorithm"] = b.metadata.rng_algorithm;
  meta["config_digest"] = b.metadata.config_digest;
  meta["provider_model_id"] = b.metadata.provider_model_id;
  meta["tool_version"] = b.metadata.tool_version;
  meta["input_digests"] = b.metadata.input_digests;
  meta["timestamps"] = b.metadata.timestamps;
  meta["stochastic"] = b.stochastic;
  meta["bias_rule"] = kBiasRule;
  j["metadata"] = std::move(meta);
  nlohmann::ordered_json reports = nlohmann::ordered_json::object();
  for (const auto& [name, rep] : b.eval_reports) reports[name] = eval_report_to_json(rep);
  j["eval_reports"] = std::move(reports);
  nlohmann::ordered_json stats = nlohmann::ordered_json::object();
  for (const auto& [name, s] : b.entropy_stats) stats[name] = entropy_stats_to_json(s);
  j["entropy_stats"] = std::move(stats);
  j["correlations"] = b.correlations ? export_heatmap_grid(*b.correlations) : nlohmann::ordered_json(nullptr);
  auto tests = nlohmann::ordered_json::array();
  for (const auto& t : b.tests) {
    tests.push_back({{"comparison", t.comparison},
                     {"statistic_kind", t.statistic_kind},
                     {"p_value", t.p_value},
                     {"datasets", t.datasets}});
  }
  j["tests"] = std::move(tests);
  return j;
}

inline AuditBundle bundle_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("format_version")) throw CorruptFileError("audit bundle: missing format_version");
  if (j.at("format_version") != kBundleFormatVersion) {
    throw VersionError("audit bundle: unsupported format_version " + j.at("format_version").dump());
  }
  AuditBundle b;
  try {
    const auto& meta = j.at("metadata");
    if (!meta.at("seed").is_null()) b.metadata.seed = meta.at("seed").get<std::uint64_t>();
    b.metadata.rng_algorithm = meta.at("rng_algorithm").get<std::string>();
    b.metadata.config_digest = meta.at("config_digest").get<std::string>();
    b.metadata.provider_model_id = meta.at("provider_model_id").get<std::string>();
    b.metadata.tool_version = meta.at("tool_version").get<std::string>();
    b.metadata.input_digests = meta.at("input_digests").get<std::map<std::string, std::string>>();
    b.metadata.timestamps = meta.at("timestamps").get<std::map<std::string, std::string>>();
    b.stochastic = meta.at("stochastic").get<bool>();
    for (const auto& [name, rep] : j.at("eval_reports").items()) b.eval_reports[name] = eval_report_from_json(rep);
    for (const auto& [name, s] : j.at("entropy_stats").items()) b.entropy_stats[name] = entropy_stats_from_json(s);
    if (!j.at("correlations").is_null()) b.correlations = parse_heatmap_grid(j.at("correlations"));
    for (const auto& t : j.at("tests")) {
      b.tests.push_back({t.at("comparison").get<std::string>(), t.at("statistic_kind").get<std::string>(),
                         t.at("p_value").get<double>(), t.at("datasets").get<std::vector<std::string>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(std::string("audit bundle: ") + e.what());
  }
  validate(b);
  return b;
}

}  // namespace detaudit
