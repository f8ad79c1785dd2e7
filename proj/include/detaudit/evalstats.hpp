#pragma once

// Detector evaluation and the statistics used to audit detectors: confusion
// metrics, sentence-probability pooling, Welch's t-test, Fisher's exact test
// and in-class Pearson correlation between detector outputs and entropy.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "detaudit/corpus.hpp"
#include "detaudit/error.hpp"

namespace detaudit {

inline constexpr double kDefaultThreshold = 0.5;

/// Counts behind a confusion table; the positive class is "generated".
struct ConfusionCounts {
  std::size_t positives = 0;  // generated documents
  std::size_t negatives = 0;  // human documents
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;

  std::size_t total() const noexcept { return positives + negatives; }
  std::size_t correct() const noexcept { return total() - false_positives - false_negatives; }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Percentages. FPR is absent without human documents, FNR without
/// generated ones.
struct ConfusionMetrics {
  double acc = 0.0;
  std::optional<double> fpr;
  std::optional<double> fnr;
  ConfusionCounts counts;
};

inline ConfusionMetrics metrics_from_counts(const ConfusionCounts& c) {
  if (c.total() == 0) throw ValidationError("confusion metrics: no documents");
  ConfusionMetrics m;
  m.counts = c;
  m.acc = 100.0 * static_cast<double>(c.correct()) / static_cast<double>(c.total());
  if (c.negatives > 0) {
    m.fpr = 100.0 * static_cast<double>(c.false_positives) / static_cast<double>(c.negatives);
  }
  if (c.positives > 0) {
    m.fnr = 100.0 * static_cast<double>(c.false_negatives) / static_cast<double>(c.positives);
  }
  return m;
}

/// A document is predicted generated iff its score >= threshold.
inline ConfusionMetrics confusion_metrics(std::span<const double> scores, std::span<const Label> labels,
                                          double threshold = kDefaultThreshold) {
  if (scores.empty()) throw ValidationError("confusion_metrics: empty input");
  if (scores.size() != labels.size()) throw ValidationError("confusion_metrics: size mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool flagged = scores[i] >= threshold;
    switch (labels[i]) {
      case Label::generated:
        ++c.positives;
        if (!flagged) ++c.false_negatives;
        break;
      case Label::human:
        ++c.negatives;
        if (flagged) ++c.false_positives;
        break;
      case Label::unknown:
        throw ValidationError("confusion_metrics: label 'unknown' cannot be scored");
    }
  }
  return metrics_from_counts(c);
}

/// Document score from per-sentence probabilities, each sentence weighted
/// equally.
inline double aggregate_sentence_probs(std::span<const double> probs) {
  if (probs.empty()) throw ValidationError("aggregate_sentence_probs: empty input");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("aggregate_sentence_probs: probability outside [0, 1]");
    sum += p;
  }
  return sum / static_cast<double>(probs.size());
}

struct TTestResult {
  double statistic;
  double df;
  double p_value;
};

/// Two-sided Welch's unequal-variance t-test.
inline TTestResult welch_ttest(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ValidationError("welch_ttest: each sample needs >= 2 values");
  auto moments = [](std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / static_cast<double>(v.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double sa = va / static_cast<double>(a.size());
  const double sb = vb / static_cast<double>(b.size());
  const double se2 = sa + sb;
  if (!(se2 > 0.0)) throw ValidationError("welch_ttest: both samples have zero variance");
  const double t = (ma - mb) / std::sqrt(se2);
  const double df = se2 * se2 /
                    (sa * sa / static_cast<double>(a.size() - 1) + sb * sb / static_cast<double>(b.size() - 1));
  if (t == 0.0) return {t, df, 1.0};
  const boost::math::students_t dist(df);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
  return {t, df, std::min(1.0, p)};
}

namespace detail {

inline double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace detail

/// Two-sided Fisher exact test on [[x1, n1 - x1], [x2, n2 - x2]]: the total
/// probability of tables with the same margins that are no more likely than
/// the observed one.
inline double fisher_exact(std::uint64_t x1, std::uint64_t n1, std::uint64_t x2, std::uint64_t n2) {
  if (n1 == 0 || n2 == 0) throw ValidationError("fisher_exact: group sizes must be positive");
  if (x1 > n1 || x2 > n2) throw ValidationError("fisher_exact: count exceeds group size");
  const std::uint64_t n = n1 + n2;
  const std::uint64_t k = x1 + x2;
  const std::uint64_t lo = k > n2 ? k - n2 : 0;
  const std::uint64_t hi = std::min(k, n1);
  const double log_denom = detail::log_choose(n, n1);
  auto log_pmf = [&](std::uint64_t x) {
    return detail::log_choose(k, x) + detail::log_choose(n - k, n1 - x) - log_denom;
  };
  const double observed = log_pmf(x1);
  // Relative slack so that tables tied with the observed one count as tied.
  const double cutoff = observed + 1e-7;
  double tail = 0.0;
  double total = 0.0;
  for (std::uint64_t x = lo; x <= hi; ++x) {
    const double lp = log_pmf(x);
    const double pr = std::exp(lp);
    total += pr;
    if (lp <= cutoff) tail += pr;
  }
  return std::min(1.0, tail / total);
}

/// Sample Pearson correlation coefficient.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("pearson: length mismatch");
  if (x.size() < 2) throw ValidationError("pearson: need at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("pearson: correlation undefined for a constant vector");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

using Matrix = std::vector<std::vector<double>>;

struct CorrelationMatrix {
  /// Column names; detector names in sorted order, then "entropy" if given.
  std::vector<std::string> model_names;
  std::map<std::string, Matrix> per_dataset;
  /// Documents that entered each dataset's matrix.
  std::map<std::string, std::size_t> n_docs;
  Matrix mean;

  friend bool operator==(const CorrelationMatrix&, const CorrelationMatrix&) = default;
};

/// Documents of one dataset, for grouping correlation inputs.
struct DatasetMembers {
  std::string name;
  std::vector<std::string> doc_ids;
  bool mixed_status = false;
};

inline constexpr const char* kEntropyColumn = "entropy";

/// Per-dataset Pearson matrices between detector outputs (and entropy, when
/// `entropies` is non-empty), plus their entrywise mean. Mixed-status
/// datasets are skipped; a dataset whose documents carry more than one label
/// is rejected. Documents lacking a value in any column are left out.
inline CorrelationMatrix inclass_correlation(
    const std::map<std::string, std::map<std::string, double>>& outputs,
    const std::map<std::string, double>& entropies, const std::map<std::string, Label>& labels,
    std::span<const DatasetMembers> datasets) {
  CorrelationMatrix cm;
  std::vector<const std::map<std::string, double>*> columns;
  for (const auto& [name, scores] : outputs) {
    cm.model_names.push_back(name);
    columns.push_back(&scores);
  }
  if (!entropies.empty()) {
    cm.model_names.emplace_back(kEntropyColumn);
    columns.push_back(&entropies);
  }
  const auto k = columns.size();
  if (k < 2) throw ValidationError("inclass_correlation: need at least two columns");

  for (const auto& ds : datasets) {
    if (ds.mixed_status) continue;
    std::optional<Label> cls;
    std::vector<std::vector<double>> data(k);
    std::size_t used = 0;
    for (const auto& id : ds.doc_ids) {
      auto lab = labels.find(id);
      if (lab == labels.end()) throw ValidationError("inclass_correlation: no label for '" + id + "'");
      if (lab->second == Label::unknown || (cls && *cls != lab->second)) {
        throw ValidationError("inclass_correlation: dataset '" + ds.name + "' is not single-class");
      }
      cls = lab->second;
      std::vector<double> row(k);
      bool complete = true;
      for (std::size_t c = 0; c < k && complete; ++c) {
        auto it = columns[c]->find(id);
        if (it == columns[c]->end()) {
          complete = false;
        } else {
          row[c] = it->second;
        }
      }
      if (!complete) continue;
      for (std::size_t c = 0; c < k; ++c) data[c].push_back(row[c]);
      ++used;
    }
    Matrix m(k, std::vector<double>(k, 1.0));
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        try {
          m[i][j] = m[j][i] = pearson(data[i], data[j]);
        } catch (const ValidationError& e) {
          throw ValidationError("inclass_correlation: dataset '" + ds.name + "', columns '" +
                                cm.model_names[i] + "'/'" + cm.model_names[j] + "': " + e.what());
        }
      }
    }
    cm.per_dataset.emplace(ds.name, std::move(m));
    cm.n_docs.emplace(ds.name, used);
  }
  if (cm.per_dataset.empty()) throw ValidationError("inclass_correlation: no eligible datasets");

  cm.mean.assign(k, std::vector<double>(k, 0.0));
  for (const auto& [_, m] : cm.per_dataset) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) cm.mean[i][j] += m[i][j];
    }
  }
  const double d = static_cast<double>(cm.per_dataset.size());
  for (auto& row : cm.mean) {
    for (auto& v : row) v /= d;
  }
  for (std::size_t i = 0; i < k; ++i) cm.mean[i][i] = 1.0;
  return cm;
}

}  // namespace detaudit
