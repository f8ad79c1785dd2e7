#pragma once

// Windowed per-token entropy of documents under a reference language model.
//
// The entropy of a document truncated to M tokens is the mean negative
// log-likelihood of tokens skip+1..M (1-based), in nats. The first `skip`
// tokens only provide context. Log-probabilities come from a provider: the
// JSONL cache written by the scoring service, or the in-process uniform
// dummy used for calibration.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "detaudit/corpus.hpp"
#include "detaudit/error.hpp"
#include "detaudit/tokenizer.hpp"

namespace detaudit {

inline constexpr std::size_t kDefaultSkip = 50;
inline constexpr std::size_t kDefaultMaxTokens = 512;

struct LogProbRecord {
  std::string doc_id;
  std::string model_id;
  std::vector<std::string> tokens;
  /// Natural-log P(token_i | tokens_<i); entry 0 has no context and is empty.
  std::vector<std::optional<double>> logprobs;

  std::size_t size() const noexcept { return tokens.size(); }

  friend bool operator==(const LogProbRecord&, const LogProbRecord&) = default;
};

inline void validate(const LogProbRecord& rec) {
  if (rec.tokens.size() != rec.logprobs.size()) {
    throw ValidationError("logprob record '" + rec.doc_id + "': tokens/logprobs length mismatch");
  }
  for (const auto& lp : rec.logprobs) {
    if (lp && !(*lp <= 0.0)) {
      throw ValidationError("logprob record '" + rec.doc_id + "': log-probability above 0 or NaN");
    }
  }
}

/// -(1/(M-skip)) * sum of log-probabilities over tokens skip..M-1 (0-based),
/// M = min(|rec|, max_tokens). Throws TooShortError when M <= skip.
inline double document_entropy(const LogProbRecord& rec, std::size_t skip = kDefaultSkip,
                               std::size_t max_tokens = kDefaultMaxTokens) {
  validate(rec);
  const auto m = std::min(rec.size(), max_tokens);
  if (m <= skip) {
    throw TooShortError("document '" + rec.doc_id + "' has " + std::to_string(m) +
                        " tokens after truncation; at least " + std::to_string(skip + 1) +
                        " are needed");
  }
  double sum = 0.0;
  for (std::size_t i = skip; i < m; ++i) {
    if (!rec.logprobs[i]) {
      throw ValidationError("document '" + rec.doc_id + "': missing log-probability at token " +
                            std::to_string(i));
    }
    sum += *rec.logprobs[i];
  }
  return -sum / static_cast<double>(m - skip);
}

inline double perplexity(double entropy) { return std::exp(entropy); }

struct EntropyStats {
  double mean = 0.0;
  /// Population standard deviation.
  double std = 0.0;
  std::size_t n = 0;
  std::vector<double> values;
  /// Ids of the scorable documents, parallel to `values`.
  std::vector<std::string> doc_ids;
  /// Documents rejected as too short.
  std::vector<std::string> skipped;

  friend bool operator==(const EntropyStats&, const EntropyStats&) = default;
};

inline std::pair<double, double> mean_and_population_std(std::span<const double> v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

inline EntropyStats dataset_entropy(std::span<const LogProbRecord> records,
                                    std::size_t skip = kDefaultSkip,
                                    std::size_t max_tokens = kDefaultMaxTokens) {
  EntropyStats s;
  for (const auto& r : records) {
    try {
      s.values.push_back(document_entropy(r, skip, max_tokens));
      s.doc_ids.push_back(r.doc_id);
    } catch (const TooShortError&) {
      s.skipped.push_back(r.doc_id);
    }
  }
  if (s.values.empty()) throw ValidationError("dataset_entropy: no scorable documents");
  s.n = s.values.size();
  std::tie(s.mean, s.std) = mean_and_population_std(s.values);
  return s;
}

struct GaussianFit {
  double mu;
  double sigma;
};

/// Maximum-likelihood normal fit (mean, population std).
inline GaussianFit fit_gaussian(std::span<const double> values) {
  if (values.size() < 2) throw ValidationError("fit_gaussian: need at least 2 values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) throw ValidationError("fit_gaussian: all values are equal");
  const auto [mu, sigma] = mean_and_population_std(values);
  return {mu, sigma};
}

inline double gaussian_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

struct DensityPoint {
  double x;
  double density;
};

struct DensityGrid {
  static constexpr const char* kMethod = "gaussian-kde/silverman";
  double bandwidth = 0.0;
  std::vector<DensityPoint> points;
};

namespace detail {

// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  return sorted[i] + (pos - static_cast<double>(i)) * (sorted[i + 1] - sorted[i]);
}

}  // namespace detail

/// Silverman's rule of thumb: 0.9 * min(sd, IQR/1.34) * n^(-1/5).
inline double silverman_bandwidth(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double mean = 0.0;
  for (double x : sorted) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : sorted) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr = detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(n, -0.2);
}

/// Gaussian KDE sampled on a uniform grid over [min - 3h, max + 3h].
inline DensityGrid density_export(std::span<const double> values, std::size_t grid_points = 512) {
  if (values.size() < 2) throw ValidationError("density_export: need at least 2 values");
  if (grid_points < 2) throw ValidationError("density_export: need at least 2 grid points");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) throw ValidationError("density_export: all values are equal");

  DensityGrid g;
  g.bandwidth = silverman_bandwidth(values);
  const double a = *lo - 3.0 * g.bandwidth;
  const double b = *hi + 3.0 * g.bandwidth;
  const double step = (b - a) / static_cast<double>(grid_points - 1);
  const double norm = 1.0 / static_cast<double>(values.size());
  g.points.reserve(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = i + 1 == grid_points ? b : a + step * static_cast<double>(i);
    double d = 0.0;
    for (double v : values) d += gaussian_pdf(x, v, g.bandwidth);
    g.points.push_back({x, d * norm});
  }
  return g;
}

namespace detail {

inline std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Rgb {
  int r, g, b;
};

inline constexpr Rgb kContextColor{160, 160, 160};
inline constexpr Rgb kLowColor{255, 255, 255};
inline constexpr Rgb kHighColor{40, 160, 80};

inline Rgb shade(double t) {
  auto mix = [t](int lo, int hi) {
    return static_cast<int>(std::lround(static_cast<double>(lo) + t * static_cast<double>(hi - lo)));
  };
  return {mix(kLowColor.r, kHighColor.r), mix(kLowColor.g, kHighColor.g),
          mix(kLowColor.b, kHighColor.b)};
}

}  // namespace detail

/// XHTML page colouring each scored token by its log-probability (darker
/// means more likely). The first `skip` tokens are grey context.
inline std::string token_heatmap(const LogProbRecord& rec, std::size_t skip = kDefaultSkip) {
  validate(rec);
  if (rec.tokens.empty()) throw ValidationError("token_heatmap: empty record");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = skip; i < rec.size(); ++i) {
    if (rec.logprobs[i]) {
      lo = std::min(lo, *rec.logprobs[i]);
      hi = std::max(hi, *rec.logprobs[i]);
    }
  }

  std::string out;
  out += "<!DOCTYPE html>\n<html xmlns=\"http://www.w3.org/1999/xhtml\">\n<head>\n";
  out += "<meta charset=\"utf-8\"/>\n<title>" + detail::html_escape(rec.doc_id) + "</title>\n";
  out += "<style>span.t{white-space:pre-wrap;padding:0 1px;margin:0 1px;}</style>\n";
  out += "</head>\n<body>\n<p data-model=\"" + detail::html_escape(rec.model_id) + "\">";
  char buf[96];
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const bool scored = i >= skip && rec.logprobs[i].has_value();
    detail::Rgb c = detail::kContextColor;
    if (scored) {
      const double t = hi > lo ? (*rec.logprobs[i] - lo) / (hi - lo) : 1.0;
      c = detail::shade(t);
    }
    std::snprintf(buf, sizeof buf, "<span class=\"%s\" style=\"background-color:rgb(%d,%d,%d)\"",
                  scored ? "t" : "t ctx", c.r, c.g, c.b);
    out += buf;
    if (rec.logprobs[i]) {
      std::snprintf(buf, sizeof buf, " title=\"%.6g\"", *rec.logprobs[i]);
      out += buf;
    }
    out += '>';
    out += detail::html_escape(rec.tokens[i]);
    out += "</span>";
  }
  out += "</p>\n</body>\n</html>\n";
  return out;
}

// ---- providers -------------------------------------------------------------

/// Source of per-token log-probabilities for a document.
class LogProbProvider {
 public:
  virtual ~LogProbProvider() = default;
  virtual std::string model_id() const = 0;
  virtual LogProbRecord score(const std::string& doc_id, std::string_view text,
                              std::size_t max_tokens = kDefaultMaxTokens) const = 0;
};

/// Assigns every token probability 1/V; the entropy of any scorable
/// document is exactly ln V.
class UniformProvider final : public LogProbProvider {
 public:
  explicit UniformProvider(std::size_t vocab_size) : vocab_size_(vocab_size) {
    if (vocab_size == 0) throw ValidationError("UniformProvider: vocabulary size must be positive");
  }

  std::string model_id() const override { return "uniform-" + std::to_string(vocab_size_); }

  LogProbRecord score(const std::string& doc_id, std::string_view text,
                      std::size_t max_tokens = kDefaultMaxTokens) const override {
    LogProbRecord rec{doc_id, model_id(), {}, {}};
    auto seq = truncate(tokenize(text), std::max<std::size_t>(max_tokens, 1));
    rec.tokens = std::move(seq.tokens);
    const double lp = -std::log(static_cast<double>(vocab_size_));
    rec.logprobs.assign(rec.tokens.size(), lp);
    if (!rec.logprobs.empty()) rec.logprobs[0].reset();
    return rec;
  }

 private:
  std::size_t vocab_size_;
};

inline LogProbRecord logprob_record_from_json(const nlohmann::json& j) {
  LogProbRecord r;
  r.doc_id = j.at("doc_id").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  r.tokens = j.at("tokens").get<std::vector<std::string>>();
  for (const auto& v : j.at("logprobs")) {
    if (v.is_null()) {
      r.logprobs.emplace_back();
    } else {
      r.logprobs.emplace_back(v.get<double>());
    }
  }
  return r;
}

inline nlohmann::ordered_json logprob_record_to_json(const LogProbRecord& r) {
  nlohmann::ordered_json j;
  j["doc_id"] = r.doc_id;
  j["model_id"] = r.model_id;
  j["tokens"] = r.tokens;
  auto lps = nlohmann::ordered_json::array();
  for (const auto& lp : r.logprobs) {
    if (lp) {
      lps.push_back(*lp);
    } else {
      lps.push_back(nullptr);
    }
  }
  j["logprobs"] = std::move(lps);
  return j;
}

inline std::vector<LogProbRecord> parse_logprob_cache(std::string_view content) {
  std::vector<LogProbRecord> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    ++lineno;
    const auto line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      auto rec = logprob_record_from_json(nlohmann::json::parse(line));
      validate(rec);
      out.push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("logprob cache: ") + e.what(), lineno);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

inline std::vector<LogProbRecord> load_logprob_cache(const std::filesystem::path& path) {
  return parse_logprob_cache(detail::read_file(path));
}

inline std::string logprob_cache_to_jsonl(std::span<const LogProbRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += logprob_record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

/// Serves records from a cache file by document id.
class CacheProvider final : public LogProbProvider {
 public:
  explicit CacheProvider(std::vector<LogProbRecord> records) {
    for (auto& r : records) {
      if (model_id_.empty()) model_id_ = r.model_id;
      const auto id = r.doc_id;
      if (!by_id_.emplace(id, std::move(r)).second) {
        throw ValidationError("logprob cache: duplicate doc_id '" + id + "'");
      }
    }
  }

  std::string model_id() const override { return model_id_; }

  LogProbRecord score(const std::string& doc_id, std::string_view,
                      std::size_t max_tokens = kDefaultMaxTokens) const override {
    auto it = by_id_.find(doc_id);
    if (it == by_id_.end()) throw ValidationError("logprob cache: no record for '" + doc_id + "'");
    auto rec = it->second;
    if (rec.size() > max_tokens) {
      rec.tokens.resize(max_tokens);
      rec.logprobs.resize(max_tokens);
    }
    return rec;
  }

  bool contains(const std::string& doc_id) const { return by_id_.contains(doc_id); }

 private:
  std::string model_id_;
  std::unordered_map<std::string, LogProbRecord> by_id_;
};

}  // namespace detaudit
