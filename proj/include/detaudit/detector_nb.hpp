#pragma once

// TF-IDF features + multinomial naive Bayes detector of generated text.
//
// idf(t) = ln((1 + N) / (1 + df(t))) + 1, rows are count * idf with L2
// normalization, and the classifier is trained on those weighted rows with
// additive (Laplace) smoothing. Class 0 is "human", class 1 is "generated".

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "detaudit/corpus.hpp"
#include "detaudit/error.hpp"
#include "detaudit/tokenizer.hpp"

namespace detaudit {

inline constexpr int kModelFormatVersion = 1;

/// Sorted token list with a reverse index. Index order is lexicographic, so
/// the same corpus always yields the same assignment.
class Vocabulary {
 public:
  Vocabulary() = default;

  explicit Vocabulary(std::vector<std::string> terms) : terms_(std::move(terms)) {
    std::sort(terms_.begin(), terms_.end());
    terms_.erase(std::unique(terms_.begin(), terms_.end()), terms_.end());
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], i);
  }

  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  bool contains(const std::string& t) const { return index_.contains(t); }

  std::optional<std::size_t> find(const std::string& t) const {
    auto it = index_.find(t);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& term(std::size_t i) const { return terms_.at(i); }
  const std::vector<std::string>& terms() const noexcept { return terms_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.terms_ == b.terms_; }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct SparseEntry {
  std::size_t index;
  double value;

  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Index-sorted sparse row.
using SparseVector = std::vector<SparseEntry>;

inline double l2_norm(const SparseVector& v) {
  double s = 0.0;
  for (const auto& e : v) s += e.value * e.value;
  return std::sqrt(s);
}

struct TfidfFit {
  Vocabulary vocab;
  std::vector<double> idf;
};

namespace detail {

inline std::string feature_form(const std::string& token, bool lower) {
  return lower ? lowercase(token) : token;
}

}  // namespace detail

inline TfidfFit fit_tfidf(std::span<const TokenSequence> docs, bool lower = true) {
  std::map<std::string, std::size_t> df;
  std::size_t non_empty = 0;
  for (const auto& doc : docs) {
    if (!doc.empty()) ++non_empty;
    std::vector<std::string> seen;
    seen.reserve(doc.size());
    for (const auto& t : doc.tokens) seen.push_back(detail::feature_form(t, lower));
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (auto& t : seen) ++df[std::move(t)];
  }
  if (non_empty == 0) throw ValidationError("fit_tfidf: corpus has no tokens");

  std::vector<std::string> terms;
  terms.reserve(df.size());
  for (const auto& [t, _] : df) terms.push_back(t);
  TfidfFit fit{Vocabulary(std::move(terms)), {}};
  fit.idf.reserve(df.size());
  const double n = static_cast<double>(docs.size());
  for (const auto& [t, count] : df) {
    fit.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return fit;
}

/// count * idf for in-vocabulary tokens, L2-normalized. Zero vector (empty)
/// when no token is known.
inline SparseVector vectorize(const Vocabulary& vocab, std::span<const double> idf,
                              const TokenSequence& doc, bool lower = true) {
  std::map<std::size_t, double> counts;
  for (const auto& t : doc.tokens) {
    if (auto i = vocab.find(detail::feature_form(t, lower))) counts[*i] += 1.0;
  }
  SparseVector v;
  v.reserve(counts.size());
  for (const auto& [i, c] : counts) v.push_back({i, c * idf[i]});
  const double norm = l2_norm(v);
  if (norm > 0.0) {
    for (auto& e : v) e.value /= norm;
  }
  return v;
}

struct NbParams {
  std::array<double, 2> class_log_prior{};
  std::array<std::vector<double>, 2> feature_log_prob;
};

inline std::size_t class_index(Label l) {
  switch (l) {
    case Label::human: return 0;
    case Label::generated: return 1;
    case Label::unknown: break;
  }
  throw ValidationError("naive Bayes: training label must be human or generated");
}

inline NbParams train_nb(std::span<const SparseVector> vectors, std::span<const Label> labels,
                         std::size_t vocab_size, double alpha = 1.0) {
  if (!(alpha > 0.0)) throw ValidationError("train_nb: alpha must be > 0");
  if (vectors.size() != labels.size()) throw ValidationError("train_nb: vectors/labels size mismatch");
  if (vocab_size == 0) throw ValidationError("train_nb: empty vocabulary");

  std::array<std::size_t, 2> class_count{};
  std::array<std::vector<double>, 2> feature_sum{std::vector<double>(vocab_size, 0.0),
                                                 std::vector<double>(vocab_size, 0.0)};
  for (std::size_t d = 0; d < vectors.size(); ++d) {
    const auto c = class_index(labels[d]);
    ++class_count[c];
    for (const auto& e : vectors[d]) feature_sum[c].at(e.index) += e.value;
  }
  if (class_count[0] == 0 || class_count[1] == 0) {
    throw ValidationError("train_nb: both classes (human, generated) must be present");
  }

  NbParams p;
  const double n = static_cast<double>(vectors.size());
  for (std::size_t c = 0; c < 2; ++c) {
    p.class_log_prior[c] = std::log(static_cast<double>(class_count[c]) / n);
    double total = alpha * static_cast<double>(vocab_size);
    for (double s : feature_sum[c]) total += s;
    const double log_total = std::log(total);
    auto& row = p.feature_log_prob[c];
    row.resize(vocab_size);
    for (std::size_t t = 0; t < vocab_size; ++t) row[t] = std::log(feature_sum[c][t] + alpha) - log_total;
  }
  return p;
}

struct TfidfNbModel {
  Vocabulary vocab;
  std::vector<double> idf;
  std::array<double, 2> class_log_prior{};
  std::array<std::vector<double>, 2> feature_log_prob;
  double alpha = 1.0;
  std::string tokenizer_id = kTokenizerId;
  bool lowercase = true;
};

/// Fits the vectorizer and the classifier on tokenized training documents.
inline TfidfNbModel train_detector(std::span<const TokenSequence> docs, std::span<const Label> labels,
                                   double alpha = 1.0, bool lower = true) {
  if (!(alpha > 0.0)) throw ValidationError("train_nb: alpha must be > 0");
  auto fit = fit_tfidf(docs, lower);
  std::vector<SparseVector> rows;
  rows.reserve(docs.size());
  for (const auto& d : docs) rows.push_back(vectorize(fit.vocab, fit.idf, d, lower));
  auto params = train_nb(rows, labels, fit.vocab.size(), alpha);
  TfidfNbModel m;
  m.vocab = std::move(fit.vocab);
  m.idf = std::move(fit.idf);
  m.class_log_prior = params.class_log_prior;
  m.feature_log_prob = std::move(params.feature_log_prob);
  m.alpha = alpha;
  m.lowercase = lower;
  return m;
}

inline TfidfNbModel train_detector(const Dataset& ds, double alpha = 1.0, bool lower = true) {
  std::vector<TokenSequence> docs;
  std::vector<Label> labels;
  docs.reserve(ds.size());
  labels.reserve(ds.size());
  for (const auto& d : ds.documents) {
    docs.push_back(tokenize(d.text));
    labels.push_back(d.label);
  }
  return train_detector(docs, labels, alpha, lower);
}

inline SparseVector vectorize(const TfidfNbModel& m, const TokenSequence& doc) {
  return vectorize(m.vocab, m.idf, doc, m.lowercase);
}

/// Class posteriors {P(human), P(generated)} via log-sum-exp.
inline std::array<double, 2> predict_proba_both(const TfidfNbModel& m, const TokenSequence& doc) {
  const auto v = vectorize(m, doc);
  std::array<double, 2> jll = m.class_log_prior;
  for (std::size_t c = 0; c < 2; ++c) {
    for (const auto& e : v) jll[c] += e.value * m.feature_log_prob[c][e.index];
  }
  const double mx = std::max(jll[0], jll[1]);
  const double lse = mx + std::log(std::exp(jll[0] - mx) + std::exp(jll[1] - mx));
  return {std::exp(jll[0] - lse), std::exp(jll[1] - lse)};
}

/// Probability that `doc` is generated.
inline double predict_proba(const TfidfNbModel& m, const TokenSequence& doc) {
  return predict_proba_both(m, doc)[1];
}

inline double predict_proba(const TfidfNbModel& m, std::string_view text) {
  return predict_proba(m, tokenize(text));
}

inline nlohmann::ordered_json model_to_json(const TfidfNbModel& m) {
  nlohmann::ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["tokenizer_id"] = m.tokenizer_id;
  j["lowercase"] = m.lowercase;
  j["alpha"] = m.alpha;
  j["classes"] = {"human", "generated"};
  j["vocab"] = m.vocab.terms();
  j["idf"] = m.idf;
  j["class_log_prior"] = m.class_log_prior;
  j["feature_log_prob"] = {m.feature_log_prob[0], m.feature_log_prob[1]};
  return j;
}

inline TfidfNbModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("format_version")) {
    throw CorruptFileError("model: missing format_version");
  }
  if (!j["format_version"].is_number_integer()) throw CorruptFileError("model: bad format_version");
  const auto version = j["format_version"].get<int>();
  if (version != kModelFormatVersion) {
    throw VersionError("model: unsupported format_version " + std::to_string(version) +
                       " (this build reads " + std::to_string(kModelFormatVersion) + ")");
  }
  TfidfNbModel m;
  try {
    m.tokenizer_id = j.at("tokenizer_id").get<std::string>();
    m.lowercase = j.value("lowercase", true);
    m.alpha = j.at("alpha").get<double>();
    m.vocab = Vocabulary(j.at("vocab").get<std::vector<std::string>>());
    m.idf = j.at("idf").get<std::vector<double>>();
    m.class_log_prior = j.at("class_log_prior").get<std::array<double, 2>>();
    m.feature_log_prob = j.at("feature_log_prob").get<std::array<std::vector<double>, 2>>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(std::string("model: ") + e.what());
  }
  const auto v = m.vocab.size();
  if (v == 0 || m.vocab.size() != j.at("vocab").size() || m.idf.size() != v ||
      m.feature_log_prob[0].size() != v || m.feature_log_prob[1].size() != v) {
    throw CorruptFileError("model: inconsistent dimensions");
  }
  if (m.tokenizer_id != kTokenizerId) {
    throw VersionError("model: tokenizer '" + m.tokenizer_id + "' is not supported");
  }
  return m;
}

inline std::string serialize_model(const TfidfNbModel& m) { return model_to_json(m).dump() + "\n"; }

inline void save_model(const TfidfNbModel& m, const std::filesystem::path& path) {
  detail::write_file(path, serialize_model(m));
}

inline TfidfNbModel load_model(const std::filesystem::path& path) {
  const auto content = detail::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(content);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError("model '" + path.string() + "': " + e.what());
  }
  return model_from_json(j);
}

}  // namespace detaudit
