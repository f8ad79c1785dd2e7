#pragma once

// Glue between modules: scoring corpora with a detector, evaluating them,
// and augmenting whole datasets.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "detaudit/augment.hpp"
#include "detaudit/corpus.hpp"
#include "detaudit/detector_nb.hpp"
#include "detaudit/evalstats.hpp"
#include "detaudit/report.hpp"
#include "detaudit/rng.hpp"
#include "detaudit/tokenizer.hpp"

namespace detaudit {

/// P(generated) per document id.
inline std::map<std::string, double> score_dataset(const TfidfNbModel& model, const Dataset& ds) {
  std::map<std::string, double> out;
  for (const auto& d : ds.documents) out.emplace(d.id, predict_proba(model, tokenize(d.text)));
  return out;
}

/// Confusion metrics of `model` on `ds`, plus the pooled out-of-vocabulary
/// token ratio (percent). Documents labelled unknown are not allowed.
inline EvalRow evaluate_detector(const TfidfNbModel& model, const Dataset& ds,
                                 double threshold = kDefaultThreshold) {
  std::vector<double> scores;
  std::vector<Label> labels;
  std::size_t tokens = 0;
  std::size_t oov = 0;
  for (const auto& d : ds.documents) {
    const auto seq = tokenize(d.text);
    tokens += seq.size();
    oov += oov_count(seq, model.vocab, model.lowercase);
    scores.push_back(predict_proba(model, seq));
    labels.push_back(d.label);
  }
  const auto metrics = confusion_metrics(scores, labels, threshold);
  std::optional<double> oov_ratio;
  if (tokens > 0) oov_ratio = 100.0 * static_cast<double>(oov) / static_cast<double>(tokens);
  return make_eval_row(ds.name, metrics, oov_ratio);
}

/// Applies RDA to every document. Document i uses derive_seed(seed, i).
inline Dataset augment_dataset(const Dataset& ds, const RdaConfig& cfg, std::uint64_t seed) {
  Dataset out = ds;
  for (std::size_t i = 0; i < out.documents.size(); ++i) {
    out.documents[i].text = rda_augment(ds.documents[i].text, cfg, derive_seed(seed, i));
  }
  return out;
}

}  // namespace detaudit
