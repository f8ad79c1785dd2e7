#pragma once

// detaudit command-line front end.
//
//   detaudit train      --corpus PATH --out MODEL [--alpha 1.0] [--lowercase]
//   detaudit eval       --model M --corpus PATH... [--threshold 0.5] --report OUT
//   detaudit entropy    --logprobs CACHE.jsonl [--skip 50] [--max-tokens 512] --out STATS
//   detaudit augment    --in PATH --out PATH --seed N [--inflation 0.02]
//   detaudit correlate  --scores DIR --logprobs CACHE --labels PATH... --out JSON
//   detaudit audit      --pairs FILE --bundle OUT --eval NAME=REPORT...
//   detaudit synth      --out-dir DIR [--seed N] [--shift 0.0]
//
// Exit codes: 0 success, 1 validation, 2 I/O, 3 internal.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "detaudit/augment.hpp"
#include "detaudit/corpus.hpp"
#include "detaudit/detector_nb.hpp"
#include "detaudit/entropy.hpp"
#include "detaudit/evalstats.hpp"
#include "detaudit/pipeline.hpp"
#include "detaudit/report.hpp"
#include "detaudit/synth.hpp"

#ifndef DETAUDIT_VERSION
#define DETAUDIT_VERSION "0.0.0"
#endif

namespace detaudit::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kValidation = 1, kIo = 2, kInternal = 3 };

inline constexpr std::uint64_t kDefaultSeed = 42;

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  std::ostringstream ss;
  for (unsigned int i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return ss.str();
}

/// Digest of a file, or of a directory's sorted regular files.
inline std::string digest_path(const fs::path& p) {
  if (fs::is_directory(p)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) acc += f.filename().string() + ":" + sha256_hex(detail::read_file(f)) + "\n";
    return sha256_hex(acc);
  }
  return sha256_hex(detail::read_file(p));
}

/// Provenance block embedded in every output.
class Provenance {
 public:
  explicit Provenance(std::string command) : command_(std::move(command)) {}

  void input(const fs::path& p) { inputs_[p.filename().string()] = digest_path(p); }
  void seed(std::uint64_t s) { seed_ = s; }
  void config(const std::string& key, ojson value) { config_[key] = std::move(value); }

  const std::map<std::string, std::string>& inputs() const { return inputs_; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  std::string config_digest() const { return sha256_hex(config_.dump()); }

  ojson json() const {
    ojson j;
    j["tool"] = "detaudit";
    j["tool_version"] = DETAUDIT_VERSION;
    j["command"] = command_;
    j["seed"] = seed_ ? ojson(*seed_) : ojson(nullptr);
    if (seed_) j["rng_algorithm"] = Rng::kAlgorithm;
    j["config"] = config_;
    j["input_digests"] = inputs_;
    return j;
  }

 private:
  std::string command_;
  std::optional<std::uint64_t> seed_;
  std::map<std::string, std::string> inputs_;
  ojson config_ = ojson::object();
};

inline void write_json(const fs::path& path, const ojson& j) { detail::write_file(path, j.dump(2) + "\n"); }

inline nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(detail::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline std::map<std::string, std::string> reproducible_timestamps() {
  std::map<std::string, std::string> ts;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) ts["source_date_epoch"] = epoch;
  return ts;
}

inline Dataset load_any_corpus(const fs::path& path, bool mixed = false) {
  const auto format = fs::is_directory(path) ? CorpusFormat::dir_of_txt : CorpusFormat::jsonl;
  return load_corpus(path, format, {std::nullopt, mixed});
}

// ---- commands -------------------------------------------------------------------

struct TrainArgs {
  std::string corpus, out, summary;
  double alpha = 1.0;
  bool lowercase = true;
};

inline int cmd_train(const TrainArgs& a, std::ostream& out) {
  if (!(a.alpha > 0.0)) throw ValidationError("--alpha must be > 0");
  Provenance prov("train");
  prov.input(a.corpus);
  prov.config("alpha", a.alpha);
  prov.config("lowercase", a.lowercase);
  const auto ds = load_any_corpus(a.corpus);
  const auto model = train_detector(ds, a.alpha, a.lowercase);

  auto mj = model_to_json(model);
  mj["provenance"] = prov.json();
  detail::write_file(a.out, mj.dump() + "\n");

  ojson summary;
  summary["dataset"] = ds.name;
  summary["documents"] = ds.size();
  summary["human"] = ds.count(Label::human);
  summary["generated"] = ds.count(Label::generated);
  summary["vocab_size"] = model.vocab.size();
  summary["alpha"] = a.alpha;
  summary["lowercase"] = a.lowercase;
  summary["provenance"] = prov.json();
  if (a.summary.empty()) {
    out << summary.dump(2) << "\n";
  } else {
    write_json(a.summary, summary);
  }
  return kOk;
}

struct EvalArgs {
  std::string model, report, table, scores_out, detector = "nb";
  std::vector<std::string> corpora;
  double threshold = kDefaultThreshold;
};

inline int cmd_eval(const EvalArgs& a) {
  if (!(a.threshold >= 0.0 && a.threshold <= 1.0)) throw ValidationError("--threshold must lie in [0, 1]");
  Provenance prov("eval");
  prov.input(a.model);
  for (const auto& c : a.corpora) prov.input(c);
  prov.config("threshold", a.threshold);
  prov.config("detector", a.detector);
  const auto model = load_model(a.model);

  EvalReport report;
  std::string scores;
  for (const auto& path : a.corpora) {
    const auto ds = load_any_corpus(path);
    report.rows.push_back(evaluate_detector(model, ds, a.threshold));
    if (!a.scores_out.empty()) {
      for (const auto& [id, s] : score_dataset(model, ds)) {
        scores += ojson{{"doc_id", id}, {"dataset", ds.name}, {"score", s}}.dump() + "\n";
      }
    }
  }
  auto j = eval_report_to_json(report);
  ojson doc;
  doc["detector"] = a.detector;
  doc["threshold"] = a.threshold;
  doc["rows"] = j["rows"];
  doc["provenance"] = prov.json();
  write_json(a.report, doc);
  if (!a.table.empty()) {
    const auto fmt = fs::path(a.table).extension() == ".csv" ? TableFormat::csv : TableFormat::markdown;
    detail::write_file(a.table, render_eval_table(report, fmt));
  }
  if (!a.scores_out.empty()) detail::write_file(a.scores_out, scores);
  return kOk;
}

struct EntropyArgs {
  std::string logprobs, out, corpus, name, heatmap_dir;
  std::size_t skip = kDefaultSkip;
  std::size_t max_tokens = kDefaultMaxTokens;
  std::size_t grid_points = 512;
};

inline int cmd_entropy(const EntropyArgs& a) {
  if (a.max_tokens == 0) throw ValidationError("--max-tokens must be positive");
  Provenance prov("entropy");
  prov.input(a.logprobs);
  prov.config("skip", a.skip);
  prov.config("max_tokens", a.max_tokens);
  prov.config("grid_points", a.grid_points);
  auto records = load_logprob_cache(a.logprobs);
  std::string name = a.name.empty() ? fs::path(a.logprobs).stem().string() : a.name;
  if (!a.corpus.empty()) {
    prov.input(a.corpus);
    const auto ds = load_any_corpus(a.corpus, true);
    if (a.name.empty()) name = ds.name;
    std::unordered_set<std::string> ids;
    for (const auto& d : ds.documents) ids.insert(d.id);
    std::erase_if(records, [&](const LogProbRecord& r) { return !ids.contains(r.doc_id); });
  }
  const auto stats = dataset_entropy(records, a.skip, a.max_tokens);

  ojson j;
  j["name"] = name;
  j["model_id"] = records.empty() ? "" : records.front().model_id;
  j["skip"] = a.skip;
  j["max_tokens"] = a.max_tokens;
  j["stats"] = entropy_stats_to_json(stats);
  j["perplexity_of_mean"] = perplexity(stats.mean);
  try {
    const auto g = fit_gaussian(stats.values);
    j["gaussian"] = {{"mu", g.mu}, {"sigma", g.sigma}};
    const auto grid = density_export(stats.values, a.grid_points);
    auto pts = ojson::array();
    for (const auto& p : grid.points) pts.push_back({p.x, p.density});
    j["density"] = {{"method", DensityGrid::kMethod}, {"bandwidth", grid.bandwidth}, {"points", std::move(pts)}};
  } catch (const ValidationError&) {
    // Fewer than two distinct values: no fit or density.
    j["gaussian"] = nullptr;
    j["density"] = nullptr;
  }
  j["provenance"] = prov.json();
  write_json(a.out, j);

  if (!a.heatmap_dir.empty()) {
    fs::create_directories(a.heatmap_dir);
    for (const auto& r : records) {
      auto file = r.doc_id;
      std::replace_if(file.begin(), file.end(), [](char c) { return c == '/' || c == '\\'; }, '_');
      detail::write_file(fs::path(a.heatmap_dir) / (file + ".html"), token_heatmap(r, a.skip));
    }
  }
  return kOk;
}

struct AugmentArgs {
  std::string in, out;
  std::uint64_t seed = kDefaultSeed;
  double inflation = 0.02;
  double single_space_prob = 0.97;
};

inline int cmd_augment(const AugmentArgs& a) {
  RdaConfig cfg;
  cfg.inflation_factor = a.inflation;
  cfg.single_space_prob = a.single_space_prob;
  cfg.validate();
  Provenance prov("augment");
  prov.input(a.in);
  const auto digest = prov.inputs().begin()->second;
  auto ds = load_any_corpus(a.in, true);
  auto out = augment_dataset(ds, cfg, a.seed);
  for (std::size_t i = 0; i < out.documents.size(); ++i) {
    auto& meta = out.documents[i].meta;
    meta["rda_seed"] = std::to_string(a.seed);
    meta["rda_doc_seed"] = std::to_string(derive_seed(a.seed, i));
    meta["rda_prng"] = Rng::kAlgorithm;
    meta["rda_inflation"] = nlohmann::json(a.inflation).dump();
    meta["tool_version"] = DETAUDIT_VERSION;
    meta["input_digest"] = digest;
  }
  save_corpus(out, a.out);
  return kOk;
}

struct CorrelateArgs {
  std::string scores, logprobs, out;
  std::vector<std::string> labels, mixed;
  std::size_t skip = kDefaultSkip;
  std::size_t max_tokens = kDefaultMaxTokens;
};

inline int cmd_correlate(const CorrelateArgs& a) {
  Provenance prov("correlate");
  prov.input(a.scores);
  prov.input(a.logprobs);
  for (const auto& l : a.labels) prov.input(l);
  prov.config("skip", a.skip);
  prov.config("max_tokens", a.max_tokens);

  if (!fs::is_directory(a.scores)) throw IoError("--scores must be a directory of <detector>.jsonl files");
  std::map<std::string, std::map<std::string, double>> outputs;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(a.scores)) {
    if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto& col = outputs[f.stem().string()];
    const auto content = detail::read_file(f);
    std::istringstream in(content);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        col[j.at("doc_id").get<std::string>()] = j.at("score").get<double>();
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(f.filename().string() + ": " + e.what(), lineno);
      }
    }
  }

  std::map<std::string, double> entropies;
  for (const auto& r : load_logprob_cache(a.logprobs)) {
    try {
      entropies[r.doc_id] = document_entropy(r, a.skip, a.max_tokens);
    } catch (const TooShortError&) {
    }
  }

  std::map<std::string, Label> labels;
  std::vector<DatasetMembers> members;
  for (const auto& path : a.labels) {
    const bool mixed = std::find(a.mixed.begin(), a.mixed.end(), fs::path(path).stem().string()) != a.mixed.end();
    const auto ds = load_any_corpus(path, mixed);
    DatasetMembers m{ds.name, {}, ds.mixed_status};
    for (const auto& d : ds.documents) {
      labels[d.id] = d.label;
      m.doc_ids.push_back(d.id);
    }
    members.push_back(std::move(m));
  }
  const auto cm = inclass_correlation(outputs, entropies, labels, members);
  auto j = export_heatmap_grid(cm);
  j["provenance"] = prov.json();
  write_json(a.out, j);
  return kOk;
}

struct AuditArgs {
  std::vector<std::string> evals, entropies, pairs;
  std::string pairs_file, correlation, bundle, summary;
  std::optional<std::uint64_t> seed;
};

inline std::vector<BiasPair> parse_pairs(const std::vector<std::string>& specs, const std::string& file) {
  std::vector<std::string> items = specs;
  if (!file.empty()) {
    std::istringstream in(detail::read_file(file));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      items.push_back(line);
    }
  }
  std::vector<BiasPair> pairs;
  for (const auto& s : items) {
    const auto sep = s.find_first_of(":,");
    if (sep == std::string::npos || sep == 0 || sep + 1 == s.size()) {
      throw ValidationError("pair '" + s + "' must look like NONNATIVE:NATIVE");
    }
    pairs.push_back({s.substr(0, sep), s.substr(sep + 1)});
  }
  if (pairs.empty()) throw ValidationError("no dataset pairs given");
  return pairs;
}

inline int cmd_audit(const AuditArgs& a, std::ostream& out) {
  Provenance prov("audit");
  AuditBundle b;
  for (const auto& spec : a.evals) {
    const auto eq = spec.find('=');
    std::string name;
    fs::path path;
    if (eq == std::string::npos) {
      path = spec;
    } else {
      name = spec.substr(0, eq);
      path = spec.substr(eq + 1);
    }
    prov.input(path);
    const auto j = read_json(path);
    if (name.empty()) name = j.value("detector", path.stem().string());
    try {
      b.eval_reports[name] = eval_report_from_json(j);
      if (j.contains("provenance") && !j["provenance"]["seed"].is_null()) b.stochastic = true;
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("'" + path.string() + "' is not an eval report: " + e.what());
    }
  }
  for (const auto& path : a.entropies) {
    prov.input(path);
    const auto j = read_json(path);
    try {
      b.entropy_stats[j.at("name").get<std::string>()] = entropy_stats_from_json(j.at("stats"));
      if (b.metadata.provider_model_id.empty()) b.metadata.provider_model_id = j.value("model_id", "");
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("'" + path + "' is not an entropy stats file: " + e.what());
    }
  }
  if (!a.correlation.empty()) {
    prov.input(a.correlation);
    try {
      b.correlations = parse_heatmap_grid(read_json(a.correlation));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("'" + a.correlation + "' is not a heatmap grid: " + e.what());
    }
  }
  if (!a.pairs_file.empty()) prov.input(a.pairs_file);
  const auto pairs = parse_pairs(a.pairs, a.pairs_file);
  for (const auto& p : pairs) {
    if (!b.has_dataset(p.nonnative)) throw ValidationError("unknown dataset '" + p.nonnative + "'");
    if (!b.has_dataset(p.native)) throw ValidationError("unknown dataset '" + p.native + "'");
  }
  add_pair_tests(b, pairs);

  if (a.seed) {
    prov.seed(*a.seed);
    b.metadata.seed = a.seed;
    b.metadata.rng_algorithm = Rng::kAlgorithm;
  }
  if (b.stochastic && !b.metadata.seed) {
    throw ValidationError("inputs came from seeded steps; pass --seed to record it in the bundle");
  }
  b.metadata.tool_version = DETAUDIT_VERSION;
  b.metadata.input_digests = prov.inputs();
  b.metadata.config_digest = prov.config_digest();
  b.metadata.timestamps = reproducible_timestamps();
  validate(b);
  write_json(a.bundle, bundle_to_json(b));

  const auto summary = render_bias_summary(b, pairs);
  if (a.summary.empty()) {
    out << summary;
  } else {
    detail::write_file(a.summary, summary);
  }
  return kOk;
}

struct SynthArgs {
  std::string out_dir;
  std::uint64_t seed = kDefaultSeed;
  double shift = 0.0;
  std::size_t train = 300, test = 200, audit = 150;
};

inline int cmd_synth(const SynthArgs& a) {
  if (!(a.shift >= 0.0 && a.shift <= 1.0)) throw ValidationError("--shift must lie in [0, 1]");
  synth::SynthConfig cfg;
  cfg.seed = a.seed;
  cfg.nonnative_shift = a.shift;
  cfg.train_per_class = a.train;
  cfg.test_per_class = a.test;
  cfg.audit_docs = a.audit;
  const synth::Generator gen(cfg);
  const auto c = gen.corpus();
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  std::vector<LogProbRecord> records;
  for (const auto* ds : {&c.train, &c.test, &c.native, &c.nonnative}) {
    auto copy = *ds;
    for (auto& d : copy.documents) {
      d.meta["synth_seed"] = std::to_string(a.seed);
      d.meta["tool_version"] = DETAUDIT_VERSION;
      records.push_back(gen.logprobs(d));
    }
    save_corpus(copy, dir / (ds->name + ".jsonl"));
  }
  detail::write_file(dir / "logprobs.jsonl", logprob_cache_to_jsonl(records));
  return kOk;
}

// ---- entry ------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"detaudit: generated-text detection and detector bias auditing"};
  app.set_version_flag("--version", std::string(DETAUDIT_VERSION));
  app.require_subcommand(1);

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train the TF-IDF naive Bayes detector");
  t->add_option("--corpus", train.corpus, "Training corpus (JSONL or directory)")->required();
  t->add_option("--out", train.out, "Model file to write")->required();
  t->add_option("--alpha", train.alpha, "Additive smoothing")->capture_default_str();
  t->add_flag("--lowercase,!--no-lowercase", train.lowercase, "Lowercase tokens (default on)");
  t->add_option("--summary", train.summary, "Write the training summary here instead of stdout");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a detector on labelled corpora");
  e->add_option("--model", ev.model, "Model file")->required();
  e->add_option("--corpus", ev.corpora, "Corpus; repeat for several datasets")->required();
  e->add_option("--threshold", ev.threshold, "Decision threshold on P(generated)")->capture_default_str();
  e->add_option("--report", ev.report, "Report JSON to write")->required();
  e->add_option("--table", ev.table, "Also render a table (.csv or .md)");
  e->add_option("--scores-out", ev.scores_out, "Per-document scores JSONL");
  e->add_option("--detector", ev.detector, "Detector name recorded in the report")->capture_default_str();

  EntropyArgs en;
  auto* n = app.add_subcommand("entropy", "Windowed entropy statistics from a log-prob cache");
  n->add_option("--logprobs", en.logprobs, "Log-prob cache JSONL")->required();
  n->add_option("--skip", en.skip, "Context tokens excluded from scoring")->capture_default_str();
  n->add_option("--max-tokens", en.max_tokens, "Truncation length")->capture_default_str();
  n->add_option("--out", en.out, "Statistics JSON to write")->required();
  n->add_option("--corpus", en.corpus, "Restrict to the documents of this corpus");
  n->add_option("--name", en.name, "Dataset name for the statistics");
  n->add_option("--grid-points", en.grid_points, "Density grid size")->capture_default_str();
  n->add_option("--heatmap-dir", en.heatmap_dir, "Write one token heatmap (HTML) per document");

  AugmentArgs au;
  auto* g = app.add_subcommand("augment", "Random data augmentation of a corpus");
  g->add_option("--in", au.in, "Input corpus")->required();
  g->add_option("--out", au.out, "Output corpus JSONL")->required();
  g->add_option("--seed", au.seed, "Random seed")->capture_default_str();
  g->add_option("--inflation", au.inflation, "Expected word inflation factor")->capture_default_str();
  g->add_option("--single-space-prob", au.single_space_prob, "Probability of a plain space joint")
      ->capture_default_str();

  CorrelateArgs co;
  auto* c = app.add_subcommand("correlate", "In-class correlation of detector outputs and entropy");
  c->add_option("--scores", co.scores, "Directory of <detector>.jsonl score files")->required();
  c->add_option("--logprobs", co.logprobs, "Log-prob cache JSONL")->required();
  c->add_option("--labels", co.labels, "Labelled corpus per dataset; repeatable")->required();
  c->add_option("--mixed", co.mixed, "Dataset name flagged mixed-status (excluded)");
  c->add_option("--skip", co.skip, "Context tokens excluded from scoring")->capture_default_str();
  c->add_option("--max-tokens", co.max_tokens, "Truncation length")->capture_default_str();
  c->add_option("--out", co.out, "Heatmap grid JSON to write")->required();

  AuditArgs ad;
  std::uint64_t audit_seed = 0;
  auto* d = app.add_subcommand("audit", "Assemble an audit bundle and bias summary");
  d->add_option("--eval", ad.evals, "NAME=REPORT.json from 'eval'; repeatable")->required();
  d->add_option("--entropy", ad.entropies, "Statistics JSON from 'entropy'; repeatable");
  d->add_option("--correlation", ad.correlation, "Heatmap grid JSON from 'correlate'");
  d->add_option("--pair", ad.pairs, "NONNATIVE:NATIVE dataset pair; repeatable");
  d->add_option("--pairs", ad.pairs_file, "File with one NONNATIVE:NATIVE pair per line");
  d->add_option("--bundle", ad.bundle, "Audit bundle JSON to write")->required();
  d->add_option("--summary", ad.summary, "Write the bias summary here instead of stdout");
  auto* seed_opt = d->add_option("--seed", audit_seed, "Seed of the upstream stochastic steps");

  SynthArgs sy;
  auto* s = app.add_subcommand("synth", "Write a synthetic audit corpus and log-prob cache");
  s->add_option("--out-dir", sy.out_dir, "Output directory")->required();
  s->add_option("--seed", sy.seed, "Random seed")->capture_default_str();
  s->add_option("--shift", sy.shift, "Nonnative distribution shift in [0, 1]")->capture_default_str();
  s->add_option("--train", sy.train, "Training documents per class")->capture_default_str();
  s->add_option("--test", sy.test, "Test documents per class")->capture_default_str();
  s->add_option("--audit", sy.audit, "Documents per writer group")->capture_default_str();

  auto fail = [&](int code, const std::string& msg) {
    auto line = msg;
    std::replace(line.begin(), line.end(), '\n', ' ');
    err << "detaudit: error: " << line << "\n";
    return code;
  };

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::CallForVersion&) {
      out << DETAUDIT_VERSION << "\n";
      return kOk;
    } catch (const CLI::ParseError& pe) {
      return fail(kValidation, pe.what());
    }
    if (*t) return cmd_train(train, out);
    if (*e) return cmd_eval(ev);
    if (*n) return cmd_entropy(en);
    if (*g) return cmd_augment(au);
    if (*c) return cmd_correlate(co);
    if (*d) {
      if (*seed_opt) ad.seed = audit_seed;
      return cmd_audit(ad, out);
    }
    if (*s) return cmd_synth(sy);
    return fail(kValidation, "no command given");
  } catch (const ValidationError& ex) {
    return fail(kValidation, ex.what());
  } catch (const IoError& ex) {
    return fail(kIo, ex.what());
  } catch (const fs::filesystem_error& ex) {
    return fail(kIo, ex.what());
  } catch (const std::exception& ex) {
    return fail(kInternal, ex.what());
  }
}

}  // namespace detaudit::cli
