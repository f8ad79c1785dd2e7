#pragma once

// Document collections: loading, saving, random capping, size matching and
// prompt-sample extraction for generating synthetic complements.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "detaudit/error.hpp"
#include "detaudit/rng.hpp"
#include "detaudit/unicode.hpp"

namespace detaudit {

enum class Label { human, generated, unknown };

inline std::string_view to_string(Label l) {
  switch (l) {
    case Label::human: return "human";
    case Label::generated: return "generated";
    case Label::unknown: return "unknown";
  }
  return "unknown";
}

inline std::optional<Label> parse_label(std::string_view s) {
  if (s == "human") return Label::human;
  if (s == "generated") return Label::generated;
  if (s == "unknown") return Label::unknown;
  return std::nullopt;
}

struct Document {
  std::string id;
  std::string text;
  Label label = Label::unknown;
  std::string dataset_name;
  std::map<std::string, std::string> meta;

  /// Size of the UTF-8 encoded text.
  std::size_t byte_size() const noexcept { return text.size(); }

  friend bool operator==(const Document&, const Document&) = default;
};

struct Dataset {
  std::string name;
  std::vector<Document> documents;
  /// Documents of unknown provenance are allowed only in mixed-status sets.
  bool mixed_status = false;

  std::size_t size() const noexcept { return documents.size(); }
  bool empty() const noexcept { return documents.empty(); }

  std::size_t count(Label l) const {
    return static_cast<std::size_t>(std::count_if(
        documents.begin(), documents.end(), [l](const Document& d) { return d.label == l; }));
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Throws ValidationError if ids are empty or repeated, or if an unknown
/// label appears in a dataset not flagged mixed-status.
inline void validate(const Dataset& ds) {
  std::unordered_set<std::string_view> seen;
  for (const auto& d : ds.documents) {
    if (d.id.empty()) throw ValidationError("dataset '" + ds.name + "': empty document id");
    if (!seen.insert(d.id).second) {
      throw ValidationError("dataset '" + ds.name + "': duplicate document id '" + d.id + "'");
    }
    if (d.label == Label::unknown && !ds.mixed_status) {
      throw ValidationError("dataset '" + ds.name + "': document '" + d.id +
                            "' has label 'unknown' but the dataset is not mixed-status");
    }
  }
}

enum class CorpusFormat { jsonl, dir_of_txt };

struct LoadOptions {
  /// Dataset name; defaults to the file stem or directory name.
  std::optional<std::string> name;
  bool mixed_status = false;
};

namespace detail {

inline Document parse_document_line(const std::string& line, std::size_t lineno,
                                    const std::string& dataset_name) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
  }
  if (!j.is_object()) throw ParseError("expected a JSON object", lineno);
  auto str_field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'", lineno);
    if (!it->is_string()) throw ParseError(std::string("field '") + key + "' must be a string", lineno);
    return it->get<std::string>();
  };
  Document d;
  d.id = str_field("id");
  d.text = str_field("text");
  const auto label = str_field("label");
  const auto parsed = parse_label(label);
  if (!parsed) throw ParseError("unknown label '" + label + "'", lineno);
  d.label = *parsed;
  d.dataset_name = dataset_name;
  if (auto it = j.find("meta"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ParseError("field 'meta' must be an object", lineno);
    for (const auto& [k, v] : it->items()) {
      d.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
  return d;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace detail

/// Parses corpus JSONL text. Blank lines are skipped.
inline Dataset parse_corpus_jsonl(std::string_view content, const std::string& name,
                                  bool mixed_status = false) {
  Dataset ds{name, {}, mixed_status};
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string_view::npos) nl = content.size();
    ++lineno;
    std::string line(content.substr(pos, nl - pos));
    pos = nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ds.documents.push_back(detail::parse_document_line(line, lineno, name));
  }
  validate(ds);
  return ds;
}

/// Loads a dataset from a JSONL file or a directory of .txt files.
///
/// Directory layout: `human/*.txt` and `generated/*.txt` carry their label;
/// `.txt` files at the top level are labelled unknown. Ids are the relative
/// paths without extension, and documents are ordered by id.
inline Dataset load_corpus(const std::filesystem::path& path, CorpusFormat format,
                           const LoadOptions& opts = {}) {
  namespace fs = std::filesystem;
  if (!fs::exists(path)) throw IoError("no such file or directory: '" + path.string() + "'");
  if (format == CorpusFormat::jsonl) {
    const auto name = opts.name.value_or(path.stem().string());
    return parse_corpus_jsonl(detail::read_file(path), name, opts.mixed_status);
  }

  if (!fs::is_directory(path)) throw IoError("'" + path.string() + "' is not a directory");
  const auto name = opts.name.value_or(path.filename().string());
  Dataset ds{name, {}, opts.mixed_status};
  auto add_dir = [&](const fs::path& dir, const std::string& prefix, Label label) {
    if (!fs::is_directory(dir)) return;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".txt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      Document d;
      d.id = prefix + f.stem().string();
      d.text = detail::read_file(f);
      if (!unicode::is_valid_utf8(d.text)) throw ValidationError("'" + f.string() + "' is not valid UTF-8");
      d.label = label;
      d.dataset_name = name;
      ds.documents.push_back(std::move(d));
    }
  };
  add_dir(path / "generated", "generated/", Label::generated);
  add_dir(path / "human", "human/", Label::human);
  add_dir(path, "", Label::unknown);
  std::stable_sort(ds.documents.begin(), ds.documents.end(),
                   [](const Document& a, const Document& b) { return a.id < b.id; });
  validate(ds);
  return ds;
}

inline std::string to_jsonl(const Dataset& ds) {
  std::string out;
  for (const auto& d : ds.documents) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["text"] = d.text;
    j["label"] = std::string(to_string(d.label));
    if (!d.meta.empty()) {
      nlohmann::ordered_json meta = nlohmann::ordered_json::object();
      for (const auto& [k, v] : d.meta) meta[k] = v;
      j["meta"] = std::move(meta);
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline void save_corpus(const Dataset& ds, const std::filesystem::path& path) {
  detail::write_file(path, to_jsonl(ds));
}

/// Keeps min(cap, |ds|) documents chosen uniformly without replacement.
/// The kept documents stay in load order.
inline Dataset sample_cap(const Dataset& ds, std::size_t cap, std::uint64_t seed) {
  if (ds.size() <= cap) return ds;
  std::vector<std::size_t> idx(ds.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first `cap` slots become the sample.
  for (std::size_t i = 0; i < cap; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  Dataset out{ds.name, {}, ds.mixed_status};
  out.documents.reserve(cap);
  for (auto i : idx) out.documents.push_back(ds.documents[i]);
  return out;
}

struct SizePair {
  std::string target_id;
  std::string pool_id;

  friend bool operator==(const SizePair&, const SizePair&) = default;
};

/// Pairs each target with the pool document closest in byte size. Pool
/// documents may be reused; ties go to the lexicographically smallest id.
inline std::vector<SizePair> match_by_size(const Dataset& targets, const Dataset& pool) {
  if (pool.empty()) throw ValidationError("match_by_size: empty pool");
  struct Entry {
    std::size_t size;
    const std::string* id;
  };
  std::vector<Entry> sorted;
  sorted.reserve(pool.size());
  for (const auto& d : pool.documents) sorted.push_back({d.byte_size(), &d.id});
  std::sort(sorted.begin(), sorted.end(), [](const Entry& a, const Entry& b) {
    return a.size != b.size ? a.size < b.size : *a.id < *b.id;
  });

  std::vector<SizePair> pairs;
  pairs.reserve(targets.size());
  for (const auto& t : targets.documents) {
    const auto size = t.byte_size();
    // First entry with size >= target; entries are (size, id)-sorted so the
    // first of an equal-size group has the smallest id.
    auto hi = std::lower_bound(sorted.begin(), sorted.end(), size,
                               [](const Entry& e, std::size_t s) { return e.size < s; });
    const Entry* best = nullptr;
    if (hi != sorted.end()) best = &*hi;
    if (hi != sorted.begin()) {
      const auto lo_size = std::prev(hi)->size;
      // Smallest id among the entries of that size.
      auto lo = std::lower_bound(sorted.begin(), hi, lo_size,
                                 [](const Entry& e, std::size_t s) { return e.size < s; });
      if (best == nullptr) {
        best = &*lo;
      } else {
        const auto d_hi = best->size - size;
        const auto d_lo = size - lo->size;
        if (d_lo < d_hi || (d_lo == d_hi && *lo->id < *best->id)) best = &*lo;
      }
    }
    pairs.push_back({t.id, *best->id});
  }
  return pairs;
}

/// Picks the text sample used to seed a continuation prompt: the first
/// paragraph if it has 100..1000 characters, otherwise the shortest run of
/// leading full-stop-terminated sentences reaching 150 characters. Texts
/// without such a prefix are returned whole. The result is always a prefix.
inline std::string extract_prompt_sample(std::string_view text) {
  constexpr std::size_t kParaMin = 100;
  constexpr std::size_t kParaMax = 1000;
  constexpr std::size_t kSentenceTarget = 150;

  const auto para_end = text.find("\n\n");
  const auto paragraph = text.substr(0, para_end);
  const auto para_len = unicode::length(paragraph);
  if (para_len >= kParaMin && para_len <= kParaMax) return std::string(paragraph);

  const auto cps = unicode::decode(text);
  if (cps.size() < kSentenceTarget) return std::string(text);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i].value != U'.') continue;
    const bool terminal = i + 1 == cps.size() || unicode::is_whitespace(cps[i + 1].value);
    if (terminal && i + 1 >= kSentenceTarget) return std::string(text.substr(0, cps[i].end));
  }
  return std::string(text);
}

enum class PromptTemplate { syn, wiki, news };

/// Czech generation prompts with the sample or article name substituted.
inline std::string render_prompt(PromptTemplate tpl, std::string_view arg) {
  if (arg.empty()) throw ValidationError("render_prompt: empty argument");
  std::string out;
  switch (tpl) {
    case PromptTemplate::syn:
      out = "Napište dalších 2000 slov tohoto textu. Pište pouze samotný text.\n\n";
      out += arg;
      out += '\n';
      break;
    case PromptTemplate::wiki:
      out = "Napište Wikipedia článek na téma ";
      out += arg;
      break;
    case PromptTemplate::news:
      out = "Napište novinový článek na téma '";
      out += arg;
      out += '\'';
      break;
  }
  return out;
}

}  // namespace detaudit
