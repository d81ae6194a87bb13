// Copyright 2026 The cometkb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cometkb/corpus.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "cometkb/error.h"
#include "cometkb/random.h"
#include "cometkb/text.h"
#include "json.hpp"

namespace cometkb {

namespace embedded {
extern const std::string_view kAtomicSchema;
extern const std::string_view kConceptNetSchema;
}  // namespace embedded

using nlohmann::json;

std::string_view partition_name(Partition p) {
  switch (p) {
    case Partition::kTrain: return "train";
    case Partition::kDev: return "dev";
    case Partition::kTest: return "test";
  }
  return "train";
}

Partition parse_partition(std::string_view name) {
  const std::string n = normalize_text(name);
  if (n == "train" || n == "trn") return Partition::kTrain;
  if (n == "dev" || n == "valid" || n == "validation") return Partition::kDev;
  if (n == "test" || n == "tst") return Partition::kTest;
  throw DataError("unknown split '" + std::string(name) + "'");
}

std::string_view relation_mode_name(RelationMode mode) {
  return mode == RelationMode::kSymbol ? "symbol" : "language";
}

RelationMode parse_relation_mode(std::string_view name) {
  if (name == "symbol") return RelationMode::kSymbol;
  if (name == "language") return RelationMode::kLanguage;
  throw ArgumentError("unknown relation mode '" + std::string(name) +
                      "' (expected symbol or language)");
}

const std::vector<std::string>& meta_token_inventory() {
  static const std::vector<std::string> kInventory = {
      "<X>", "<Y>", "<Pre>", "<Post>", "<Voluntary>", "<Involuntary>"};
  return kInventory;
}

SchemaSet::SchemaSet(std::string name, std::vector<RelationSchema> relations)
    : name_(std::move(name)), relations_(std::move(relations)) {
  const auto& inventory = meta_token_inventory();
  std::set<std::string> seen;
  for (const auto& r : relations_) {
    if (r.id.empty()) throw ConfigError("relation schema with empty id");
    if (!seen.insert(r.id).second) {
      throw ConfigError("duplicate relation id '" + r.id + "'");
    }
    for (const auto& m : r.meta_tokens) {
      if (std::find(inventory.begin(), inventory.end(), m) == inventory.end()) {
        throw ConfigError("relation '" + r.id + "' uses unknown meta-token '" +
                          m + "'");
      }
    }
  }
}

SchemaSet SchemaSet::builtin(std::string_view name) {
  if (name == "atomic") return from_json(embedded::kAtomicSchema, "atomic");
  if (name == "conceptnet") {
    return from_json(embedded::kConceptNetSchema, "conceptnet");
  }
  throw ArgumentError("unknown built-in schema '" + std::string(name) +
                      "' (expected atomic or conceptnet)");
}

SchemaSet SchemaSet::from_json(std::string_view json_text, std::string name) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("relation schema is not valid JSON: ") +
                      e.what());
  }
  if (!doc.is_array()) throw ConfigError("relation schema must be a JSON list");
  std::vector<RelationSchema> relations;
  for (const auto& item : doc) {
    try {
      RelationSchema r;
      r.id = item.at("id").get<std::string>();
      if (item.contains("surface_form")) {
        for (const auto& w : item.at("surface_form")) {
          for (auto& piece : split_words(normalize_text(w.get<std::string>()))) {
            r.surface_form.push_back(std::move(piece));
          }
        }
      }
      if (item.contains("meta_tokens")) {
        r.meta_tokens = item.at("meta_tokens").get<std::vector<std::string>>();
      }
      relations.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed relation schema entry: ") +
                        e.what());
    }
  }
  return SchemaSet(std::move(name), std::move(relations));
}

SchemaSet SchemaSet::load(const std::filesystem::path& path) {
  if (path == "atomic" || path == "conceptnet") return builtin(path.string());
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open relation schema " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str(), path.stem().string());
}

std::string SchemaSet::to_json() const {
  json doc = json::array();
  for (const auto& r : relations_) {
    doc.push_back({{"id", r.id},
                   {"surface_form", r.surface_form},
                   {"meta_tokens", r.meta_tokens}});
  }
  return doc.dump(2);
}

const RelationSchema* SchemaSet::find(std::string_view id) const {
  for (const auto& r : relations_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

const RelationSchema& SchemaSet::at(std::string_view id) const {
  if (const auto* r = find(id)) return *r;
  throw DataError("unknown relation '" + std::string(id) + "'");
}

int SchemaSet::max_relation_tokens(RelationMode mode, bool meta_tokens) const {
  int longest = 0;
  for (const auto& r : relations_) {
    const int n = mode == RelationMode::kSymbol
                      ? 1
                      : static_cast<int>(r.surface_form.size());
    const int m = meta_tokens ? static_cast<int>(r.meta_tokens.size()) : 0;
    longest = std::max(longest, n + m);
  }
  return longest;
}

TupleFormat parse_tuple_format(std::string_view name) {
  if (name == "jsonl") return TupleFormat::kJsonl;
  if (name == "tsv") return TupleFormat::kTsv;
  throw ArgumentError("unknown tuple format '" + std::string(name) +
                      "' (expected jsonl or tsv)");
}

namespace {

KnowledgeTuple build_tuple(std::string_view subject, std::string_view relation,
                          std::string_view object, Partition split,
                          const SchemaSet& schemas, int line) {
  KnowledgeTuple t;
  t.subject = normalize_text(subject);
  t.relation = std::string(relation);
  // Relation ids are symbols; only surrounding whitespace is dropped.
  while (!t.relation.empty() && std::isspace(static_cast<unsigned char>(t.relation.back()))) {
    t.relation.pop_back();
  }
  t.relation.erase(0, t.relation.find_first_not_of(" \t\r\n"));
  t.object = normalize_text(object);
  t.split = split;
  if (t.subject.empty()) throw DataError("empty subject", line);
  if (t.relation.empty()) throw DataError("empty relation", line);
  if (!schemas.contains(t.relation)) {
    throw DataError("unknown relation '" + t.relation + "'", line);
  }
  return t;
}

KnowledgeTuple parse_jsonl_line(const std::string& line, int line_no,
                                const SchemaSet& schemas) {
  json row;
  try {
    row = json::parse(line);
  } catch (const json::exception&) {
    throw DataError("malformed JSON", line_no);
  }
  if (!row.is_object()) throw DataError("expected a JSON object", line_no);
  auto text_field = [&](const char* key) -> std::string {
    auto it = row.find(key);
    if (it == row.end()) {
      throw DataError(std::string("missing field '") + key + "'", line_no);
    }
    if (it->is_null()) return "";
    if (!it->is_string()) {
      throw DataError(std::string("field '") + key + "' must be a string",
                      line_no);
    }
    return it->get<std::string>();
  };
  Partition split = Partition::kTrain;
  if (auto it = row.find("split"); it != row.end() && !it->is_null()) {
    if (!it->is_string()) throw DataError("field 'split' must be a string", line_no);
    try {
      split = parse_partition(it->get<std::string>());
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }
  }
  return build_tuple(text_field("subject"), text_field("relation"),
                    text_field("object"), split, schemas, line_no);
}

KnowledgeTuple parse_tsv_line(const std::string& line, int line_no,
                              const SchemaSet& schemas, Partition split) {
  std::vector<std::string> cols;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  // ConceptNet dumps carry a trailing confidence column; it is ignored.
  if (cols.size() < 3 || cols.size() > 4) {
    throw DataError("expected relation<TAB>subject<TAB>object", line_no);
  }
  return build_tuple(cols[1], cols[0], cols[2], split, schemas, line_no);
}

}  // namespace

std::vector<KnowledgeTuple> read_tuples(std::istream& in, TupleFormat format,
                                        const SchemaSet& schemas,
                                        Partition tsv_split) {
  std::vector<KnowledgeTuple> tuples;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (format == TupleFormat::kJsonl) {
      tuples.push_back(parse_jsonl_line(line, line_no, schemas));
    } else {
      tuples.push_back(parse_tsv_line(line, line_no, schemas, tsv_split));
    }
  }
  return tuples;
}

std::vector<KnowledgeTuple> load_tuples(const std::filesystem::path& path,
                                        TupleFormat format,
                                        const SchemaSet& schemas,
                                        Partition tsv_split) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tuple file " + path.string());
  try {
    return read_tuples(in, format, schemas, tsv_split);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what(), 0);
  }
}

std::string tuple_to_jsonl(const KnowledgeTuple& tuple) {
  json row = {{"subject", tuple.subject},
              {"relation", tuple.relation},
              {"object", tuple.object},
              {"split", std::string(partition_name(tuple.split))}};
  return row.dump();
}

void write_tuples(const std::filesystem::path& path,
                  const std::vector<KnowledgeTuple>& tuples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& t : tuples) out << tuple_to_jsonl(t) << '\n';
}

std::vector<std::string> render_relation(const RelationSchema& schema,
                                         RelationMode mode) {
  if (mode == RelationMode::kSymbol) return {"<" + schema.id + ">"};
  if (schema.surface_form.empty()) {
    throw ConfigError("relation '" + schema.id +
                      "' has no natural-language surface form");
  }
  return schema.surface_form;
}

std::vector<std::string> apply_meta_tokens(const RelationSchema& schema,
                                           bool enabled) {
  if (!enabled) return {};
  if (schema.meta_tokens.empty()) {
    throw ConfigError("relation '" + schema.id + "' has no meta-token entry");
  }
  return schema.meta_tokens;
}

namespace {

using TripleKey = std::tuple<std::string, std::string, std::string>;

TripleKey key_of(const KnowledgeTuple& t) {
  return {t.subject, t.relation, t.object};
}

}  // namespace

DatasetSplit make_split(const std::vector<KnowledgeTuple>& tuples) {
  DatasetSplit split;
  std::map<TripleKey, Partition> owner;
  // Train claims its triples first, then dev, then test.
  for (Partition p : {Partition::kTrain, Partition::kDev, Partition::kTest}) {
    auto& dest = p == Partition::kTrain ? split.train
                 : p == Partition::kDev ? split.dev
                                        : split.test;
    for (const auto& t : tuples) {
      if (t.split != p) continue;
      if (owner.emplace(key_of(t), p).second) dest.push_back(t);
    }
  }
  return split;
}

bool partitions_disjoint(const DatasetSplit& split) {
  std::map<TripleKey, int> owner;
  int index = 0;
  for (const auto* part : {&split.train, &split.dev, &split.test}) {
    for (const auto& t : *part) {
      auto [it, inserted] = owner.emplace(key_of(t), index);
      if (!inserted && it->second != index) return false;
    }
    ++index;
  }
  return true;
}

DatasetSplit subsample_training(const DatasetSplit& split, double fraction,
                                std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ArgumentError("fraction must lie in (0, 1], got " +
                        std::to_string(fraction));
  }
  if (split.train.empty()) throw ArgumentError("train partition is empty");
  const std::size_t n = split.train.size();
  if (fraction == 1.0) return split;
  std::size_t keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  keep = std::clamp<std::size_t>(keep, 1, n);

  // Partial Fisher-Yates over indices, then restore file order.
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < keep; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());

  DatasetSplit out = split;
  out.train.clear();
  out.train.reserve(keep);
  for (std::size_t i : idx) out.train.push_back(split.train[i]);
  return out;
}

DatasetSplit filter_relations(const DatasetSplit& split,
                              const std::set<std::string>& subset,
                              const SchemaSet& schemas) {
  if (subset.empty()) throw ArgumentError("relation subset is empty");
  for (const auto& id : subset) {
    if (!schemas.contains(id)) {
      throw ArgumentError("unknown relation '" + id + "' in subset");
    }
  }
  auto keep = [&](const std::vector<KnowledgeTuple>& in) {
    std::vector<KnowledgeTuple> out;
    for (const auto& t : in) {
      if (subset.count(t.relation)) out.push_back(t);
    }
    return out;
  };
  DatasetSplit out;
  out.train = keep(split.train);
  out.dev = keep(split.dev);
  out.test = keep(split.test);
  out.relation_subset = subset;
  return out;
}

namespace {

const std::map<std::string, std::set<std::string>, std::less<>>& split_table() {
  static const std::map<std::string, std::set<std::string>, std::less<>> kTable = {
      {"full", {"oEffect", "oReact", "oWant", "xAttr", "xEffect", "xIntent",
                "xNeed", "xReact", "xWant"}},
      {"personxy-t1", {"xAttr", "xEffect", "xIntent", "xNeed", "xReact", "xWant"}},
      {"personxy-t2", {"oEffect", "oReact", "oWant"}},
      // xAttr belongs to neither Pre/Post group.
      {"prepost-t1", {"xIntent", "xNeed"}},
      {"prepost-t2", {"oEffect", "oReact", "oWant", "xEffect", "xReact", "xWant"}},
      {"involun-t1", {"oWant", "xIntent", "xNeed", "xWant"}},
      {"involun-t2", {"oEffect", "oReact", "xAttr", "xEffect", "xReact"}},
  };
  return kTable;
}

}  // namespace

const std::set<std::string>& relation_split(std::string_view name) {
  const auto& table = split_table();
  auto it = table.find(name);
  if (it == table.end()) {
    throw ArgumentError("unknown relation split '" + std::string(name) + "'");
  }
  return it->second;
}

std::vector<std::string> relation_split_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : split_table()) names.push_back(name);
  return names;
}

}  // namespace cometkb
