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

#ifndef COMETKB_CORPUS_H_
#define COMETKB_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace cometkb {

enum class Partition { kTrain, kDev, kTest };

std::string_view partition_name(Partition p);
// Accepts "train", "dev" (or "valid"/"validation"), "test".
Partition parse_partition(std::string_view name);

// One (subject, relation, object) record. Text fields are stored normalized;
// `relation` is the schema identifier (e.g. "xIntent", "IsA").
struct KnowledgeTuple {
  std::string subject;
  std::string relation;
  std::string object;
  Partition split = Partition::kTrain;

  // Identity used for deduplication and novelty: split is not part of it.
  bool same_triple(const KnowledgeTuple& other) const {
    return subject == other.subject && relation == other.relation &&
           object == other.object;
  }
};

// How a relation is rendered into the token sequence.
enum class RelationMode {
  kSymbol,    // one dedicated token, e.g. <IsA>
  kLanguage,  // natural-language words, e.g. "is a"
};

std::string_view relation_mode_name(RelationMode mode);
RelationMode parse_relation_mode(std::string_view name);

struct RelationSchema {
  std::string id;
  std::vector<std::string> surface_form;
  std::vector<std::string> meta_tokens;
};

// The hierarchy meta-token inventory, in canonical order.
const std::vector<std::string>& meta_token_inventory();

// The active set of relations for a dataset.
class SchemaSet {
 public:
  SchemaSet() = default;
  SchemaSet(std::string name, std::vector<RelationSchema> relations);

  // "atomic" (9 relations, with meta-tokens) or "conceptnet" (34 relations).
  static SchemaSet builtin(std::string_view name);
  // Parses a JSON list of {id, surface_form, meta_tokens}.
  static SchemaSet from_json(std::string_view json_text, std::string name);
  static SchemaSet load(const std::filesystem::path& path);

  std::string to_json() const;

  const std::string& name() const { return name_; }
  const std::vector<RelationSchema>& relations() const { return relations_; }
  std::size_t size() const { return relations_.size(); }

  const RelationSchema* find(std::string_view id) const;
  // Throws DataError naming the id when it is not part of the schema.
  const RelationSchema& at(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }

  // Longest rendering (relation tokens plus meta-tokens when enabled).
  int max_relation_tokens(RelationMode mode, bool meta_tokens) const;

 private:
  std::string name_;
  std::vector<RelationSchema> relations_;
};

enum class TupleFormat { kJsonl, kTsv };
TupleFormat parse_tuple_format(std::string_view name);

// Reads tuples in file order, normalizing text fields. JSONL lines carry
// subject/relation/object and an optional split; TSV lines are
// relation<TAB>subject<TAB>object and receive `tsv_split`. Blank lines are
// skipped. Throws DataError with the 1-based line number on malformed input
// and DataError naming the id for relations outside `schemas`.
std::vector<KnowledgeTuple> read_tuples(std::istream& in, TupleFormat format,
                                        const SchemaSet& schemas,
                                        Partition tsv_split = Partition::kTrain);
std::vector<KnowledgeTuple> load_tuples(const std::filesystem::path& path,
                                        TupleFormat format,
                                        const SchemaSet& schemas,
                                        Partition tsv_split = Partition::kTrain);

// One JSONL line (no trailing newline) in the load_tuples format.
std::string tuple_to_jsonl(const KnowledgeTuple& tuple);
void write_tuples(const std::filesystem::path& path,
                  const std::vector<KnowledgeTuple>& tuples);

std::vector<std::string> render_relation(const RelationSchema& schema,
                                         RelationMode mode);

// Meta-tokens appended after the relation tokens; empty when disabled.
std::vector<std::string> apply_meta_tokens(const RelationSchema& schema,
                                           bool enabled);

struct DatasetSplit {
  std::vector<KnowledgeTuple> train;
  std::vector<KnowledgeTuple> dev;
  std::vector<KnowledgeTuple> test;
  std::optional<std::set<std::string>> relation_subset;

  std::size_t size() const { return train.size() + dev.size() + test.size(); }
};

// Groups tuples by their split field. Exact duplicates inside a partition
// are kept once; a dev/test tuple whose triple already occurs in an earlier
// partition (train, then dev) is dropped so partitions stay disjoint.
DatasetSplit make_split(const std::vector<KnowledgeTuple>& tuples);

// True when no triple occurs in two partitions.
bool partitions_disjoint(const DatasetSplit& split);

// Replaces train with a uniform sample without replacement of
// round(fraction * |train|) tuples (at least one), kept in original order.
DatasetSplit subsample_training(const DatasetSplit& split, double fraction,
                                std::uint64_t seed);

// Restricts all partitions to the given relations.
DatasetSplit filter_relations(const DatasetSplit& split,
                              const std::set<std::string>& subset,
                              const SchemaSet& schemas);

// Multi-relation training groups for the built-in ATOMIC schema:
// "full", "personxy-t1", "personxy-t2", "prepost-t1", "prepost-t2",
// "involun-t1", "involun-t2". Throws ArgumentError for other names.
const std::set<std::string>& relation_split(std::string_view name);
std::vector<std::string> relation_split_names();

}  // namespace cometkb

#endif  // COMETKB_CORPUS_H_
