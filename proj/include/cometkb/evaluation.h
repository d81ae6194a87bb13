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

#ifndef COMETKB_EVALUATION_H_
#define COMETKB_EVALUATION_H_

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cometkb/corpus.h"
#include "cometkb/model.h"
#include "cometkb/vocab.h"

namespace cometkb {

using Tokens = std::vector<std::string>;

// exp of the mean NLL per masked target over all sequences. Throws
// ArgumentError for empty input.
double perplexity(const Parameters<float>& params, const ModelConfig& config,
                  std::span<const EncodedSequence> sequences);

inline constexpr double kBleuEpsilon = 1e-9;

// Corpus-level clipped n-gram counts for orders 1 and 2.
struct BleuStats {
  std::array<long, 2> matches{};
  std::array<long, 2> totals{};
  long candidate_length = 0;
  long reference_length = 0;  // closest reference length per item, ties shorter

  friend bool operator==(const BleuStats&, const BleuStats&) = default;
};

// Throws ArgumentError when the list is empty or the sizes differ, or when an
// item has no references.
BleuStats bleu2_stats(std::span<const Tokens> candidates,
                      std::span<const std::vector<Tokens>> references);
double bleu2_from_stats(const BleuStats& stats);
double bleu2(std::span<const Tokens> candidates,
             std::span<const std::vector<Tokens>> references);

struct NoveltyMetrics {
  double n_t_sro = 0.0;
  double n_t_o = 0.0;
  double n_u_o = 0.0;
  long generated = 0;
  long novel_triples = 0;
  long novel_object_tuples = 0;
  long unique_objects = 0;
  long novel_unique_objects = 0;
};

// Percentages over the pooled generated list. Throws ArgumentError when
// `generated` is empty.
NoveltyMetrics novelty_metrics(std::span<const KnowledgeTuple> generated,
                               std::span<const KnowledgeTuple> train);

class Stopwords {
 public:
  Stopwords() = default;
  // One word per line; '#' starts a comment line.
  static Stopwords from_text(std::string_view text);
  static Stopwords builtin();
  static Stopwords load(const std::filesystem::path& path);

  bool contains(std::string_view word) const { return words_.count(std::string(word)) > 0; }
  std::size_t size() const { return words_.size(); }
  Tokens filter(std::span<const std::string> tokens) const;
  // FNV-1a over the sorted word list.
  std::string hash() const;

 private:
  std::unordered_set<std::string> words_;
};

long word_levenshtein(std::span<const std::string> a, std::span<const std::string> b);

struct EditDistance {
  long distance = 0;
  long max_length = 0;  // max of the filtered lengths
  double value() const { return max_length == 0 ? 0.0 : double(distance) / max_length; }
};

// Word-level Levenshtein of the stopword-filtered objects, with the larger
// filtered length as denominator.
EditDistance object_edit_distance(std::string_view a, std::string_view b,
                                  const Stopwords& stopwords);

inline constexpr int kEditBuckets = 10;

// Bucket i covers [i/10, (i+1)/10); the distance 1 falls in the last bucket.
int edit_bucket(const EditDistance& d);

struct EditProfile {
  std::array<long, kEditBuckets> counts{};
  std::vector<double> distances;  // one per assessed tuple, in input order
  long assessed = 0;
  long skipped = 0;  // no train tuple shares (subject, relation)
};

EditProfile edit_distance_profile(std::span<const KnowledgeTuple> novel_dev,
                                  std::span<const KnowledgeTuple> train,
                                  const Stopwords& stopwords);

// Add-one unigram model over train object words plus END, evaluated on the
// object words and END of `eval`. The type set is the union of both sides.
double unigram_baseline_ppl(std::span<const KnowledgeTuple> train,
                            std::span<const KnowledgeTuple> eval);

struct EvalReport {
  std::optional<double> ppl;
  std::optional<double> unigram_ppl;
  std::optional<double> bleu2;
  std::optional<BleuStats> bleu_stats;
  std::optional<NoveltyMetrics> novelty;
  std::optional<EditProfile> edit_profile;
  std::string stopwords_hash;
  long evaluated_tuples = 0;

  std::string to_json(std::optional<std::string> timestamp = {}) const;
  // bucket_low,bucket_high,count
  std::string histogram_csv() const;
};

}  // namespace cometkb

#endif  // COMETKB_EVALUATION_H_
