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

#include "cometkb/evaluation.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "cometkb/error.h"
#include "cometkb/text.h"
#include "cometkb/training.h"
#include "json.hpp"

namespace cometkb {

namespace embedded {
extern const std::string_view kStopwords;
}

using nlohmann::json;

double perplexity(const Parameters<float>& params, const ModelConfig& config,
                  std::span<const EncodedSequence> sequences) {
  if (sequences.empty()) throw ArgumentError("perplexity of an empty tuple list");
  const NllTotal nll = masked_nll(params, config, sequences);
  if (nll.count == 0) throw ArgumentError("perplexity: no object tokens to score");
  return std::exp(nll.mean());
}

namespace {

using Bigram = std::pair<std::string, std::string>;

template <typename Gram>
std::map<Gram, long> count_grams(const Tokens& t, int order) {
  std::map<Gram, long> counts;
  for (std::size_t i = 0; i + order <= t.size(); ++i) {
    if constexpr (std::is_same_v<Gram, std::string>) {
      ++counts[t[i]];
    } else {
      ++counts[Bigram(t[i], t[i + 1])];
    }
  }
  return counts;
}

template <typename Gram>
long clipped_matches(const Tokens& candidate, const std::vector<Tokens>& refs, int order) {
  const auto cand = count_grams<Gram>(candidate, order);
  std::map<Gram, long> best;
  for (const auto& r : refs) {
    for (const auto& [g, c] : count_grams<Gram>(r, order)) best[g] = std::max(best[g], c);
  }
  long matched = 0;
  for (const auto& [g, c] : cand) {
    auto it = best.find(g);
    if (it != best.end()) matched += std::min(c, it->second);
  }
  return matched;
}

std::string triple_key(const KnowledgeTuple& t) {
  return t.subject + '\x1f' + t.relation + '\x1f' + t.object;
}

}  // namespace

BleuStats bleu2_stats(std::span<const Tokens> candidates,
                      std::span<const std::vector<Tokens>> references) {
  if (candidates.empty()) throw ArgumentError("bleu2 needs at least one candidate");
  if (candidates.size() != references.size()) {
    throw ArgumentError("bleu2: " + std::to_string(candidates.size()) + " candidates but " +
                        std::to_string(references.size()) + " reference sets");
  }
  BleuStats s;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Tokens& c = candidates[i];
    const auto& refs = references[i];
    if (refs.empty()) throw ArgumentError("bleu2: item " + std::to_string(i) + " has no reference");
    s.matches[0] += clipped_matches<std::string>(c, refs, 1);
    s.matches[1] += clipped_matches<Bigram>(c, refs, 2);
    const long n = static_cast<long>(c.size());
    s.totals[0] += n;
    s.totals[1] += std::max(0L, n - 1);
    s.candidate_length += n;
    long closest = static_cast<long>(refs.front().size());
    for (const auto& r : refs) {
      const long len = static_cast<long>(r.size());
      if (std::abs(len - n) < std::abs(closest - n) ||
          (std::abs(len - n) == std::abs(closest - n) && len < closest)) {
        closest = len;
      }
    }
    s.reference_length += closest;
  }
  return s;
}

double bleu2_from_stats(const BleuStats& s) {
  if (s.candidate_length == 0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < 2; ++n) {
    const double p = s.matches[n] > 0 ? double(s.matches[n]) / double(s.totals[n]) : kBleuEpsilon;
    log_sum += 0.5 * std::log(p);
  }
  const double bp = s.candidate_length > s.reference_length
                        ? 1.0
                        : std::exp(1.0 - double(s.reference_length) / double(s.candidate_length));
  return bp * std::exp(log_sum);
}

double bleu2(std::span<const Tokens> candidates,
             std::span<const std::vector<Tokens>> references) {
  return bleu2_from_stats(bleu2_stats(candidates, references));
}

NoveltyMetrics novelty_metrics(std::span<const KnowledgeTuple> generated,
                               std::span<const KnowledgeTuple> train) {
  if (generated.empty()) throw ArgumentError("novelty metrics of an empty generation list");
  std::unordered_set<std::string> train_triples, train_objects;
  for (const auto& t : train) {
    train_triples.insert(triple_key(t));
    train_objects.insert(t.object);
  }
  NoveltyMetrics m;
  std::set<std::string> unique;
  for (const auto& g : generated) {
    ++m.generated;
    if (!train_triples.count(triple_key(g))) ++m.novel_triples;
    if (!train_objects.count(g.object)) ++m.novel_object_tuples;
    unique.insert(g.object);
  }
  m.unique_objects = static_cast<long>(unique.size());
  for (const auto& o : unique) {
    if (!train_objects.count(o)) ++m.novel_unique_objects;
  }
  m.n_t_sro = 100.0 * double(m.novel_triples) / double(m.generated);
  m.n_t_o = 100.0 * double(m.novel_object_tuples) / double(m.generated);
  m.n_u_o = 100.0 * double(m.novel_unique_objects) / double(m.unique_objects);
  return m;
}

Stopwords Stopwords::from_text(std::string_view text) {
  Stopwords s;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string word = normalize_text(line);
    if (word.empty() || word.front() == '#') continue;
    s.words_.insert(word);
  }
  return s;
}

Stopwords Stopwords::builtin() { return from_text(embedded::kStopwords); }

Stopwords Stopwords::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open stopword list " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return from_text(buffer.str());
}

Tokens Stopwords::filter(std::span<const std::string> tokens) const {
  Tokens out;
  for (const auto& t : tokens) {
    if (!contains(t)) out.push_back(t);
  }
  return out;
}

std::string Stopwords::hash() const {
  std::vector<std::string> sorted(words_.begin(), words_.end());
  std::sort(sorted.begin(), sorted.end());
  std::string joined;
  for (const auto& w : sorted) joined += w + '\n';
  return fnv1a_hex(joined);
}

long word_levenshtein(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<long> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = static_cast<long>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    long diagonal = row[0];
    row[0] = static_cast<long>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const long above = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diagonal + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diagonal = above;
    }
  }
  return row[b.size()];
}

EditDistance object_edit_distance(std::string_view a, std::string_view b,
                                  const Stopwords& stopwords) {
  const Tokens fa = stopwords.filter(split_words(normalize_text(a)));
  const Tokens fb = stopwords.filter(split_words(normalize_text(b)));
  return {word_levenshtein(fa, fb), static_cast<long>(std::max(fa.size(), fb.size()))};
}

namespace {

// a/b < c/d without rounding; an empty pair counts as distance 0.
bool closer(const EditDistance& a, const EditDistance& b) {
  const long an = a.max_length ? a.distance : 0, ad = a.max_length ? a.max_length : 1;
  const long bn = b.max_length ? b.distance : 0, bd = b.max_length ? b.max_length : 1;
  return an * bd < bn * ad;
}

}  // namespace

int edit_bucket(const EditDistance& d) {
  if (d.max_length == 0) return 0;
  return static_cast<int>(
      std::min<long>(kEditBuckets - 1, (kEditBuckets * d.distance) / d.max_length));
}

EditProfile edit_distance_profile(std::span<const KnowledgeTuple> novel_dev,
                                  std::span<const KnowledgeTuple> train,
                                  const Stopwords& stopwords) {
  std::map<std::pair<std::string, std::string>, std::vector<const std::string*>> by_prefix;
  for (const auto& t : train) by_prefix[{t.subject, t.relation}].push_back(&t.object);

  EditProfile profile;
  for (const auto& d : novel_dev) {
    auto it = by_prefix.find({d.subject, d.relation});
    if (it == by_prefix.end()) {
      ++profile.skipped;
      continue;
    }
    EditDistance best;
    bool first = true;
    for (const std::string* o : it->second) {
      const EditDistance e = object_edit_distance(d.object, *o, stopwords);
      if (first || closer(e, best)) best = e;
      first = false;
    }
    ++profile.counts[edit_bucket(best)];
    profile.distances.push_back(best.value());
    ++profile.assessed;
  }
  return profile;
}

double unigram_baseline_ppl(std::span<const KnowledgeTuple> train,
                            std::span<const KnowledgeTuple> eval) {
  if (train.empty() || eval.empty()) throw ArgumentError("unigram baseline needs tuples");
  const std::string end(kEndToken);
  std::map<std::string, long> counts;
  long total = 0;
  for (const auto& t : train) {
    for (const auto& w : split_words(t.object)) ++counts[w], ++total;
    ++counts[end], ++total;
  }
  std::set<std::string> types;
  for (const auto& [w, c] : counts) types.insert(w);
  for (const auto& t : eval) {
    for (const auto& w : split_words(t.object)) types.insert(w);
  }
  types.insert(end);
  const double denom = double(total) + double(types.size());
  double nll = 0.0;
  long n = 0;
  auto score = [&](const std::string& w) {
    auto it = counts.find(w);
    const double c = it == counts.end() ? 0.0 : double(it->second);
    nll -= std::log((c + 1.0) / denom);
    ++n;
  };
  for (const auto& t : eval) {
    for (const auto& w : split_words(t.object)) score(w);
    score(end);
  }
  return std::exp(nll / n);
}

std::string EvalReport::to_json(std::optional<std::string> timestamp) const {
  json j;
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  j["ppl"] = opt(ppl);
  j["unigram_baseline_ppl"] = opt(unigram_ppl);
  j["bleu2"] = opt(bleu2);
  if (bleu_stats) {
    j["bleu2_counts"] = {{"matches", bleu_stats->matches},
                         {"totals", bleu_stats->totals},
                         {"candidate_length", bleu_stats->candidate_length},
                         {"reference_length", bleu_stats->reference_length}};
  }
  if (novelty) {
    j["n_t_sro"] = novelty->n_t_sro;
    j["n_t_o"] = novelty->n_t_o;
    j["n_u_o"] = novelty->n_u_o;
    j["novelty_counts"] = {{"generated", novelty->generated},
                           {"novel_triples", novelty->novel_triples},
                           {"novel_object_tuples", novelty->novel_object_tuples},
                           {"unique_objects", novelty->unique_objects},
                           {"novel_unique_objects", novelty->novel_unique_objects},
                           {"n_u_o_pooling", "pooled over all prompts"}};
  } else {
    j["n_t_sro"] = j["n_t_o"] = j["n_u_o"] = nullptr;
  }
  if (edit_profile) {
    json buckets = json::array();
    for (int i = 0; i < kEditBuckets; ++i) {
      buckets.push_back({{"low", i / 10.0},
                         {"high", (i + 1) / 10.0},
                         {"count", edit_profile->counts[i]},
                         {"scorer_accuracy", nullptr}});
    }
    j["edit_distance"] = {{"buckets", buckets},
                          {"assessed", edit_profile->assessed},
                          {"skipped_no_shared_prefix", edit_profile->skipped}};
  }
  j["stopwords_hash"] = stopwords_hash;
  j["evaluated_tuples"] = evaluated_tuples;
  if (timestamp) j["timestamp"] = *timestamp;
  return j.dump(2) + "\n";
}

std::string EvalReport::histogram_csv() const {
  std::ostringstream out;
  out << "bucket_low,bucket_high,count\n";
  for (int i = 0; i < kEditBuckets; ++i) {
    out << i / 10.0 << ',' << (i + 1) / 10.0 << ','
        << (edit_profile ? edit_profile->counts[i] : 0) << '\n';
  }
  return out.str();
}

}  // namespace cometkb
