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

#include "cometkb/vocab.h"

#include <algorithm>
#include <map>

#include "cometkb/error.h"
#include "cometkb/text.h"
#include "json.hpp"

namespace cometkb {

using nlohmann::json;

Vocabulary::Vocabulary(std::vector<std::string> specials,
                       std::vector<std::string> words)
    : num_specials_(static_cast<int>(specials.size())) {
  if (specials.size() < 4 || specials[0] != kPadToken ||
      specials[1] != kEndToken || specials[2] != kUnkToken ||
      specials[3] != kBlankToken) {
    throw ConfigError("vocabulary must start with <pad>, <end>, <unk>, <blank>");
  }
  id_to_token_ = std::move(specials);
  id_to_token_.insert(id_to_token_.end(), words.begin(), words.end());
  token_to_id_.reserve(id_to_token_.size());
  for (int i = 0; i < size(); ++i) {
    if (!token_to_id_.emplace(id_to_token_[i], i).second) {
      throw ConfigError("duplicate vocabulary token '" + id_to_token_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::build(std::span<const KnowledgeTuple> tuples,
                             const SchemaSet& schemas, int min_count,
                             std::span<const std::string> extra_texts) {
  std::vector<std::string> specials = {std::string(kPadToken),
                                       std::string(kEndToken),
                                       std::string(kUnkToken),
                                       std::string(kBlankToken)};
  for (const auto& r : schemas.relations()) specials.push_back("<" + r.id + ">");
  bool any_meta = false;
  for (const auto& r : schemas.relations()) any_meta |= !r.meta_tokens.empty();
  if (any_meta) {
    for (const auto& m : meta_token_inventory()) specials.push_back(m);
  }

  std::map<std::string, long> counts;
  auto count_text = [&](std::string_view text) {
    for (auto& w : split_words(normalize_text(text))) {
      if (w != kBlankSurface) ++counts[w];
    }
  };
  for (const auto& t : tuples) {
    count_text(t.subject);
    count_text(t.object);
  }
  for (const auto& text : extra_texts) count_text(text);

  std::map<std::string, long> kept;
  for (const auto& [w, c] : counts) {
    if (c >= min_count) kept.emplace(w, c);
  }
  for (const auto& r : schemas.relations()) {
    for (const auto& w : r.surface_form) kept.emplace(w, counts.count(w) ? counts[w] : 0);
  }

  std::vector<std::pair<std::string, long>> ordered(kept.begin(), kept.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(ordered.size());
  for (auto& [w, _] : ordered) words.push_back(w);
  return Vocabulary(std::move(specials), std::move(words));
}

Vocabulary Vocabulary::from_json(std::string_view json_text) {
  try {
    const json doc = json::parse(json_text);
    return Vocabulary(doc.at("specials").get<std::vector<std::string>>(),
                      doc.at("words").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed vocabulary file: ") + e.what());
  }
}

std::string Vocabulary::to_json() const {
  json doc;
  doc["specials"] = std::vector<std::string>(id_to_token_.begin(),
                                             id_to_token_.begin() + num_specials_);
  doc["words"] = std::vector<std::string>(id_to_token_.begin() + num_specials_,
                                          id_to_token_.end());
  return doc.dump();
}

std::string Vocabulary::hash() const { return fnv1a_hex(to_json()); }

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::word_id(std::string_view word) const {
  if (word == kBlankSurface) return blank_id();
  auto id = find(word);
  if (!id || is_special(*id)) return unk_id();
  return *id;
}

int Vocabulary::special_id(std::string_view token) const {
  auto id = find(token);
  if (!id || !is_special(*id)) {
    throw ConfigError("vocabulary has no special token '" + std::string(token) + "'");
  }
  return *id;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) {
    throw ArgumentError("token id " + std::to_string(id) +
                        " outside vocabulary of size " + std::to_string(size()));
  }
  return id_to_token_[id];
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& w : split_words(normalize_text(text))) ids.push_back(word_id(w));
  return ids;
}

std::string Vocabulary::decode(std::span<const int> ids) const {
  std::vector<std::string> words;
  for (int id : ids) {
    const std::string& tok = token(id);
    if (id == pad_id() || id == end_id()) continue;
    words.push_back(id == blank_id() ? std::string(kBlankSurface) : tok);
  }
  return join_words(words);
}

std::vector<std::uint8_t> Vocabulary::generation_mask() const {
  std::vector<std::uint8_t> mask(size(), 0);
  for (int id = num_specials_; id < size(); ++id) mask[id] = 1;
  mask[end_id()] = 1;
  mask[unk_id()] = 1;
  mask[blank_id()] = 1;
  return mask;
}

Layout Layout::defaults_for(const SchemaSet& schemas, RelationMode mode,
                            bool meta_tokens) {
  Layout layout;
  const int needed = schemas.max_relation_tokens(mode, meta_tokens);
  layout.max_relation = mode == RelationMode::kLanguage ? std::max(5, needed)
                                                        : std::max(1, needed);
  return layout;
}

int EncodedSequence::target(int t) const {
  return t + 1 < length() ? tokens[t + 1] : 0;
}

int EncodedSequence::masked_count() const {
  return static_cast<int>(std::count(loss_mask.begin(), loss_mask.end(), 1));
}

EncodedSequence encode_tuple(const Vocabulary& vocab, const SchemaSet& schemas,
                             const KnowledgeTuple& tuple,
                             const EncodingOptions& options) {
  const Layout& layout = options.layout;
  const RelationSchema& schema = schemas.at(tuple.relation);

  const std::vector<int> subject = vocab.encode(tuple.subject);
  std::vector<int> relation;
  for (const auto& tok : render_relation(schema, options.mode)) {
    relation.push_back(options.mode == RelationMode::kSymbol ? vocab.special_id(tok)
                                                             : vocab.word_id(tok));
  }
  for (const auto& tok : apply_meta_tokens(schema, options.meta_tokens)) {
    relation.push_back(vocab.special_id(tok));
  }
  const std::vector<int> object = vocab.encode(tuple.object);

  auto check = [](const char* segment, std::size_t n, int limit) {
    if (static_cast<int>(n) > limit) {
      throw ConfigError(std::string(segment) + " segment has " + std::to_string(n) +
                        " tokens but the layout allows " + std::to_string(limit));
    }
  };
  check("subject", subject.size(), layout.max_subject);
  check("relation", relation.size(), layout.max_relation);
  check("object", object.size(), layout.max_object);

  EncodedSequence seq;
  seq.tokens.assign(layout.length(), vocab.pad_id());
  seq.loss_mask.assign(layout.length(), 0);
  std::copy(subject.begin(), subject.end(), seq.tokens.begin());
  std::copy(relation.begin(), relation.end(),
            seq.tokens.begin() + layout.relation_start());
  const int start = layout.object_start();
  std::copy(object.begin(), object.end(), seq.tokens.begin() + start);
  seq.tokens[start + object.size()] = vocab.end_id();

  // Position t predicts t + 1: targets are the object tokens and END.
  for (int t = start - 1; t < start + static_cast<int>(object.size()); ++t) {
    seq.loss_mask[t] = 1;
  }
  seq.subject_length = static_cast<int>(subject.size());
  seq.relation_length = static_cast<int>(relation.size());
  seq.object_length = static_cast<int>(object.size());
  seq.object_start = start;
  return seq;
}

EncodedSequence encode_text(const Vocabulary& vocab, std::string_view text,
                            int length) {
  std::vector<int> words = vocab.encode(text);
  if (words.empty()) throw DataError("empty pretraining sentence");
  if (static_cast<int>(words.size()) > length - 1) words.resize(length - 1);

  EncodedSequence seq;
  seq.tokens.assign(length, vocab.pad_id());
  seq.loss_mask.assign(length, 0);
  std::copy(words.begin(), words.end(), seq.tokens.begin());
  seq.tokens[words.size()] = vocab.end_id();
  for (std::size_t t = 0; t < words.size(); ++t) seq.loss_mask[t] = 1;
  seq.subject_length = 1;
  seq.object_length = static_cast<int>(words.size()) - 1;
  seq.object_start = 1;
  return seq;
}

}  // namespace cometkb
