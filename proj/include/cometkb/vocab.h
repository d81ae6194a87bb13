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

#ifndef COMETKB_VOCAB_H_
#define COMETKB_VOCAB_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cometkb/corpus.h"

namespace cometkb {

// Special token spellings. The blank token stands for the "___" placeholder
// that ATOMIC events use.
inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kEndToken = "<end>";
inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kBlankToken = "<blank>";
inline constexpr std::string_view kBlankSurface = "___";

// Token <-> id map. Special tokens come first (pad, end, unk, blank, one
// symbol per relation, meta-tokens), then words by descending corpus
// frequency with lexicographic tie-breaking. Immutable once built.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> specials, std::vector<std::string> words);

  // Counts words over subjects and objects of `tuples` plus every line of
  // `extra_texts`; keeps words with count >= min_count. Relation surface-form
  // words are always kept so language-mode rendering never yields UNK.
  static Vocabulary build(std::span<const KnowledgeTuple> tuples,
                          const SchemaSet& schemas, int min_count,
                          std::span<const std::string> extra_texts = {});

  static Vocabulary from_json(std::string_view json_text);
  // {"specials": [...], "words": [...]}; ids are implied by order.
  std::string to_json() const;
  // FNV-1a of to_json(); identifies the vocabulary inside checkpoints.
  std::string hash() const;

  int size() const { return static_cast<int>(id_to_token_.size()); }
  int num_specials() const { return num_specials_; }
  int num_words() const { return size() - num_specials_; }

  int pad_id() const { return 0; }
  int end_id() const { return 1; }
  int unk_id() const { return 2; }
  int blank_id() const { return 3; }
  bool is_special(int id) const { return id >= 0 && id < num_specials_; }

  std::optional<int> find(std::string_view token) const;
  // Word id, UNK for unknown words; "___" maps to the blank token.
  int word_id(std::string_view word) const;
  // Throws ConfigError if the special token is absent.
  int special_id(std::string_view token) const;
  // Throws ArgumentError for ids outside [0, size()).
  const std::string& token(int id) const;

  // Normalizes, splits on whitespace and maps each word.
  std::vector<int> encode(std::string_view text) const;
  // Joins tokens with single spaces, dropping pad and end. The blank token
  // decodes to "___". Throws ArgumentError on out-of-range ids.
  std::string decode(std::span<const int> ids) const;

  // 1 for tokens a decoder may emit: words, end, unk and blank.
  std::vector<std::uint8_t> generation_mask() const;

  const std::vector<std::string>& tokens() const { return id_to_token_; }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
  int num_specials_ = 0;
};

// Segment widths of the fixed tuple layout:
// [subject | pad..][relation (+meta) | pad..][object, end | pad..].
struct Layout {
  int max_subject = 17;
  int max_relation = 5;
  int max_object = 15;

  int length() const { return max_subject + max_relation + max_object + 1; }
  int relation_start() const { return max_subject; }
  int object_start() const { return max_subject + max_relation; }

  // Default widths: relation width covers the schema's longest rendering.
  static Layout defaults_for(const SchemaSet& schemas, RelationMode mode,
                             bool meta_tokens);
};

struct EncodingOptions {
  Layout layout;
  RelationMode mode = RelationMode::kSymbol;
  bool meta_tokens = false;
};

// A tuple laid out for the model. `loss_mask[t]` is 1 when the token at
// t + 1 (the prediction target of position t) is an object token or END.
struct EncodedSequence {
  std::vector<int> tokens;
  std::vector<std::uint8_t> loss_mask;
  int subject_length = 0;
  int relation_length = 0;
  int object_length = 0;
  // Index where the object segment starts (== layout.object_start() for
  // tuples; 1 for plain-text sequences).
  int object_start = 0;

  int length() const { return static_cast<int>(tokens.size()); }
  int target(int t) const;  // token at t + 1, pad past the end
  int masked_count() const;
};

// Throws ConfigError when a rendered segment overflows the layout.
EncodedSequence encode_tuple(const Vocabulary& vocab, const SchemaSet& schemas,
                             const KnowledgeTuple& tuple,
                             const EncodingOptions& options);

// Plain next-token sequence for language-model pretraining: every word after
// the first plus END is a target. Words beyond `length - 1` are truncated.
EncodedSequence encode_text(const Vocabulary& vocab, std::string_view text,
                            int length);

}  // namespace cometkb

#endif  // COMETKB_VOCAB_H_
