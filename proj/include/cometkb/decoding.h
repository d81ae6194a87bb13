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

#ifndef COMETKB_DECODING_H_
#define COMETKB_DECODING_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cometkb/model.h"
#include "cometkb/vocab.h"

namespace cometkb {

struct GenerationCandidate {
  std::vector<int> tokens;  // object tokens, END included when terminated
  double log_prob = 0.0;    // sum of per-step log-probabilities of `tokens`
  bool terminated = false;
};

// What a decoder needs besides the weights: the tokens it may emit and the
// object budget. Tokens outside `allowed` get probability zero.
struct DecodeContext {
  const Parameters<float>* params = nullptr;
  ModelConfig config;
  std::vector<std::uint8_t> allowed;
  int end_id = 1;
  int max_object = 15;

  DecodeContext(const Parameters<float>& params, const ModelConfig& config,
                std::vector<std::uint8_t> allowed, int end_id, int max_object);
  static DecodeContext for_vocabulary(const Parameters<float>& params,
                                      const ModelConfig& config, const Vocabulary& vocab,
                                      int max_object);
};

// Log-softmax of `logits` restricted to allowed tokens, in double; excluded
// tokens get -inf.
std::vector<double> allowed_log_probs(std::span<const float> logits,
                                      std::span<const std::uint8_t> allowed);

// Tokens preceding the object segment of an encoded tuple.
std::vector<int> decoding_prefix(const EncodedSequence& sequence);

// Argmax at every step (ties to the lowest id) until END or the cap of
// max_object words; an uncapped object then gets no END and is unterminated.
GenerationCandidate greedy(const DecodeContext& ctx, std::span<const int> prefix);

// Beam search without length normalization. Returns `beam` candidates
// (fewer only if the search space is smaller), finished first, each group
// sorted by log-probability descending.
std::vector<GenerationCandidate> beam_search(const DecodeContext& ctx,
                                             std::span<const int> prefix, int beam);

std::vector<GenerationCandidate> top_k_sample(const DecodeContext& ctx,
                                              std::span<const int> prefix, int k,
                                              int n_samples, std::uint64_t seed);

// The k token ids a top-k step may draw from, in descending probability.
std::vector<int> top_k_set(std::span<const double> log_probs, int k);

// Log-probability of `tokens` after `prefix`, recomputed through the full
// forward pass rather than the incremental cache.
double score_candidate(const DecodeContext& ctx, std::span<const int> prefix,
                       std::span<const int> tokens);

enum class DecoderKind { kGreedy, kBeam, kTopK };
std::string_view decoder_name(DecoderKind kind);
DecoderKind parse_decoder(std::string_view name);

}  // namespace cometkb

#endif  // COMETKB_DECODING_H_
