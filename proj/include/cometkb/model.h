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

#ifndef COMETKB_MODEL_H_
#define COMETKB_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "cometkb/graph.h"
#include "cometkb/tensor.h"

namespace cometkb {

struct ModelConfig {
  int n_layers = 2;
  int d_model = 64;
  int n_heads = 4;
  int d_ff = 256;
  int max_seq_len = 40;
  double dropout = 0.1;
  int vocab_size = 0;

  int d_head() const { return d_model / n_heads; }
  // Throws ConfigError; `sequence_length` > 0 also checks it fits.
  void validate(int sequence_length = 0) const;

  // 2 layers, 64 wide, 4 heads: trains on a CPU in minutes.
  static ModelConfig desk(int vocab_size);
  // 12 layers, 768 wide, 12 heads, GeLU FFN of 3072, 512 positions.
  static ModelConfig paper(int vocab_size);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Weight-decay class of a parameter tensor.
enum class ParamKind { kEmbedding, kMatrix, kVector };

// Per-block slots. Attention projections are d_model x d_model with head i
// owning columns [i * d_head, (i + 1) * d_head).
template <typename Slot>
struct BlockSlots {
  Slot w_query, w_key, w_value, w_output;
  Slot attn_norm_gain, attn_norm_bias;
  Slot ffn_in_weight, ffn_in_bias, ffn_out_weight, ffn_out_bias;
  Slot ffn_norm_gain, ffn_norm_bias;
};

// All trainable tensors, or anything shaped like them (gradients, Adam
// moments, graph variables). The output projection is tied to
// token_embedding and has no slot of its own.
template <typename Slot>
struct ModelSlots {
  Slot token_embedding;     // vocab x d_model
  Slot position_embedding;  // max_seq_len x d_model
  std::vector<BlockSlots<Slot>> blocks;
};

template <typename T>
using Parameters = ModelSlots<nn::Tensor<T>>;
using ParameterVars = ModelSlots<nn::Var>;

// Calls fn(name, kind, slot) for every slot in a fixed order.
template <typename Slots, typename Fn>
void visit_slots(Slots&& slots, Fn&& fn) {
  fn(std::string("token_embedding"), ParamKind::kEmbedding, slots.token_embedding);
  fn(std::string("position_embedding"), ParamKind::kEmbedding, slots.position_embedding);
  for (std::size_t l = 0; l < slots.blocks.size(); ++l) {
    auto& b = slots.blocks[l];
    const std::string p = "blocks." + std::to_string(l) + ".";
    fn(p + "attn.w_query", ParamKind::kMatrix, b.w_query);
    fn(p + "attn.w_key", ParamKind::kMatrix, b.w_key);
    fn(p + "attn.w_value", ParamKind::kMatrix, b.w_value);
    fn(p + "attn.w_output", ParamKind::kMatrix, b.w_output);
    fn(p + "attn_norm.gain", ParamKind::kVector, b.attn_norm_gain);
    fn(p + "attn_norm.bias", ParamKind::kVector, b.attn_norm_bias);
    fn(p + "ffn.in_weight", ParamKind::kMatrix, b.ffn_in_weight);
    fn(p + "ffn.in_bias", ParamKind::kVector, b.ffn_in_bias);
    fn(p + "ffn.out_weight", ParamKind::kMatrix, b.ffn_out_weight);
    fn(p + "ffn.out_bias", ParamKind::kVector, b.ffn_out_bias);
    fn(p + "ffn_norm.gain", ParamKind::kVector, b.ffn_norm_gain);
    fn(p + "ffn_norm.bias", ParamKind::kVector, b.ffn_norm_bias);
  }
}

// Lockstep visit of two slot sets with the same block count.
template <typename SlotsA, typename SlotsB, typename Fn>
void visit_slots(SlotsA&& a, SlotsB&& b, Fn&& fn) {
  using PtrB = std::remove_reference_t<decltype((b.token_embedding))>*;
  std::vector<PtrB> second;
  visit_slots(b, [&](const std::string&, ParamKind, auto& slot) { second.push_back(&slot); });
  std::size_t i = 0;
  visit_slots(a, [&](const std::string& name, ParamKind kind, auto& slot) {
    fn(name, kind, slot, *second.at(i++));
  });
}

template <typename T>
Parameters<T> zeros_like(const Parameters<T>& params);

template <typename U, typename T>
Parameters<U> cast_parameters(const Parameters<T>& params) {
  Parameters<U> out;
  out.blocks.resize(params.blocks.size());
  visit_slots(out, params, [](const std::string&, ParamKind, nn::Tensor<U>& dst,
                              const nn::Tensor<T>& src) { dst = src.template cast<U>(); });
  return out;
}

template <typename T>
std::size_t parameter_count(const Parameters<T>& params);

// Word rows and weight matrices ~ N(0, 0.02^2); the first
// `num_special_tokens` embedding rows ~ N(0, 1); norm gains 1, biases 0.
template <typename T>
Parameters<T> init_parameters(const ModelConfig& config, int num_special_tokens,
                              std::uint64_t seed);

// Registers every tensor on the graph: as a parameter (gradient tracked) or,
// with trainable = false, as a constant.
template <typename T>
ParameterVars bind_parameters(nn::Graph<T>& graph, const Parameters<T>& params,
                              bool trainable = true);

// Reads the gradients of bound parameters after backward().
template <typename T>
Parameters<T> collect_gradients(const nn::Graph<T>& graph, const ParameterVars& vars);

struct ForwardOptions {
  bool training = false;
  std::uint64_t dropout_seed = 0;
};

// h0_t = E[token_t] + P[t] for a batch laid out as batch * seq_len rows.
template <typename T>
nn::Var input_encode(nn::Graph<T>& graph, const ParameterVars& vars,
                     const ModelConfig& config, std::span<const int> tokens,
                     int seq_len);

// softmax(q k^T / sqrt(d_k)) v for one head of one sequence; with `causal`
// the query at row i only sees keys 0..i. Dropout hits the attention weights.
template <typename T>
nn::Var attention(nn::Graph<T>& graph, nn::Var query, nn::Var key, nn::Var value,
                  bool causal, double dropout = 0.0, std::uint64_t seed = 0,
                  bool training = false);

// [H_1; ...; H_b] W_O where H_i attends with head-specific projections.
// `queries` and `memory` are seq_len-row blocks of one or more sequences.
template <typename T>
nn::Var multi_head(nn::Graph<T>& graph, const BlockSlots<nn::Var>& block,
                   const ModelConfig& config, nn::Var queries, nn::Var memory,
                   int seq_len, bool causal, const ForwardOptions& options,
                   std::uint64_t site);

// One post-norm transformer block over a batch of sequences:
// g~ = MultiAttn(h), g = LN(g~ + h), h~ = FFN(g), h' = LN(h~ + g).
template <typename T>
nn::Var transformer_block(nn::Graph<T>& graph, const BlockSlots<nn::Var>& block,
                          const ModelConfig& config, nn::Var hidden, int seq_len,
                          const ForwardOptions& options, std::uint64_t site);

// Logits [batch * seq_len, vocab]; row t scores the token at t + 1.
template <typename T>
nn::Var forward(nn::Graph<T>& graph, const ParameterVars& vars,
                const ModelConfig& config, std::span<const int> tokens, int seq_len,
                const ForwardOptions& options = {});

// Inference-mode logits without keeping a graph around.
template <typename T>
nn::Tensor<T> forward_logits(const Parameters<T>& params, const ModelConfig& config,
                             std::span<const int> tokens, int seq_len);

// Per-position evaluation that follows the recurrence directly: for each
// layer the cache holds the previous layer's outputs h^{l-1}_0..t, and the
// new position attends over all of them. Used for incremental decoding.
template <typename T>
class ActivationCache {
 public:
  ActivationCache(const Parameters<T>& params, const ModelConfig& config);

  int length() const { return length_; }
  // Feeds the token at position length() and returns next-token logits.
  std::vector<T> append(int token);
  // h^{layer}_t for t < length(); layer 0 is the input encoding.
  std::span<const T> hidden(int layer, int t) const;

 private:
  const Parameters<T>* params_;
  ModelConfig config_;
  int length_ = 0;
  // Per layer l (0..n_layers): rows of h^l, and for l < n_layers the
  // key/value projections of h^l used by block l + 1.
  std::vector<std::vector<T>> hidden_;
  std::vector<std::vector<T>> keys_;
  std::vector<std::vector<T>> values_;
};

// h^l_t from the previous layer's outputs rows 0..t (row-major, d_model
// wide). Throws ArgumentError when fewer than t + 1 rows are given.
template <typename T>
std::vector<T> transformer_block_at(const BlockSlots<nn::Tensor<T>>& block,
                                    const ModelConfig& config,
                                    std::span<const T> previous_layer, int t);

}  // namespace cometkb

#endif  // COMETKB_MODEL_H_
