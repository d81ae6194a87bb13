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

#include "cometkb/model.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "cometkb/error.h"
#include "cometkb/random.h"

namespace cometkb {

namespace {

constexpr double kNormEps = 1e-5;
constexpr double kInitStddev = 0.02;

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

template <typename T>
Eigen::Map<const RowMatrix<T>> mat(const nn::Tensor<T>& t) {
  return Eigen::Map<const RowMatrix<T>>(t.data(), t.rows(), t.cols());
}

template <typename T>
Eigen::Map<const RowVector<T>> vec(std::span<const T> v) {
  return Eigen::Map<const RowVector<T>>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <typename T>
void layer_norm_inplace(RowVector<T>& x, const nn::Tensor<T>& gain,
                        const nn::Tensor<T>& bias) {
  const auto d = x.size();
  T mean = 0;
  for (Eigen::Index c = 0; c < d; ++c) mean += x[c];
  mean /= static_cast<T>(d);
  T var = 0;
  for (Eigen::Index c = 0; c < d; ++c) var += (x[c] - mean) * (x[c] - mean);
  var /= static_cast<T>(d);
  const T rstd = T(1) / std::sqrt(var + static_cast<T>(kNormEps));
  for (Eigen::Index c = 0; c < d; ++c) x[c] = gain[c] * ((x[c] - mean) * rstd) + bias[c];
}

template <typename T>
T gelu_value(T u) {
  const T k = static_cast<T>(std::sqrt(2.0 / std::numbers::pi));
  return T(0.5) * u * (T(1) + std::tanh(k * (u + T(0.044715) * u * u * u)));
}

// Block output at one position given the position's input row and the
// key/value projections of rows 0..count-1 (the query's own row included).
template <typename T>
std::vector<T> block_output(const BlockSlots<nn::Tensor<T>>& b, const ModelConfig& cfg,
                            std::span<const T> x, std::span<const T> keys,
                            std::span<const T> values, int count) {
  const int d = cfg.d_model, dk = cfg.d_head();
  const RowVector<T> input = vec(x);
  const RowVector<T> query = input * mat(b.w_query);
  const Eigen::Map<const RowMatrix<T>> k(keys.data(), count, d);
  const Eigen::Map<const RowMatrix<T>> v(values.data(), count, d);
  const T scale = T(1) / std::sqrt(static_cast<T>(dk));

  RowVector<T> heads(d);
  std::vector<T> weights(count);
  for (int h = 0; h < cfg.n_heads; ++h) {
    T peak = -std::numeric_limits<T>::infinity();
    for (int j = 0; j < count; ++j) {
      weights[j] = query.segment(h * dk, dk).dot(k.row(j).segment(h * dk, dk)) * scale;
      peak = std::max(peak, weights[j]);
    }
    T total = 0;
    for (int j = 0; j < count; ++j) {
      weights[j] = std::exp(weights[j] - peak);
      total += weights[j];
    }
    RowVector<T> mixed = RowVector<T>::Zero(dk);
    for (int j = 0; j < count; ++j) mixed += (weights[j] / total) * v.row(j).segment(h * dk, dk);
    heads.segment(h * dk, dk) = mixed;
  }
  RowVector<T> g = heads * mat(b.w_output) + input;
  layer_norm_inplace(g, b.attn_norm_gain, b.attn_norm_bias);

  RowVector<T> inner = g * mat(b.ffn_in_weight) + vec(b.ffn_in_bias.values());
  for (Eigen::Index i = 0; i < inner.size(); ++i) inner[i] = gelu_value(inner[i]);
  RowVector<T> out = inner * mat(b.ffn_out_weight) + vec(b.ffn_out_bias.values()) + g;
  layer_norm_inplace(out, b.ffn_norm_gain, b.ffn_norm_bias);
  return std::vector<T>(out.data(), out.data() + out.size());
}

}  // namespace

void ModelConfig::validate(int sequence_length) const {
  auto fail = [](const std::string& what) { throw ConfigError("model config: " + what); };
  if (n_layers < 1) fail("n_layers must be >= 1");
  if (d_model < 1 || n_heads < 1 || d_ff < 1) fail("sizes must be positive");
  if (d_model % n_heads != 0) {
    fail("d_model " + std::to_string(d_model) + " not divisible by n_heads " +
         std::to_string(n_heads));
  }
  if (max_seq_len < 1) fail("max_seq_len must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (vocab_size < 1) fail("vocab_size must be >= 1");
  if (sequence_length > max_seq_len) {
    fail("sequence length " + std::to_string(sequence_length) + " exceeds max_seq_len " +
         std::to_string(max_seq_len));
  }
}

ModelConfig ModelConfig::desk(int vocab_size) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  return c;
}

ModelConfig ModelConfig::paper(int vocab_size) {
  ModelConfig c;
  c.n_layers = 12;
  c.d_model = 768;
  c.n_heads = 12;
  c.d_ff = 3072;
  c.max_seq_len = 512;
  c.dropout = 0.1;
  c.vocab_size = vocab_size;
  return c;
}

template <typename T>
Parameters<T> zeros_like(const Parameters<T>& params) {
  Parameters<T> out;
  out.blocks.resize(params.blocks.size());
  visit_slots(out, params, [](const std::string&, ParamKind, nn::Tensor<T>& dst,
                              const nn::Tensor<T>& src) { dst = nn::Tensor<T>(src.shape()); });
  return out;
}

template <typename T>
std::size_t parameter_count(const Parameters<T>& params) {
  std::size_t n = 0;
  visit_slots(params, [&](const std::string&, ParamKind, const nn::Tensor<T>& t) { n += t.size(); });
  return n;
}

template <typename T>
Parameters<T> init_parameters(const ModelConfig& config, int num_special_tokens,
                              std::uint64_t seed) {
  config.validate();
  const int d = config.d_model;
  Parameters<T> p;
  p.token_embedding = nn::Tensor<T>({config.vocab_size, d});
  p.position_embedding = nn::Tensor<T>({config.max_seq_len, d});
  p.blocks.resize(config.n_layers);
  for (auto& b : p.blocks) {
    b.w_query = nn::Tensor<T>({d, d});
    b.w_key = nn::Tensor<T>({d, d});
    b.w_value = nn::Tensor<T>({d, d});
    b.w_output = nn::Tensor<T>({d, d});
    b.attn_norm_gain = nn::Tensor<T>({d}, T(1));
    b.attn_norm_bias = nn::Tensor<T>({d});
    b.ffn_in_weight = nn::Tensor<T>({d, config.d_ff});
    b.ffn_in_bias = nn::Tensor<T>({config.d_ff});
    b.ffn_out_weight = nn::Tensor<T>({config.d_ff, d});
    b.ffn_out_bias = nn::Tensor<T>({d});
    b.ffn_norm_gain = nn::Tensor<T>({d}, T(1));
    b.ffn_norm_bias = nn::Tensor<T>({d});
  }

  Rng rng(seed);
  visit_slots(p, [&](const std::string& name, ParamKind kind, nn::Tensor<T>& t) {
    if (kind == ParamKind::kVector) return;
    const bool token_table = name == "token_embedding";
    for (int r = 0; r < t.rows(); ++r) {
      const double stddev = token_table && r < num_special_tokens ? 1.0 : kInitStddev;
      for (T& v : t.row(r)) v = static_cast<T>(stddev * rng.normal());
    }
  });
  return p;
}

template <typename T>
ParameterVars bind_parameters(nn::Graph<T>& graph, const Parameters<T>& params,
                              bool trainable) {
  ParameterVars vars;
  vars.blocks.resize(params.blocks.size());
  visit_slots(vars, params, [&](const std::string&, ParamKind, nn::Var& v,
                                const nn::Tensor<T>& t) {
    v = trainable ? graph.parameter(t) : graph.constant(t);
  });
  return vars;
}

template <typename T>
Parameters<T> collect_gradients(const nn::Graph<T>& graph, const ParameterVars& vars) {
  Parameters<T> grads;
  grads.blocks.resize(vars.blocks.size());
  visit_slots(grads, vars, [&](const std::string&, ParamKind, nn::Tensor<T>& g,
                               const nn::Var& v) { g = graph.grad(v); });
  return grads;
}

template <typename T>
nn::Var input_encode(nn::Graph<T>& graph, const ParameterVars& vars,
                     const ModelConfig& config, std::span<const int> tokens,
                     int seq_len) {
  if (seq_len < 1 || tokens.size() % static_cast<std::size_t>(seq_len) != 0) {
    throw ShapeError(std::to_string(tokens.size()) + " tokens do not form rows of " +
                     std::to_string(seq_len));
  }
  if (seq_len > config.max_seq_len) {
    throw ArgumentError("input of length " + std::to_string(seq_len) +
                        " exceeds max_seq_len " + std::to_string(config.max_seq_len));
  }
  std::vector<int> positions(tokens.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i % seq_len);
  nn::Var words = graph.gather_rows(vars.token_embedding, tokens);
  nn::Var where = graph.gather_rows(vars.position_embedding, positions);
  return graph.add(words, where);
}

template <typename T>
nn::Var attention(nn::Graph<T>& graph, nn::Var query, nn::Var key, nn::Var value,
                  bool causal, double dropout, std::uint64_t seed, bool training) {
  const int dk = graph.value(query).cols();
  nn::Var scores = graph.scale(graph.matmul(query, key, /*transpose_b=*/true),
                               T(1) / std::sqrt(static_cast<T>(dk)));
  if (causal) scores = graph.causal_mask(scores);
  nn::Var weights = graph.softmax(scores);
  weights = graph.dropout(weights, static_cast<T>(dropout), seed, training);
  return graph.matmul(weights, value);
}

template <typename T>
nn::Var multi_head(nn::Graph<T>& graph, const BlockSlots<nn::Var>& block,
                   const ModelConfig& config, nn::Var queries, nn::Var memory,
                   int seq_len, bool causal, const ForwardOptions& options,
                   std::uint64_t site) {
  const int rows = graph.value(queries).rows();
  if (rows != graph.value(memory).rows() || rows % seq_len != 0) {
    throw ShapeError("multi_head: query/memory rows do not match sequence length");
  }
  const int batch = rows / seq_len, dk = config.d_head();
  nn::Var q = graph.matmul(queries, block.w_query);
  nn::Var k = graph.matmul(memory, block.w_key);
  nn::Var v = graph.matmul(memory, block.w_value);

  std::vector<nn::Var> sequences;
  std::vector<nn::Var> heads(config.n_heads);
  for (int b = 0; b < batch; ++b) {
    for (int h = 0; h < config.n_heads; ++h) {
      const std::uint64_t seed =
          derive_seed(options.dropout_seed, site * 1000003ULL + std::uint64_t(b) * 131 + h);
      heads[h] = attention(graph, graph.slice(q, b * seq_len, seq_len, h * dk, dk),
                           graph.slice(k, b * seq_len, seq_len, h * dk, dk),
                           graph.slice(v, b * seq_len, seq_len, h * dk, dk), causal,
                           config.dropout, seed, options.training);
    }
    sequences.push_back(graph.concat_cols(heads));
  }
  return graph.matmul(graph.concat_rows(sequences), block.w_output);
}

template <typename T>
nn::Var transformer_block(nn::Graph<T>& graph, const BlockSlots<nn::Var>& block,
                          const ModelConfig& config, nn::Var hidden, int seq_len,
                          const ForwardOptions& options, std::uint64_t site) {
  const T rate = static_cast<T>(config.dropout);
  auto seed = [&](std::uint64_t k) { return derive_seed(options.dropout_seed, site * 7919 + k); };

  nn::Var attended = multi_head(graph, block, config, hidden, hidden, seq_len,
                                /*causal=*/true, options, site);
  attended = graph.dropout(attended, rate, seed(1), options.training);
  nn::Var g = graph.layer_norm(graph.add(attended, hidden), block.attn_norm_gain,
                               block.attn_norm_bias, static_cast<T>(kNormEps));
  nn::Var inner = graph.gelu(graph.add_row(graph.matmul(g, block.ffn_in_weight),
                                           block.ffn_in_bias));
  nn::Var ffn = graph.add_row(graph.matmul(inner, block.ffn_out_weight), block.ffn_out_bias);
  ffn = graph.dropout(ffn, rate, seed(2), options.training);
  return graph.layer_norm(graph.add(ffn, g), block.ffn_norm_gain, block.ffn_norm_bias,
                          static_cast<T>(kNormEps));
}

template <typename T>
nn::Var forward(nn::Graph<T>& graph, const ParameterVars& vars,
                const ModelConfig& config, std::span<const int> tokens, int seq_len,
                const ForwardOptions& options) {
  nn::Var h = input_encode(graph, vars, config, tokens, seq_len);
  h = graph.dropout(h, static_cast<T>(config.dropout),
                    derive_seed(options.dropout_seed, 0), options.training);
  for (std::size_t l = 0; l < vars.blocks.size(); ++l) {
    h = transformer_block(graph, vars.blocks[l], config, h, seq_len, options, l + 1);
  }
  return graph.matmul(h, vars.token_embedding, /*transpose_b=*/true);
}

template <typename T>
nn::Tensor<T> forward_logits(const Parameters<T>& params, const ModelConfig& config,
                             std::span<const int> tokens, int seq_len) {
  nn::Graph<T> graph(/*check_finite=*/false);
  const ParameterVars vars = bind_parameters(graph, params, /*trainable=*/false);
  return graph.value(forward(graph, vars, config, tokens, seq_len));
}

template <typename T>
ActivationCache<T>::ActivationCache(const Parameters<T>& params, const ModelConfig& config)
    : params_(&params),
      config_(config),
      hidden_(config.n_layers + 1),
      keys_(config.n_layers),
      values_(config.n_layers) {
  config_.validate();
  if (static_cast<int>(params.blocks.size()) != config.n_layers) {
    throw ConfigError("parameters have " + std::to_string(params.blocks.size()) +
                      " blocks, config expects " + std::to_string(config.n_layers));
  }
}

template <typename T>
std::vector<T> ActivationCache<T>::append(int token) {
  const int d = config_.d_model;
  if (length_ >= config_.max_seq_len) {
    throw ArgumentError("activation cache is full at max_seq_len " +
                        std::to_string(config_.max_seq_len));
  }
  if (token < 0 || token >= config_.vocab_size) {
    throw ArgumentError("token id " + std::to_string(token) + " outside vocabulary");
  }
  const int t = length_;
  {
    auto e = params_->token_embedding.row(token);
    auto p = params_->position_embedding.row(t);
    for (int c = 0; c < d; ++c) hidden_[0].push_back(e[c] + p[c]);
  }
  for (int l = 0; l < config_.n_layers; ++l) {
    const auto& block = params_->blocks[l];
    std::span<const T> x(hidden_[l].data() + std::size_t(t) * d, d);
    const RowVector<T> k = vec(x) * mat(block.w_key);
    const RowVector<T> v = vec(x) * mat(block.w_value);
    keys_[l].insert(keys_[l].end(), k.data(), k.data() + d);
    values_[l].insert(values_[l].end(), v.data(), v.data() + d);
    std::vector<T> out = block_output(block, config_, x, std::span<const T>(keys_[l]),
                                      std::span<const T>(values_[l]), t + 1);
    hidden_[l + 1].insert(hidden_[l + 1].end(), out.begin(), out.end());
  }
  ++length_;
  std::span<const T> top(hidden_.back().data() + std::size_t(t) * d, d);
  const RowVector<T> logits = vec(top) * mat(params_->token_embedding).transpose();
  return std::vector<T>(logits.data(), logits.data() + logits.size());
}

template <typename T>
std::span<const T> ActivationCache<T>::hidden(int layer, int t) const {
  if (layer < 0 || layer > config_.n_layers || t < 0 || t >= length_) {
    throw ArgumentError("activation cache has no entry for layer " + std::to_string(layer) +
                        ", position " + std::to_string(t));
  }
  const int d = config_.d_model;
  return {hidden_[layer].data() + std::size_t(t) * d, std::size_t(d)};
}

template <typename T>
std::vector<T> transformer_block_at(const BlockSlots<nn::Tensor<T>>& block,
                                    const ModelConfig& config,
                                    std::span<const T> previous_layer, int t) {
  const int d = config.d_model;
  const int available = static_cast<int>(previous_layer.size() / d);
  if (t < 0 || available < t + 1) {
    throw ArgumentError("transformer block at position " + std::to_string(t) + " needs " +
                        std::to_string(t + 1) + " cached rows, got " +
                        std::to_string(available));
  }
  const Eigen::Map<const RowMatrix<T>> rows(previous_layer.data(), t + 1, d);
  const RowMatrix<T> keys = rows * mat(block.w_key);
  const RowMatrix<T> values = rows * mat(block.w_value);
  return block_output(block, config, previous_layer.subspan(std::size_t(t) * d, d),
                      std::span<const T>(keys.data(), keys.size()),
                      std::span<const T>(values.data(), values.size()), t + 1);
}

#define COMETKB_INSTANTIATE(T)                                                         \
  template Parameters<T> zeros_like(const Parameters<T>&);                             \
  template std::size_t parameter_count(const Parameters<T>&);                          \
  template Parameters<T> init_parameters<T>(const ModelConfig&, int, std::uint64_t);   \
  template ParameterVars bind_parameters(nn::Graph<T>&, const Parameters<T>&, bool);   \
  template Parameters<T> collect_gradients(const nn::Graph<T>&, const ParameterVars&); \
  template nn::Var input_encode(nn::Graph<T>&, const ParameterVars&, const ModelConfig&, \
                                std::span<const int>, int);                            \
  template nn::Var attention(nn::Graph<T>&, nn::Var, nn::Var, nn::Var, bool, double,   \
                             std::uint64_t, bool);                                     \
  template nn::Var multi_head(nn::Graph<T>&, const BlockSlots<nn::Var>&,               \
                              const ModelConfig&, nn::Var, nn::Var, int, bool,         \
                              const ForwardOptions&, std::uint64_t);                   \
  template nn::Var transformer_block(nn::Graph<T>&, const BlockSlots<nn::Var>&,        \
                                     const ModelConfig&, nn::Var, int,                 \
                                     const ForwardOptions&, std::uint64_t);            \
  template nn::Var forward(nn::Graph<T>&, const ParameterVars&, const ModelConfig&,    \
                           std::span<const int>, int, const ForwardOptions&);          \
  template nn::Tensor<T> forward_logits(const Parameters<T>&, const ModelConfig&,      \
                                        std::span<const int>, int);                    \
  template class ActivationCache<T>;                                                   \
  template std::vector<T> transformer_block_at(const BlockSlots<nn::Tensor<T>>&,       \
                                               const ModelConfig&, std::span<const T>, \
                                               int);

COMETKB_INSTANTIATE(float)
COMETKB_INSTANTIATE(double)

#undef COMETKB_INSTANTIATE

}  // namespace cometkb
