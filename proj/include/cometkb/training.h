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

#ifndef COMETKB_TRAINING_H_
#define COMETKB_TRAINING_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cometkb/corpus.h"
#include "cometkb/key_value.h"
#include "cometkb/model.h"
#include "cometkb/vocab.h"

namespace cometkb {

struct TrainConfig {
  // Optimizer and schedule.
  double max_lr = 1e-3;
  int warmup_steps = 100;
  int total_steps = 2000;
  int batch_size = 32;
  double clip_norm = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.01;
  // Early stopping.
  int eval_every = 250;
  int patience = 4;
  std::uint64_t seed = 1;
  // Data regime.
  double fraction = 1.0;
  std::string relation_split = "full";
  bool meta_tokens = false;
  RelationMode mode = RelationMode::kSymbol;
  // Model shape; vocab_size is filled in from the vocabulary at run time.
  ModelConfig model;

  // Throws ConfigError naming the key for unknown keys or unparsable values.
  void set(std::string_view key, std::string_view value);
  void apply(const KeyValues& values);
  // Every field, in a fixed order, formatted so that apply() reproduces it.
  KeyValues to_key_values() const;
  void validate() const;

  // "atomic-paper", "conceptnet-paper" or "desk".
  static TrainConfig preset(std::string_view name);
  static std::vector<std::string> preset_names();
};

template <typename T>
struct OptimizerState {
  Parameters<T> first_moment;
  Parameters<T> second_moment;
  std::int64_t step = 0;

  static OptimizerState zeros_for(const Parameters<T>& params);
};

// Linear warmup from 0 to max_lr over warmup_steps, then linear decay to 0 at
// total_steps; 0 past the end.
double lr_at(std::int64_t step, const TrainConfig& config);

template <typename T>
double global_norm(const Parameters<T>& grads);

// Rescales grads in place when their global L2 norm exceeds clip_norm.
// Returns the norm before clipping.
template <typename T>
double clip_gradients(Parameters<T>& grads, double clip_norm);

// One bias-corrected Adam update of a flat buffer; `step` is 1-based.
// Decoupled weight decay (lr * weight_decay * theta) when `decay` is set.
template <typename T>
void adam_update(std::span<T> params, std::span<const T> grads, std::span<T> m,
                 std::span<T> v, std::int64_t step, double lr, const TrainConfig& config,
                 bool decay);

// Advances state.step and updates every tensor; weight decay touches only
// matrix parameters (not embeddings, gains or biases).
template <typename T>
void adam_step(Parameters<T>& params, const Parameters<T>& grads, OptimizerState<T>& state,
               double lr, const TrainConfig& config);

struct PackedBatch {
  std::vector<int> tokens;
  std::vector<int> targets;
  std::vector<std::uint8_t> mask;
  int batch = 0;
  int seq_len = 0;
};

// Throws ShapeError when sequences differ in length.
PackedBatch pack_batch(std::span<const EncodedSequence* const> sequences);
PackedBatch pack_batch(std::span<const EncodedSequence> sequences);

// Mean NLL over masked (object and END) targets of the batch.
template <typename T>
nn::Var tuple_loss(nn::Graph<T>& graph, nn::Var logits, const PackedBatch& batch);

struct NllTotal {
  double sum = 0.0;
  long count = 0;
  double mean() const { return count ? sum / count : std::numeric_limits<double>::quiet_NaN(); }
};

// Summed NLL of masked targets in inference mode, accumulated in double.
template <typename T>
NllTotal masked_nll(const Parameters<T>& params, const ModelConfig& config,
                    std::span<const EncodedSequence> sequences, int batch_size = 64);

std::vector<EncodedSequence> encode_tuples(const Vocabulary& vocab, const SchemaSet& schemas,
                                           std::span<const KnowledgeTuple> tuples,
                                           const EncodingOptions& options);

struct LossPoint {
  std::int64_t step = 0;
  double lr = 0.0;
  double train_loss = std::numeric_limits<double>::quiet_NaN();
  double dev_loss = std::numeric_limits<double>::quiet_NaN();
};

struct TrainResult {
  Parameters<float> best;
  double best_dev_loss = std::numeric_limits<double>::infinity();
  std::int64_t best_step = 0;
  std::int64_t steps_run = 0;
  bool stopped_early = false;
  std::vector<LossPoint> curve;
};

using Reporter = std::function<void(const LossPoint&)>;

// Minibatch training with dev evaluation at step 0 and every eval_every
// updates. Throws DivergenceError on a non-finite training loss.
TrainResult train(Parameters<float> init, const ModelConfig& model,
                  std::span<const EncodedSequence> train_set,
                  std::span<const EncodedSequence> dev_set, const TrainConfig& config,
                  const Reporter& reporter = {});

// Next-token language modelling over whole sentences; each line is padded or
// cut to `length` tokens. Returns the trained result for saving as an init.
TrainResult pretrain_lm(const Vocabulary& vocab, std::span<const std::string> train_text,
                        std::span<const std::string> dev_text, int length,
                        const ModelConfig& model, const TrainConfig& config,
                        const Reporter& reporter = {});

std::string loss_curve_csv(std::span<const LossPoint> curve);

}  // namespace cometkb

#endif  // COMETKB_TRAINING_H_
