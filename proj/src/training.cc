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

#include "cometkb/training.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cometkb/error.h"
#include "cometkb/random.h"

namespace cometkb {

namespace {

std::string format_number(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

template <typename Number>
Number parse_number(std::string_view key, std::string_view text) {
  Number value{};
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" +
                      std::string(text) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("config key '" + std::string(key) + "': expected true or false, got '" +
                    std::string(text) + "'");
}

constexpr std::uint64_t kShuffleStream = 0x5348554646ULL;

}  // namespace

void TrainConfig::set(std::string_view key, std::string_view value) {
  if (key == "max_lr") max_lr = parse_number<double>(key, value);
  else if (key == "warmup_steps") warmup_steps = parse_number<int>(key, value);
  else if (key == "total_steps") total_steps = parse_number<int>(key, value);
  else if (key == "batch_size") batch_size = parse_number<int>(key, value);
  else if (key == "clip_norm") clip_norm = parse_number<double>(key, value);
  else if (key == "beta1") beta1 = parse_number<double>(key, value);
  else if (key == "beta2") beta2 = parse_number<double>(key, value);
  else if (key == "adam_eps") adam_eps = parse_number<double>(key, value);
  else if (key == "weight_decay") weight_decay = parse_number<double>(key, value);
  else if (key == "eval_every") eval_every = parse_number<int>(key, value);
  else if (key == "patience") patience = parse_number<int>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "fraction") fraction = parse_number<double>(key, value);
  else if (key == "relation_split") relation_split = std::string(value);
  else if (key == "meta_tokens") meta_tokens = parse_bool(key, value);
  else if (key == "relation_mode") {
    try {
      mode = parse_relation_mode(value);
    } catch (const Error& e) {
      throw ConfigError("config key 'relation_mode': " + std::string(e.what()));
    }
  }
  else if (key == "n_layers") model.n_layers = parse_number<int>(key, value);
  else if (key == "d_model") model.d_model = parse_number<int>(key, value);
  else if (key == "n_heads") model.n_heads = parse_number<int>(key, value);
  else if (key == "d_ff") model.d_ff = parse_number<int>(key, value);
  else if (key == "max_seq_len") model.max_seq_len = parse_number<int>(key, value);
  else if (key == "dropout") model.dropout = parse_number<double>(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void TrainConfig::apply(const KeyValues& values) {
  for (const auto& [k, v] : values) set(k, v);
}

KeyValues TrainConfig::to_key_values() const {
  return {
      {"max_lr", format_number(max_lr)},
      {"warmup_steps", std::to_string(warmup_steps)},
      {"total_steps", std::to_string(total_steps)},
      {"batch_size", std::to_string(batch_size)},
      {"clip_norm", format_number(clip_norm)},
      {"beta1", format_number(beta1)},
      {"beta2", format_number(beta2)},
      {"adam_eps", format_number(adam_eps)},
      {"weight_decay", format_number(weight_decay)},
      {"eval_every", std::to_string(eval_every)},
      {"patience", std::to_string(patience)},
      {"seed", std::to_string(seed)},
      {"fraction", format_number(fraction)},
      {"relation_split", relation_split},
      {"meta_tokens", meta_tokens ? "true" : "false"},
      {"relation_mode", std::string(relation_mode_name(mode))},
      {"n_layers", std::to_string(model.n_layers)},
      {"d_model", std::to_string(model.d_model)},
      {"n_heads", std::to_string(model.n_heads)},
      {"d_ff", std::to_string(model.d_ff)},
      {"max_seq_len", std::to_string(model.max_seq_len)},
      {"dropout", format_number(model.dropout)},
  };
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("train config: " + what); };
  if (!(max_lr > 0)) fail("max_lr must be positive");
  if (warmup_steps < 0) fail("warmup_steps must be >= 0");
  if (total_steps < 1) fail("total_steps must be >= 1");
  if (warmup_steps >= total_steps) fail("warmup_steps must be < total_steps");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(clip_norm > 0)) fail("clip_norm must be positive");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) fail("betas must lie in [0, 1)");
  if (!(adam_eps > 0)) fail("adam_eps must be positive");
  if (weight_decay < 0) fail("weight_decay must be >= 0");
  if (eval_every < 1) fail("eval_every must be >= 1");
  if (patience < 0) fail("patience must be >= 0");
  if (!(fraction > 0 && fraction <= 1)) fail("fraction must lie in (0, 1]");
  const auto names = relation_split_names();
  if (std::find(names.begin(), names.end(), relation_split) == names.end()) {
    fail("unknown relation_split '" + relation_split + "'");
  }
  ModelConfig m = model;
  if (m.vocab_size == 0) m.vocab_size = 1;
  m.validate();
}

TrainConfig TrainConfig::preset(std::string_view name) {
  TrainConfig c;
  if (name == "desk") return c;
  if (name == "atomic-paper" || name == "conceptnet-paper") {
    c.batch_size = 64;
    c.clip_norm = 1.0;
    c.model = ModelConfig::paper(0);
    c.model.dropout = 0.1;
    c.eval_every = 1000;
    if (name == "atomic-paper") {
      c.max_lr = 6.25e-5;
      c.warmup_steps = 100;
      c.total_steps = 50000;
    } else {
      c.max_lr = 1e-5;
      c.warmup_steps = 200;
      c.total_steps = 100000;
      c.mode = RelationMode::kLanguage;
    }
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> TrainConfig::preset_names() {
  return {"atomic-paper", "conceptnet-paper", "desk"};
}

template <typename T>
OptimizerState<T> OptimizerState<T>::zeros_for(const Parameters<T>& params) {
  return OptimizerState{zeros_like(params), zeros_like(params), 0};
}

double lr_at(std::int64_t step, const TrainConfig& config) {
  if (step <= 0) return 0.0;
  if (step < config.warmup_steps) {
    return config.max_lr * static_cast<double>(step) / config.warmup_steps;
  }
  if (step >= config.total_steps) return 0.0;
  const double span = config.total_steps - config.warmup_steps;
  return config.max_lr * static_cast<double>(config.total_steps - step) / span;
}

template <typename T>
double global_norm(const Parameters<T>& grads) {
  double total = 0.0;
  visit_slots(grads, [&](const std::string&, ParamKind, const nn::Tensor<T>& g) {
    for (T v : g.values()) total += static_cast<double>(v) * v;
  });
  return std::sqrt(total);
}

template <typename T>
double clip_gradients(Parameters<T>& grads, double clip_norm) {
  if (!(clip_norm > 0)) throw ArgumentError("clip_norm must be positive");
  const double norm = global_norm(grads);
  if (norm > clip_norm) {
    const T factor = static_cast<T>(clip_norm / norm);
    visit_slots(grads, [&](const std::string&, ParamKind, nn::Tensor<T>& g) {
      for (T& v : g.values()) v *= factor;
    });
  }
  return norm;
}

template <typename T>
void adam_update(std::span<T> params, std::span<const T> grads, std::span<T> m,
                 std::span<T> v, std::int64_t step, double lr, const TrainConfig& config,
                 bool decay) {
  if (grads.size() != params.size() || m.size() != params.size() ||
      v.size() != params.size()) {
    throw ShapeError("adam_update: buffers of " + std::to_string(params.size()) + ", " +
                     std::to_string(grads.size()) + ", " + std::to_string(m.size()) + ", " +
                     std::to_string(v.size()) + " elements");
  }
  if (step < 1) throw ArgumentError("adam_update: step must be >= 1");
  const double b1 = config.beta1, b2 = config.beta2;
  const double correct1 = 1.0 - std::pow(b1, static_cast<double>(step));
  const double correct2 = 1.0 - std::pow(b2, static_cast<double>(step));
  const double shrink = decay ? lr * config.weight_decay : 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double mi = b1 * m[i] + (1.0 - b1) * g;
    const double vi = b2 * v[i] + (1.0 - b2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double update = (mi / correct1) / (std::sqrt(vi / correct2) + config.adam_eps);
    params[i] = static_cast<T>(params[i] - lr * update - shrink * params[i]);
  }
}

template <typename T>
void adam_step(Parameters<T>& params, const Parameters<T>& grads, OptimizerState<T>& state,
               double lr, const TrainConfig& config) {
  ++state.step;
  std::vector<nn::Tensor<T>*> p, m, v;
  visit_slots(params, [&](const std::string&, ParamKind, nn::Tensor<T>& t) { p.push_back(&t); });
  visit_slots(state.first_moment,
              [&](const std::string&, ParamKind, nn::Tensor<T>& t) { m.push_back(&t); });
  visit_slots(state.second_moment,
              [&](const std::string&, ParamKind, nn::Tensor<T>& t) { v.push_back(&t); });
  std::size_t i = 0;
  visit_slots(grads, [&](const std::string& name, ParamKind kind, const nn::Tensor<T>& g) {
    if (i >= p.size() || !p[i]->same_shape(g) || !m[i]->same_shape(g) || !v[i]->same_shape(g)) {
      throw ShapeError("adam_step: gradient " + name + " " + g.shape_string() +
                       " does not match its parameter");
    }
    adam_update<T>(p[i]->values(), g.values(), m[i]->values(), v[i]->values(), state.step, lr,
                   config, kind == ParamKind::kMatrix);
    ++i;
  });
  if (i != p.size()) throw ShapeError("adam_step: gradient set does not match parameters");
}

PackedBatch pack_batch(std::span<const EncodedSequence* const> sequences) {
  if (sequences.empty()) throw ArgumentError("empty batch");
  PackedBatch b;
  b.batch = static_cast<int>(sequences.size());
  b.seq_len = sequences.front()->length();
  b.tokens.reserve(std::size_t(b.batch) * b.seq_len);
  for (const EncodedSequence* s : sequences) {
    if (s->length() != b.seq_len) {
      throw ShapeError("batch mixes sequence lengths " + std::to_string(b.seq_len) + " and " +
                       std::to_string(s->length()));
    }
    b.tokens.insert(b.tokens.end(), s->tokens.begin(), s->tokens.end());
    for (int t = 0; t < b.seq_len; ++t) b.targets.push_back(s->target(t));
    b.mask.insert(b.mask.end(), s->loss_mask.begin(), s->loss_mask.end());
  }
  return b;
}

PackedBatch pack_batch(std::span<const EncodedSequence> sequences) {
  std::vector<const EncodedSequence*> ptrs;
  for (const auto& s : sequences) ptrs.push_back(&s);
  return pack_batch(std::span<const EncodedSequence* const>(ptrs));
}

template <typename T>
nn::Var tuple_loss(nn::Graph<T>& graph, nn::Var logits, const PackedBatch& batch) {
  if (std::none_of(batch.mask.begin(), batch.mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw ArgumentError("batch has no object or END targets");
  }
  return graph.cross_entropy(logits, batch.targets, batch.mask);
}

template <typename T>
NllTotal masked_nll(const Parameters<T>& params, const ModelConfig& config,
                    std::span<const EncodedSequence> sequences, int batch_size) {
  NllTotal total;
  for (std::size_t begin = 0; begin < sequences.size(); begin += batch_size) {
    const auto chunk =
        sequences.subspan(begin, std::min<std::size_t>(batch_size, sequences.size() - begin));
    const PackedBatch batch = pack_batch(chunk);
    const nn::Tensor<T> logits = forward_logits(params, config, batch.tokens, batch.seq_len);
    const int vocab = logits.cols();
    for (int r = 0; r < logits.rows(); ++r) {
      if (!batch.mask[r]) continue;
      const auto row = logits.row(r);
      double peak = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < vocab; ++c) peak = std::max(peak, static_cast<double>(row[c]));
      double z = 0.0;
      for (int c = 0; c < vocab; ++c) z += std::exp(static_cast<double>(row[c]) - peak);
      total.sum += peak + std::log(z) - static_cast<double>(row[batch.targets[r]]);
      ++total.count;
    }
  }
  return total;
}

std::vector<EncodedSequence> encode_tuples(const Vocabulary& vocab, const SchemaSet& schemas,
                                           std::span<const KnowledgeTuple> tuples,
                                           const EncodingOptions& options) {
  std::vector<EncodedSequence> out;
  out.reserve(tuples.size());
  for (const auto& t : tuples) out.push_back(encode_tuple(vocab, schemas, t, options));
  return out;
}

TrainResult train(Parameters<float> init, const ModelConfig& model,
                  std::span<const EncodedSequence> train_set,
                  std::span<const EncodedSequence> dev_set, const TrainConfig& config,
                  const Reporter& reporter) {
  config.validate();
  if (train_set.empty()) throw ArgumentError("training set is empty");
  if (dev_set.empty()) throw ArgumentError("dev set is empty");
  model.validate(train_set.front().length());

  TrainResult result;
  Parameters<float> params = std::move(init);
  OptimizerState<float> state = OptimizerState<float>::zeros_for(params);
  Rng shuffle_rng(derive_seed(config.seed, kShuffleStream));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  auto emit = [&](const LossPoint& point) {
    result.curve.push_back(point);
    if (reporter) reporter(point);
  };

  LossPoint start;
  start.dev_loss = masked_nll(params, model, dev_set).mean();
  result.best_dev_loss = start.dev_loss;
  result.best = params;
  emit(start);

  int evals_without_gain = 0;
  std::vector<const EncodedSequence*> picked;
  for (std::int64_t step = 0; step < config.total_steps; ++step) {
    picked.clear();
    for (int i = 0; i < config.batch_size; ++i) {
      if (cursor == order.size()) {
        for (std::size_t j = order.size(); j > 1; --j) {
          std::swap(order[j - 1], order[shuffle_rng.below(j)]);
        }
        cursor = 0;
      }
      picked.push_back(&train_set[order[cursor++]]);
    }
    const PackedBatch batch = pack_batch(std::span<const EncodedSequence* const>(picked));

    nn::Graph<float> graph(/*check_finite=*/false);
    const ParameterVars vars = bind_parameters(graph, params);
    ForwardOptions options{.training = true, .dropout_seed = derive_seed(config.seed, step + 1)};
    const nn::Var logits = forward(graph, vars, model, batch.tokens, batch.seq_len, options);
    const nn::Var loss = tuple_loss(graph, logits, batch);
    const double loss_value = graph.value(loss)[0];
    if (!std::isfinite(loss_value)) throw DivergenceError(step);
    graph.backward(loss);
    Parameters<float> grads = collect_gradients(graph, vars);
    clip_gradients(grads, config.clip_norm);
    const double lr = lr_at(step + 1, config);
    adam_step(params, grads, state, lr, config);

    LossPoint point;
    point.step = step + 1;
    point.lr = lr;
    point.train_loss = loss_value;
    const bool evaluate = point.step % config.eval_every == 0 || point.step == config.total_steps;
    if (evaluate) {
      point.dev_loss = masked_nll(params, model, dev_set).mean();
      if (!std::isfinite(point.dev_loss)) throw DivergenceError(point.step);
    }
    emit(point);
    result.steps_run = point.step;
    if (evaluate) {
      if (point.dev_loss < result.best_dev_loss) {
        result.best_dev_loss = point.dev_loss;
        result.best_step = point.step;
        result.best = params;
        evals_without_gain = 0;
      } else if (++evals_without_gain > config.patience) {
        result.stopped_early = true;
        break;
      }
    }
  }
  return result;
}

TrainResult pretrain_lm(const Vocabulary& vocab, std::span<const std::string> train_text,
                        std::span<const std::string> dev_text, int length,
                        const ModelConfig& model, const TrainConfig& config,
                        const Reporter& reporter) {
  if (model.vocab_size != vocab.size()) {
    throw VocabMismatchError("model vocabulary of " + std::to_string(model.vocab_size) +
                             " tokens, text vocabulary of " + std::to_string(vocab.size()));
  }
  std::vector<EncodedSequence> train_seqs, dev_seqs;
  for (const auto& line : train_text) train_seqs.push_back(encode_text(vocab, line, length));
  for (const auto& line : dev_text) dev_seqs.push_back(encode_text(vocab, line, length));
  Parameters<float> init =
      init_parameters<float>(model, vocab.num_specials(), derive_seed(config.seed, 0));
  return train(std::move(init), model, train_seqs, dev_seqs, config, reporter);
}

std::string loss_curve_csv(std::span<const LossPoint> curve) {
  std::ostringstream out;
  out << "step,lr,train_loss,dev_loss\n";
  auto cell = [](double v) { return std::isnan(v) ? std::string() : format_number(v); };
  for (const auto& p : curve) {
    out << p.step << ',' << format_number(p.lr) << ',' << cell(p.train_loss) << ','
        << cell(p.dev_loss) << '\n';
  }
  return out.str();
}

#define COMETKB_INSTANTIATE(T)                                                             \
  template struct OptimizerState<T>;                                                       \
  template double global_norm(const Parameters<T>&);                                       \
  template double clip_gradients(Parameters<T>&, double);                                  \
  template void adam_update(std::span<T>, std::span<const T>, std::span<T>, std::span<T>,  \
                            std::int64_t, double, const TrainConfig&, bool);               \
  template void adam_step(Parameters<T>&, const Parameters<T>&, OptimizerState<T>&, double, \
                          const TrainConfig&);                                             \
  template nn::Var tuple_loss(nn::Graph<T>&, nn::Var, const PackedBatch&);                 \
  template NllTotal masked_nll(const Parameters<T>&, const ModelConfig&,                   \
                               std::span<const EncodedSequence>, int);

COMETKB_INSTANTIATE(float)
COMETKB_INSTANTIATE(double)

#undef COMETKB_INSTANTIATE

}  // namespace cometkb
