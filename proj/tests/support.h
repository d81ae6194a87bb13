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

// Helpers and independent reference implementations shared by the tests.
// Nothing here calls into the code path it is used to check.

#ifndef COMETKB_TESTS_SUPPORT_H_
#define COMETKB_TESTS_SUPPORT_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "cometkb/corpus.h"
#include "cometkb/graph.h"
#include "cometkb/model.h"
#include "cometkb/random.h"

namespace cometkb::testing {

// Relative error with a floor on the denominator, so that gradients that are
// zero up to rounding noise do not count as mismatches.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheck {
  double max_relative_error = 0.0;
  std::string worst;
  long checked = 0;
};

// Central differences of `loss` with respect to every element of `leaves`;
// `build` records the loss on a fresh graph given the leaf vars.
inline GradCheck check_gradients(
    std::vector<nn::Tensor<double>> leaves,
    const std::function<nn::Var(nn::Graph<double>&, const std::vector<nn::Var>&)>& build,
    double h = 1e-4) {
  nn::Graph<double> g(false);
  std::vector<nn::Var> vars;
  for (const auto& t : leaves) vars.push_back(g.parameter(t));
  const nn::Var out = build(g, vars);
  g.backward(out);

  auto evaluate = [&]() {
    nn::Graph<double> f(false);
    std::vector<nn::Var> v;
    for (const auto& t : leaves) v.push_back(f.constant(t));
    return f.value(build(f, v))[0];
  };
  GradCheck result;
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    const nn::Tensor<double> analytic = g.grad(vars[l]);
    for (std::size_t i = 0; i < leaves[l].size(); ++i) {
      const double saved = leaves[l][i];
      leaves[l][i] = saved + h;
      const double plus = evaluate();
      leaves[l][i] = saved - h;
      const double minus = evaluate();
      leaves[l][i] = saved;
      const double numeric = (plus - minus) / (2 * h);
      const double err = relative_error(analytic[i], numeric);
      ++result.checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst = "leaf " + std::to_string(l) + "[" + std::to_string(i) + "] analytic " +
                       std::to_string(analytic[i]) + " numeric " + std::to_string(numeric);
      }
    }
  }
  return result;
}

inline nn::Tensor<double> random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  nn::Tensor<double> t(std::move(shape));
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

inline ModelConfig tiny_config(int vocab = 20, int d = 8, int heads = 2, int layers = 1,
                               int d_ff = 16, int max_seq = 12) {
  ModelConfig c;
  c.n_layers = layers;
  c.d_model = d;
  c.n_heads = heads;
  c.d_ff = d_ff;
  c.max_seq_len = max_seq;
  c.dropout = 0.0;
  c.vocab_size = vocab;
  return c;
}

// Draws every tensor, biases and gains included, so that no term of the
// model is trivially zero or one.
template <typename T>
Parameters<T> random_parameters(const ModelConfig& config, std::uint64_t seed,
                                double scale = 0.5) {
  Parameters<T> p = init_parameters<T>(config, 0, seed);
  Rng rng(seed ^ 0xabcdefULL);
  visit_slots(p, [&](const std::string& name, ParamKind, nn::Tensor<T>& t) {
    const bool gain = name.find("gain") != std::string::npos;
    for (T& v : t.values()) v = static_cast<T>((gain ? 1.0 : 0.0) + scale * rng.normal());
  });
  return p;
}

// ---- straight-line model -----------------------------------------------------
// Plain loops over std::vector, written from the model definition: token plus
// position embedding, per block causal multi-head attention, residual and
// LayerNorm, GeLU feed-forward, residual and LayerNorm, tied output head.

using Matrix = std::vector<std::vector<double>>;

inline Matrix to_matrix(const nn::Tensor<double>& t) {
  Matrix m(t.rows(), std::vector<double>(t.cols()));
  for (int r = 0; r < t.rows(); ++r)
    for (int c = 0; c < t.cols(); ++c) m[r][c] = t(r, c);
  return m;
}

inline std::vector<double> vec_times(const std::vector<double>& x, const Matrix& w) {
  std::vector<double> y(w[0].size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) y[j] += x[i] * w[i][j];
  return y;
}

inline std::vector<double> norm(const std::vector<double>& x, const nn::Tensor<double>& gain,
                                const nn::Tensor<double>& bias) {
  double mean = 0, var = 0;
  for (double v : x) mean += v;
  mean /= x.size();
  for (double v : x) var += (v - mean) * (v - mean);
  var /= x.size();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = gain[i] * (x[i] - mean) / std::sqrt(var + 1e-5) + bias[i];
  }
  return y;
}

inline double gelu_ref(double u) {
  return 0.5 * u * (1 + std::tanh(std::sqrt(2 / std::numbers::pi) * (u + 0.044715 * u * u * u)));
}

inline Matrix reference_logits(const Parameters<double>& p, const ModelConfig& c,
                               const std::vector<int>& tokens) {
  const int n = static_cast<int>(tokens.size()), d = c.d_model, dk = c.d_head();
  Matrix h(n, std::vector<double>(d));
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < d; ++j) h[t][j] = p.token_embedding(tokens[t], j) + p.position_embedding(t, j);
  for (const auto& b : p.blocks) {
    const Matrix wq = to_matrix(b.w_query), wk = to_matrix(b.w_key), wv = to_matrix(b.w_value),
                 wo = to_matrix(b.w_output), w1 = to_matrix(b.ffn_in_weight),
                 w2 = to_matrix(b.ffn_out_weight);
    Matrix q(n), k(n), v(n);
    for (int t = 0; t < n; ++t) {
      q[t] = vec_times(h[t], wq);
      k[t] = vec_times(h[t], wk);
      v[t] = vec_times(h[t], wv);
    }
    Matrix next(n);
    for (int t = 0; t < n; ++t) {
      std::vector<double> heads(d, 0.0);
      for (int head = 0; head < c.n_heads; ++head) {
        std::vector<double> s(t + 1);
        double peak = -1e300;
        for (int j = 0; j <= t; ++j) {
          double dot = 0;
          for (int x = 0; x < dk; ++x) dot += q[t][head * dk + x] * k[j][head * dk + x];
          s[j] = dot / std::sqrt(double(dk));
          peak = std::max(peak, s[j]);
        }
        double z = 0;
        for (double& e : s) z += (e = std::exp(e - peak));
        for (int j = 0; j <= t; ++j)
          for (int x = 0; x < dk; ++x) heads[head * dk + x] += s[j] / z * v[j][head * dk + x];
      }
      std::vector<double> a = vec_times(heads, wo);
      for (int j = 0; j < d; ++j) a[j] += h[t][j];
      const std::vector<double> g = norm(a, b.attn_norm_gain, b.attn_norm_bias);
      std::vector<double> inner = vec_times(g, w1);
      for (std::size_t j = 0; j < inner.size(); ++j) inner[j] = gelu_ref(inner[j] + b.ffn_in_bias[j]);
      std::vector<double> f = vec_times(inner, w2);
      for (int j = 0; j < d; ++j) f[j] += b.ffn_out_bias[j] + g[j];
      next[t] = norm(f, b.ffn_norm_gain, b.ffn_norm_bias);
    }
    h = std::move(next);
  }
  Matrix logits(n, std::vector<double>(c.vocab_size, 0.0));
  for (int t = 0; t < n; ++t)
    for (int w = 0; w < c.vocab_size; ++w)
      for (int j = 0; j < d; ++j) logits[t][w] += h[t][j] * p.token_embedding(w, j);
  return logits;
}

// ---- metric oracles -------------------------------------------------------------

using Words = std::vector<std::string>;

// Occurrences of the n-gram starting at `pos` of `a`, counted in `b`.
inline long count_occurrences(const Words& gram, const Words& b) {
  long count = 0;
  for (std::size_t i = 0; i + gram.size() <= b.size(); ++i) {
    bool same = true;
    for (std::size_t j = 0; j < gram.size(); ++j) same = same && b[i + j] == gram[j];
    count += same;
  }
  return count;
}

struct OracleBleu {
  long match[2] = {0, 0};
  long total[2] = {0, 0};
  long c = 0, r = 0;
  double value = 0.0;
};

inline OracleBleu oracle_bleu2(const std::vector<Words>& cands,
                               const std::vector<std::vector<Words>>& refs) {
  OracleBleu o;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const Words& c = cands[i];
    for (int n = 1; n <= 2; ++n) {
      std::set<Words> distinct;
      for (std::size_t p = 0; p + n <= c.size(); ++p) {
        distinct.insert(Words(c.begin() + p, c.begin() + p + n));
        ++o.total[n - 1];
      }
      for (const Words& gram : distinct) {
        long best_ref = 0;
        for (const Words& r : refs[i]) best_ref = std::max(best_ref, count_occurrences(gram, r));
        o.match[n - 1] += std::min(count_occurrences(gram, c), best_ref);
      }
    }
    o.c += static_cast<long>(c.size());
    long best = -1;
    for (const Words& r : refs[i]) {
      const long len = static_cast<long>(r.size());
      const long diff = std::abs(len - static_cast<long>(c.size()));
      if (best < 0 || diff < std::abs(best - static_cast<long>(c.size())) ||
          (diff == std::abs(best - static_cast<long>(c.size())) && len < best)) {
        best = len;
      }
    }
    o.r += best;
  }
  if (o.c == 0) return o;
  const double p1 = o.match[0] ? double(o.match[0]) / double(o.total[0]) : 1e-9;
  const double p2 = o.match[1] ? double(o.match[1]) / double(o.total[1]) : 1e-9;
  const double bp = o.c > o.r ? 1.0 : std::exp(1.0 - double(o.r) / double(o.c));
  o.value = bp * std::exp(0.5 * std::log(p1) + 0.5 * std::log(p2));
  return o;
}

struct OracleNovelty {
  double sro = 0, o = 0, u = 0;
};

inline OracleNovelty oracle_novelty(const std::vector<KnowledgeTuple>& gen,
                                    const std::vector<KnowledgeTuple>& train) {
  long sro = 0, obj = 0;
  for (const auto& g : gen) {
    bool triple_seen = false, object_seen = false;
    for (const auto& t : train) {
      triple_seen = triple_seen || (g.subject == t.subject && g.relation == t.relation &&
                                    g.object == t.object);
      object_seen = object_seen || g.object == t.object;
    }
    sro += !triple_seen;
    obj += !object_seen;
  }
  std::vector<std::string> unique;
  for (const auto& g : gen) {
    if (std::find(unique.begin(), unique.end(), g.object) == unique.end()) unique.push_back(g.object);
  }
  long novel_unique = 0;
  for (const auto& u : unique) {
    bool seen = false;
    for (const auto& t : train) seen = seen || t.object == u;
    novel_unique += !seen;
  }
  OracleNovelty o;
  o.sro = 100.0 * double(sro) / double(gen.size());
  o.o = 100.0 * double(obj) / double(gen.size());
  o.u = 100.0 * double(novel_unique) / double(unique.size());
  return o;
}

// Levenshtein by plain recursion with memoization on (i, j).
inline long oracle_levenshtein(const Words& a, const Words& b) {
  std::map<std::pair<std::size_t, std::size_t>, long> memo;
  std::function<long(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> long {
    if (i == a.size()) return static_cast<long>(b.size() - j);
    if (j == b.size()) return static_cast<long>(a.size() - i);
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    long best = std::min(go(i + 1, j) + 1, go(i, j + 1) + 1);
    best = std::min(best, go(i + 1, j + 1) + (a[i] == b[j] ? 0 : 1));
    return memo[key] = best;
  };
  return go(0, 0);
}

}  // namespace cometkb::testing

#endif  // COMETKB_TESTS_SUPPORT_H_
