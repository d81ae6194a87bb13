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

#include "cometkb/graph.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Core>

#include "cometkb/error.h"
#include "cometkb/random.h"

namespace cometkb::nn {

namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

template <typename T>
MatrixMap<T> as_matrix(Tensor<T>& t) {
  return MatrixMap<T>(t.data(), t.rows(), t.cols());
}

template <typename T>
ConstMatrixMap<T> as_matrix(const Tensor<T>& t) {
  return ConstMatrixMap<T>(t.data(), t.rows(), t.cols());
}

[[noreturn]] void shape_mismatch(const char* op, const std::vector<int>& a,
                                 const std::vector<int>& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_string(a) +
                   " and " + shape_string(b));
}

template <typename T>
T gelu_inner_scale() {
  return static_cast<T>(std::sqrt(2.0 / std::numbers::pi));
}

}  // namespace

template <typename T>
Var Graph<T>::push(Tensor<T> value, bool requires_grad,
                   std::function<void(Graph&, int)> backward, bool allow_inf) {
  if (check_finite_) {
    for (T v : value.values()) {
      if (std::isnan(v) || (!allow_inf && std::isinf(v))) {
        throw Error("non-finite value produced by op #" +
                    std::to_string(nodes_.size()));
      }
    }
  }
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
const typename Graph<T>::Node& Graph<T>::node(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) {
    throw ArgumentError("variable does not belong to this graph");
  }
  return nodes_[v.id];
}

template <typename T>
Tensor<T>& Graph<T>::grad_buffer(int id) {
  Node& n = nodes_[id];
  if (n.grad.empty() && !n.value.empty()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <typename T>
Var Graph<T>::constant(Tensor<T> value) {
  return push(std::move(value), false, nullptr);
}

template <typename T>
Var Graph<T>::parameter(const Tensor<T>& value) {
  Var v = push(value, true, nullptr);
  nodes_[v.id].is_parameter = true;
  return v;
}

template <typename T>
const Tensor<T>& Graph<T>::value(Var v) const {
  return node(v).value;
}

template <typename T>
const Tensor<T>& Graph<T>::grad(Var v) const {
  const Node& n = node(v);
  if (!backward_done_) throw Error("gradient requested before backward()");
  if (n.grad.empty() && !n.value.empty()) {
    throw ArgumentError("variable carries no gradient (constant input)");
  }
  return n.grad;
}

template <typename T>
Var Graph<T>::add(Var a, Var b) {
  const auto& av = value(a);
  const auto& bv = value(b);
  if (!av.same_shape(bv)) shape_mismatch("add", av.shape(), bv.shape());
  Tensor<T> out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return push(std::move(out), needs_grad(a) || needs_grad(b),
              [a, b](Graph& g, int self) {
                for (Var p : {a, b}) {
                  if (!g.needs_grad(p)) continue;
                  auto& dst = g.grad_buffer(p.id);
                  const auto& up = g.upstream(self);
                  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += up[i];
                }
              });
}

template <typename T>
Var Graph<T>::add_row(Var x, Var bias) {
  const auto& xv = value(x);
  const auto& bv = value(bias);
  if (static_cast<int>(bv.size()) != xv.cols()) {
    shape_mismatch("add_row", xv.shape(), bv.shape());
  }
  Tensor<T> out = xv;
  const int n = out.rows(), d = out.cols();
  for (int r = 0; r < n; ++r) {
    T* row = out.data() + std::size_t(r) * d;
    for (int c = 0; c < d; ++c) row[c] += bv[c];
  }
  return push(std::move(out), needs_grad(x) || needs_grad(bias),
              [x, bias, n, d](Graph& g, int self) {
                const auto& up = g.upstream(self);
                if (g.needs_grad(x)) {
                  auto& dx = g.grad_buffer(x.id);
                  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += up[i];
                }
                if (g.needs_grad(bias)) {
                  auto& db = g.grad_buffer(bias.id);
                  for (int r = 0; r < n; ++r) {
                    const T* row = up.data() + std::size_t(r) * d;
                    for (int c = 0; c < d; ++c) db[c] += row[c];
                  }
                }
              });
}

template <typename T>
Var Graph<T>::mul(Var a, Var b) {
  const auto& av = value(a);
  const auto& bv = value(b);
  if (!av.same_shape(bv)) shape_mismatch("mul", av.shape(), bv.shape());
  Tensor<T> out = av;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return push(std::move(out), needs_grad(a) || needs_grad(b),
              [a, b](Graph& g, int self) {
                const auto& up = g.upstream(self);
                if (g.needs_grad(a)) {
                  auto& da = g.grad_buffer(a.id);
                  const auto& bv = g.value(b);
                  for (std::size_t i = 0; i < da.size(); ++i) da[i] += up[i] * bv[i];
                }
                if (g.needs_grad(b)) {
                  auto& db = g.grad_buffer(b.id);
                  const auto& av = g.value(a);
                  for (std::size_t i = 0; i < db.size(); ++i) db[i] += up[i] * av[i];
                }
              });
}

template <typename T>
Var Graph<T>::scale(Var x, T factor) {
  Tensor<T> out = value(x);
  for (auto& v : out.values()) v *= factor;
  return push(std::move(out), needs_grad(x), [x, factor](Graph& g, int self) {
    auto& dx = g.grad_buffer(x.id);
    const auto& up = g.upstream(self);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += factor * up[i];
  });
}

template <typename T>
Var Graph<T>::matmul(Var a, Var b, bool transpose_b) {
  const auto& av = value(a);
  const auto& bv = value(b);
  const int inner_b = transpose_b ? bv.cols() : bv.rows();
  if (av.rank() > 2 || bv.rank() != 2 || av.cols() != inner_b) {
    shape_mismatch(transpose_b ? "matmul(a, b^T)" : "matmul", av.shape(), bv.shape());
  }
  const int n = av.rows();
  const int m = transpose_b ? bv.rows() : bv.cols();
  Tensor<T> out({n, m});
  if (transpose_b) {
    as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv).transpose();
  } else {
    as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
  }
  return push(std::move(out), needs_grad(a) || needs_grad(b),
              [a, b, transpose_b](Graph& g, int self) {
                const auto up = as_matrix(g.upstream(self));
                if (g.needs_grad(a)) {
                  auto da = as_matrix(g.grad_buffer(a.id));
                  const auto bm = as_matrix(g.value(b));
                  if (transpose_b) {
                    da.noalias() += up * bm;
                  } else {
                    da.noalias() += up * bm.transpose();
                  }
                }
                if (g.needs_grad(b)) {
                  auto db = as_matrix(g.grad_buffer(b.id));
                  const auto am = as_matrix(g.value(a));
                  if (transpose_b) {
                    db.noalias() += up.transpose() * am;
                  } else {
                    db.noalias() += am.transpose() * up;
                  }
                }
              });
}

template <typename T>
Var Graph<T>::slice(Var x, int row_begin, int row_count, int col_begin,
                    int col_count) {
  const auto& xv = value(x);
  if (row_begin < 0 || col_begin < 0 || row_count < 0 || col_count < 0 ||
      row_begin + row_count > xv.rows() || col_begin + col_count > xv.cols()) {
    throw ShapeError("slice [" + std::to_string(row_begin) + "+" +
                     std::to_string(row_count) + ", " + std::to_string(col_begin) +
                     "+" + std::to_string(col_count) + "] out of range for " +
                     xv.shape_string());
  }
  Tensor<T> out({row_count, col_count});
  as_matrix(out) = as_matrix(xv).block(row_begin, col_begin, row_count, col_count);
  return push(std::move(out), needs_grad(x),
              [x, row_begin, row_count, col_begin, col_count](Graph& g, int self) {
                auto dx = as_matrix(g.grad_buffer(x.id));
                dx.block(row_begin, col_begin, row_count, col_count) +=
                    as_matrix(g.upstream(self));
              });
}

template <typename T>
Var Graph<T>::concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols of zero tensors");
  const int rows = value(parts[0]).rows();
  int cols = 0;
  bool needs = false;
  for (Var p : parts) {
    const auto& pv = value(p);
    if (pv.rows() != rows) shape_mismatch("concat_cols", value(parts[0]).shape(), pv.shape());
    cols += pv.cols();
    needs |= needs_grad(p);
  }
  Tensor<T> out({rows, cols});
  int offset = 0;
  for (Var p : parts) {
    const auto& pv = value(p);
    as_matrix(out).block(0, offset, rows, pv.cols()) = as_matrix(pv);
    offset += pv.cols();
  }
  std::vector<Var> owned(parts.begin(), parts.end());
  return push(std::move(out), needs, [owned, rows](Graph& g, int self) {
    const auto up = as_matrix(g.upstream(self));
    int offset = 0;
    for (Var p : owned) {
      const int c = g.value(p).cols();
      if (g.needs_grad(p)) {
        as_matrix(g.grad_buffer(p.id)) += up.block(0, offset, rows, c);
      }
      offset += c;
    }
  });
}

template <typename T>
Var Graph<T>::concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows of zero tensors");
  const int cols = value(parts[0]).cols();
  int rows = 0;
  bool needs = false;
  for (Var p : parts) {
    const auto& pv = value(p);
    if (pv.cols() != cols) shape_mismatch("concat_rows", value(parts[0]).shape(), pv.shape());
    rows += pv.rows();
    needs |= needs_grad(p);
  }
  Tensor<T> out({rows, cols});
  std::size_t offset = 0;
  for (Var p : parts) {
    const auto& pv = value(p);
    std::copy(pv.data(), pv.data() + pv.size(), out.data() + offset);
    offset += pv.size();
  }
  std::vector<Var> owned(parts.begin(), parts.end());
  return push(std::move(out), needs, [owned](Graph& g, int self) {
    const auto& up = g.upstream(self);
    std::size_t offset = 0;
    for (Var p : owned) {
      const std::size_t n = g.value(p).size();
      if (g.needs_grad(p)) {
        auto& dp = g.grad_buffer(p.id);
        for (std::size_t i = 0; i < n; ++i) dp[i] += up[offset + i];
      }
      offset += n;
    }
  });
}

template <typename T>
Var Graph<T>::sum(Var x) {
  T total = 0;
  for (T v : value(x).values()) total += v;
  return push(Tensor<T>({1}, std::vector<T>{total}), needs_grad(x),
              [x](Graph& g, int self) {
                const T up = g.upstream(self)[0];
                for (auto& v : g.grad_buffer(x.id).values()) v += up;
              });
}

template <typename T>
Var Graph<T>::softmax(Var x) {
  const auto& xv = value(x);
  const int n = xv.rows(), d = xv.cols();
  Tensor<T> out(xv.shape());
  for (int r = 0; r < n; ++r) {
    const T* in = xv.data() + std::size_t(r) * d;
    T* o = out.data() + std::size_t(r) * d;
    const T peak = *std::max_element(in, in + d);
    T total = 0;
    for (int c = 0; c < d; ++c) {
      o[c] = std::exp(in[c] - peak);
      total += o[c];
    }
    for (int c = 0; c < d; ++c) o[c] /= total;
  }
  return push(std::move(out), needs_grad(x), [x, n, d](Graph& g, int self) {
    const auto& y = g.value(Var{self});
    const auto& up = g.upstream(self);
    auto& dx = g.grad_buffer(x.id);
    for (int r = 0; r < n; ++r) {
      const std::size_t base = std::size_t(r) * d;
      T dot = 0;
      for (int c = 0; c < d; ++c) dot += up[base + c] * y[base + c];
      for (int c = 0; c < d; ++c) dx[base + c] += y[base + c] * (up[base + c] - dot);
    }
  });
}

template <typename T>
Var Graph<T>::causal_mask(Var scores) {
  Tensor<T> out = value(scores);
  const int n = out.rows(), d = out.cols();
  for (int r = 0; r < n; ++r) {
    for (int c = r + 1; c < d; ++c) out(r, c) = -std::numeric_limits<T>::infinity();
  }
  return push(
      std::move(out), needs_grad(scores),
      [scores, n, d](Graph& g, int self) {
        const auto& up = g.upstream(self);
        auto& dx = g.grad_buffer(scores.id);
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c <= std::min(r, d - 1); ++c) dx(r, c) += up(r, c);
        }
      },
      /*allow_inf=*/true);
}

template <typename T>
Var Graph<T>::layer_norm(Var x, Var gain, Var bias, T eps) {
  const auto& xv = value(x);
  const auto& gv = value(gain);
  const auto& bv = value(bias);
  const int n = xv.rows(), d = xv.cols();
  if (d < 1 || static_cast<int>(gv.size()) != d || static_cast<int>(bv.size()) != d) {
    shape_mismatch("layer_norm", xv.shape(), gv.shape());
  }
  Tensor<T> out(xv.shape());
  std::vector<T> normalized(xv.size());
  std::vector<T> inv_std(n);
  for (int r = 0; r < n; ++r) {
    const T* in = xv.data() + std::size_t(r) * d;
    T mean = 0;
    for (int c = 0; c < d; ++c) mean += in[c];
    mean /= d;
    T var = 0;
    for (int c = 0; c < d; ++c) var += (in[c] - mean) * (in[c] - mean);
    var /= d;
    const T rstd = T(1) / std::sqrt(var + eps);
    inv_std[r] = rstd;
    for (int c = 0; c < d; ++c) {
      const T xhat = (in[c] - mean) * rstd;
      normalized[std::size_t(r) * d + c] = xhat;
      out(r, c) = gv[c] * xhat + bv[c];
    }
  }
  const bool needs = needs_grad(x) || needs_grad(gain) || needs_grad(bias);
  return push(std::move(out), needs,
              [x, gain, bias, n, d, normalized = std::move(normalized),
               inv_std = std::move(inv_std)](Graph& g, int self) {
                const auto& up = g.upstream(self);
                const auto& gv = g.value(gain);
                if (g.needs_grad(gain) || g.needs_grad(bias)) {
                  Tensor<T>* dg = g.needs_grad(gain) ? &g.grad_buffer(gain.id) : nullptr;
                  Tensor<T>* db = g.needs_grad(bias) ? &g.grad_buffer(bias.id) : nullptr;
                  for (int r = 0; r < n; ++r) {
                    for (int c = 0; c < d; ++c) {
                      const std::size_t i = std::size_t(r) * d + c;
                      if (dg) (*dg)[c] += up[i] * normalized[i];
                      if (db) (*db)[c] += up[i];
                    }
                  }
                }
                if (!g.needs_grad(x)) return;
                auto& dx = g.grad_buffer(x.id);
                for (int r = 0; r < n; ++r) {
                  const std::size_t base = std::size_t(r) * d;
                  T mean_dxhat = 0, mean_dxhat_xhat = 0;
                  for (int c = 0; c < d; ++c) {
                    const T dxhat = up[base + c] * gv[c];
                    mean_dxhat += dxhat;
                    mean_dxhat_xhat += dxhat * normalized[base + c];
                  }
                  mean_dxhat /= d;
                  mean_dxhat_xhat /= d;
                  for (int c = 0; c < d; ++c) {
                    const T dxhat = up[base + c] * gv[c];
                    dx[base + c] += inv_std[r] * (dxhat - mean_dxhat -
                                                  normalized[base + c] * mean_dxhat_xhat);
                  }
                }
              });
}

template <typename T>
Var Graph<T>::gelu(Var x) {
  const T k = gelu_inner_scale<T>();
  const T a = T(0.044715);
  Tensor<T> out = value(x);
  for (auto& v : out.values()) {
    const T u = v;
    v = T(0.5) * u * (T(1) + std::tanh(k * (u + a * u * u * u)));
  }
  return push(std::move(out), needs_grad(x), [x, k, a](Graph& g, int self) {
    const auto& xv = g.value(x);
    const auto& up = g.upstream(self);
    auto& dx = g.grad_buffer(x.id);
    for (std::size_t i = 0; i < dx.size(); ++i) {
      const T u = xv[i];
      const T t = std::tanh(k * (u + a * u * u * u));
      const T deriv = T(0.5) * (T(1) + t) +
                      T(0.5) * u * (T(1) - t * t) * k * (T(1) + T(3) * a * u * u);
      dx[i] += up[i] * deriv;
    }
  });
}

template <typename T>
Var Graph<T>::dropout(Var x, T rate, std::uint64_t seed, bool training) {
  if (!(rate >= T(0) && rate < T(1))) {
    throw ArgumentError("dropout rate must lie in [0, 1)");
  }
  if (!training || rate == T(0)) return x;
  Rng rng(seed);
  const T keep_scale = T(1) / (T(1) - rate);
  Tensor<T> out = value(x);
  std::vector<T> mask(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    mask[i] = rng.uniform() >= static_cast<double>(rate) ? keep_scale : T(0);
    out[i] *= mask[i];
  }
  return push(std::move(out), needs_grad(x),
              [x, mask = std::move(mask)](Graph& g, int self) {
                const auto& up = g.upstream(self);
                auto& dx = g.grad_buffer(x.id);
                for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += up[i] * mask[i];
              });
}

template <typename T>
Var Graph<T>::gather_rows(Var table, std::span<const int> ids) {
  const auto& tv = value(table);
  const int vocab = tv.rows(), d = tv.cols();
  Tensor<T> out({static_cast<int>(ids.size()), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= vocab) {
      throw ArgumentError("gather_rows: id " + std::to_string(ids[i]) +
                          " outside table of " + std::to_string(vocab) + " rows");
    }
    std::copy_n(tv.data() + std::size_t(ids[i]) * d, d, out.data() + i * d);
  }
  std::vector<int> owned(ids.begin(), ids.end());
  return push(std::move(out), needs_grad(table),
              [table, d, owned = std::move(owned)](Graph& g, int self) {
                const auto& up = g.upstream(self);
                auto& dt = g.grad_buffer(table.id);
                for (std::size_t i = 0; i < owned.size(); ++i) {
                  T* dst = dt.data() + std::size_t(owned[i]) * d;
                  const T* src = up.data() + i * d;
                  for (int c = 0; c < d; ++c) dst[c] += src[c];
                }
              });
}

template <typename T>
Var Graph<T>::cross_entropy(Var logits, std::span<const int> targets,
                            std::span<const std::uint8_t> mask) {
  const auto& lv = value(logits);
  const int n = lv.rows(), v = lv.cols();
  if (static_cast<int>(targets.size()) != n || static_cast<int>(mask.size()) != n) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) +
                     " targets and " + std::to_string(mask.size()) +
                     " mask entries for logits " + lv.shape_string());
  }
  std::vector<int> rows;
  for (int r = 0; r < n; ++r) {
    if (!mask[r]) continue;
    if (targets[r] < 0 || targets[r] >= v) {
      throw ArgumentError("cross_entropy: target " + std::to_string(targets[r]) +
                          " outside vocabulary of " + std::to_string(v));
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw ArgumentError("cross_entropy: loss mask is empty");

  // Probabilities of the masked rows are kept for the backward pass.
  std::vector<T> probs(rows.size() * std::size_t(v));
  double total = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const T* in = lv.data() + std::size_t(rows[i]) * v;
    T* p = probs.data() + i * v;
    const T peak = *std::max_element(in, in + v);
    T norm = 0;
    for (int c = 0; c < v; ++c) {
      p[c] = std::exp(in[c] - peak);
      norm += p[c];
    }
    for (int c = 0; c < v; ++c) p[c] /= norm;
    total += static_cast<double>(std::log(norm) + peak - in[targets[rows[i]]]);
  }
  const T count = static_cast<T>(rows.size());
  Tensor<T> out({1}, std::vector<T>{static_cast<T>(total / static_cast<double>(rows.size()))});
  std::vector<int> row_targets;
  for (int r : rows) row_targets.push_back(targets[r]);
  return push(std::move(out), needs_grad(logits),
              [logits, v, count, rows = std::move(rows),
               row_targets = std::move(row_targets),
               probs = std::move(probs)](Graph& g, int self) {
                const T up = g.upstream(self)[0] / count;
                auto& dl = g.grad_buffer(logits.id);
                for (std::size_t i = 0; i < rows.size(); ++i) {
                  T* dst = dl.data() + std::size_t(rows[i]) * v;
                  const T* p = probs.data() + i * v;
                  for (int c = 0; c < v; ++c) dst[c] += up * p[c];
                  dst[row_targets[i]] -= up;
                }
              });
}

template <typename T>
void Graph<T>::backward(Var output) {
  const auto& out = value(output);
  if (out.size() != 1) {
    throw ShapeError("backward needs a scalar output, got shape " + out.shape_string());
  }
  if (backward_done_) throw Error("backward() already ran on this graph");
  backward_done_ = true;
  if (needs_grad(output)) grad_buffer(output.id)[0] = T(1);
  for (int id = output.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.backward || n.grad.empty()) continue;
    n.backward(*this, id);
  }
  // Leaves the output does not depend on still report a zero gradient.
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].requires_grad) grad_buffer(static_cast<int>(id));
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace cometkb::nn
