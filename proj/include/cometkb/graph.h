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

#ifndef COMETKB_GRAPH_H_
#define COMETKB_GRAPH_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cometkb/tensor.h"

namespace cometkb::nn {

// Handle to a value recorded on a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

#ifdef NDEBUG
inline constexpr bool kCheckFiniteByDefault = false;
#else
inline constexpr bool kCheckFiniteByDefault = true;
#endif

// Reverse-mode autodiff tape. Every op evaluates eagerly and records a
// backward rule; nodes are stored in creation order, which is a topological
// order, so backward() is a single reverse sweep. A Graph is single-owner and
// used for exactly one backward pass.
template <typename T>
class Graph {
 public:
  explicit Graph(bool check_finite = kCheckFiniteByDefault)
      : check_finite_(check_finite) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  // A leaf that receives no gradient.
  Var constant(Tensor<T> value);
  // A leaf whose gradient is populated by backward().
  Var parameter(const Tensor<T>& value);

  const Tensor<T>& value(Var v) const;
  // Valid after backward(); zeros for leaves the output does not depend on.
  const Tensor<T>& grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  Var add(Var a, Var b);
  // x[n, d] + bias[d] broadcast over rows.
  Var add_row(Var x, Var bias);
  Var mul(Var a, Var b);
  Var scale(Var x, T factor);
  // a[n, k] * b[k, m], or a[n, k] * b[m, k]^T when transpose_b is set.
  Var matmul(Var a, Var b, bool transpose_b = false);
  Var slice(Var x, int row_begin, int row_count, int col_begin, int col_count);
  Var concat_cols(std::span<const Var> parts);
  Var concat_rows(std::span<const Var> parts);
  Var sum(Var x);

  // Row-wise softmax over the last axis, max-subtracted.
  Var softmax(Var x);
  // Sets entry (i, j) to -inf for j > i.
  Var causal_mask(Var scores);
  Var layer_norm(Var x, Var gain, Var bias, T eps = T(1e-5));
  // tanh approximation.
  Var gelu(Var x);
  // Training: zero each element with probability `rate`, scale survivors by
  // 1 / (1 - rate). Inference or rate 0: returns x unchanged.
  Var dropout(Var x, T rate, std::uint64_t seed, bool training);
  // Rows of table[V, d] selected by ids.
  Var gather_rows(Var table, std::span<const int> ids);
  // Mean negative log-likelihood of targets over rows with mask != 0.
  Var cross_entropy(Var logits, std::span<const int> targets,
                    std::span<const std::uint8_t> mask);

  // Throws ShapeError for non-scalar outputs and Error when called twice.
  void backward(Var output);

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::function<void(Graph&, int)> backward;
    bool requires_grad = false;
    bool is_parameter = false;
  };

  Var push(Tensor<T> value, bool requires_grad,
           std::function<void(Graph&, int)> backward, bool allow_inf = false);
  const Node& node(Var v) const;
  bool needs_grad(Var v) const { return nodes_[v.id].requires_grad; }
  // Gradient buffer of a node, zero-initialized on first use.
  Tensor<T>& grad_buffer(int id);
  const Tensor<T>& upstream(int id) const { return nodes_[id].grad; }

  std::vector<Node> nodes_;
  bool check_finite_;
  bool backward_done_ = false;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace cometkb::nn

#endif  // COMETKB_GRAPH_H_
