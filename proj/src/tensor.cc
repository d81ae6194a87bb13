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

#include "cometkb/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "cometkb/error.h"

namespace cometkb::nn {

namespace {

std::size_t element_count(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeError("negative dimension in shape " + shape_string(shape));
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

std::string shape_string(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
Tensor<T>::Tensor(std::vector<int> shape, T fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {}

template <typename T>
Tensor<T>::Tensor(std::vector<int> shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (element_count(shape_) != data_.size()) {
    throw ShapeError("shape " + cometkb::nn::shape_string(shape_) + " does not match " +
                     std::to_string(data_.size()) + " values");
  }
}

template <typename T>
Tensor<T> Tensor<T>::matrix(int rows, int cols,
                            std::initializer_list<std::initializer_list<T>> values) {
  Tensor t({rows, cols});
  if (static_cast<int>(values.size()) != rows) throw ShapeError("row count mismatch");
  int r = 0;
  for (const auto& row : values) {
    if (static_cast<int>(row.size()) != cols) throw ShapeError("column count mismatch");
    std::copy(row.begin(), row.end(), t.data() + std::size_t(r) * cols);
    ++r;
  }
  return t;
}

template <typename T>
Tensor<T> Tensor<T>::vector(std::initializer_list<T> values) {
  return Tensor({static_cast<int>(values.size())}, std::vector<T>(values));
}

template <typename T>
int Tensor<T>::rows() const {
  if (shape_.empty()) return 1;
  if (shape_.size() == 1) return 1;
  return static_cast<int>(size() / static_cast<std::size_t>(shape_.back() ? shape_.back() : 1));
}

template <typename T>
int Tensor<T>::cols() const {
  return shape_.empty() ? 1 : shape_.back();
}

template <typename T>
std::string Tensor<T>::shape_string() const {
  return nn::shape_string(shape_);
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace cometkb::nn
