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

#ifndef COMETKB_TENSOR_H_
#define COMETKB_TENSOR_H_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace cometkb::nn {

// Dense row-major tensor. The model only needs vectors and matrices; a 1-D
// tensor of length n behaves as a 1 x n row where a matrix is expected.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape, T fill = T(0));
  Tensor(std::vector<int> shape, std::vector<T> data);

  static Tensor matrix(int rows, int cols,
                       std::initializer_list<std::initializer_list<T>> values);
  static Tensor vector(std::initializer_list<T> values);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  // Leading dimension for matrices, 1 for vectors.
  int rows() const;
  // Trailing dimension.
  int cols() const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::span<T> row(int r) { return {data_.data() + std::size_t(r) * cols(), std::size_t(cols())}; }
  std::span<const T> row(int r) const {
    return {data_.data() + std::size_t(r) * cols(), std::size_t(cols())};
  }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& operator()(int r, int c) { return data_[std::size_t(r) * cols() + c]; }
  const T& operator()(int r, int c) const { return data_[std::size_t(r) * cols() + c]; }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  std::string shape_string() const;
  bool all_finite() const;
  void fill(T value);

  template <typename U>
  Tensor<U> cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::vector<int> shape_;
  std::vector<T> data_;
};

std::string shape_string(const std::vector<int>& shape);

extern template class Tensor<float>;
extern template class Tensor<double>;

}  // namespace cometkb::nn

#endif  // COMETKB_TENSOR_H_
