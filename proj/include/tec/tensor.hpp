// Copyright (c) the TerraCodec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEC_TENSOR_HPP_
#define TEC_TENSOR_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "tec/common.hpp"

namespace tec {

// Dense row-major n-d array over a flat Eigen column. All shaping is
// metadata; math goes through Eigen maps or .array() expressions.
// Convention for rank-4 data is [N, C, H, W]; token sequences are rank-2
// [rows, dim] with rows grouped batch-major.
template <typename S>
class Tensor {
 public:
  using Storage = Eigen::Array<S, Eigen::Dynamic, 1>;

  Tensor() = default;
  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    v_ = Storage::Zero(count(shape_));
  }
  Tensor(std::vector<int> shape, Storage v) : shape_(std::move(shape)), v_(std::move(v)) {
    TEC_CHECK(v_.size() == count(shape_), "tensor storage does not match shape");
  }

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }
  static Tensor full(std::vector<int> shape, S value) {
    Tensor t(std::move(shape));
    t.v_.setConstant(value);
    return t;
  }
  static Tensor scalar(S value) { return full({1}, value); }
  static Tensor from(std::vector<int> shape, std::initializer_list<S> values) {
    Tensor t(std::move(shape));
    TEC_CHECK(Eigen::Index(values.size()) == t.size(), "initializer size mismatch");
    Eigen::Index i = 0;
    for (S v : values) t.v_[i++] = v;
    return t;
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return int(shape_.size()); }
  int dim(int i) const { return shape_[size_t(i)]; }
  Eigen::Index size() const { return v_.size(); }
  bool empty() const { return v_.size() == 0; }

  S* data() { return v_.data(); }
  const S* data() const { return v_.data(); }
  Storage& array() { return v_; }
  const Storage& array() const { return v_; }
  void fill(S value) { v_.setConstant(value); }

  S& operator[](Eigen::Index i) { return v_[i]; }
  S operator[](Eigen::Index i) const { return v_[i]; }

  S& at(int a, int b) { return v_[Eigen::Index(a) * dim(1) + b]; }
  S at(int a, int b) const { return v_[Eigen::Index(a) * dim(1) + b]; }
  S& at(int a, int b, int c) { return v_[(Eigen::Index(a) * dim(1) + b) * dim(2) + c]; }
  S at(int a, int b, int c) const { return v_[(Eigen::Index(a) * dim(1) + b) * dim(2) + c]; }
  S& at(int a, int b, int c, int d) {
    return v_[((Eigen::Index(a) * dim(1) + b) * dim(2) + c) * dim(3) + d];
  }
  S at(int a, int b, int c, int d) const {
    return v_[((Eigen::Index(a) * dim(1) + b) * dim(2) + c) * dim(3) + d];
  }

  Tensor reshaped(std::vector<int> shape) const {
    TEC_CHECK(count(shape) == size(), "reshape changes element count");
    return Tensor(std::move(shape), v_);
  }

  template <typename T>
  Tensor<T> cast() const {
    Tensor<T> out(shape_);
    out.array() = v_.template cast<T>();
    return out;
  }

  static Eigen::Index count(const std::vector<int>& shape) {
    Eigen::Index n = 1;
    for (int d : shape) {
      TEC_CHECK(d >= 0, "negative tensor dimension");
      n *= d;
    }
    return n;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape_.size(); ++i) s += (i ? "," : "") + std::to_string(shape_[i]);
    return s + "]";
  }

 private:
  std::vector<int> shape_;
  Storage v_;
};

template <typename S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using MatCM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor>;

// Row-major matrix view of a tensor's flat storage.
template <typename S>
Eigen::Map<MatRM<S>> as_mat(Tensor<S>& t, Eigen::Index rows, Eigen::Index cols) {
  TEC_CHECK(rows * cols == t.size(), "matrix view size mismatch");
  return Eigen::Map<MatRM<S>>(t.data(), rows, cols);
}
template <typename S>
Eigen::Map<const MatRM<S>> as_mat(const Tensor<S>& t, Eigen::Index rows, Eigen::Index cols) {
  TEC_CHECK(rows * cols == t.size(), "matrix view size mismatch");
  return Eigen::Map<const MatRM<S>>(t.data(), rows, cols);
}

inline bool same_shape(const std::vector<int>& a, const std::vector<int>& b) { return a == b; }

}  // namespace tec

#endif  // TEC_TENSOR_HPP_
