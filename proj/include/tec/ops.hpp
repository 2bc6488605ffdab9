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

#ifndef TEC_OPS_HPP_
#define TEC_OPS_HPP_

#include <cstdint>
#include <vector>

#include "tec/kernels.hpp"
#include "tec/tape.hpp"

namespace tec::ops {

// Value-level elementwise helpers shared by the tape ops and the eval
// context, so both paths compute identical floats.
template <typename S>
Tensor<S> softplus_t(const Tensor<S>& x);
template <typename S>
Tensor<S> sigmoid_t(const Tensor<S>& x);

template <typename S>
Var<S> input(Tape<S>& t, Tensor<S> value, bool requires_grad = false);

template <typename S>
Var<S> add(Tape<S>& t, Var<S> a, Var<S> b);
template <typename S>
Var<S> sub(Tape<S>& t, Var<S> a, Var<S> b);
template <typename S>
Var<S> mul(Tape<S>& t, Var<S> a, Var<S> b);
template <typename S>
Var<S> scale(Tape<S>& t, Var<S> a, S c);
template <typename S>
Var<S> add_scalar(Tape<S>& t, Var<S> a, S c);
template <typename S>
Var<S> square(Tape<S>& t, Var<S> a);
template <typename S>
Var<S> tanh_(Tape<S>& t, Var<S> a);
template <typename S>
Var<S> sigmoid(Tape<S>& t, Var<S> a);
template <typename S>
Var<S> softplus(Tape<S>& t, Var<S> a);
template <typename S>
Var<S> gelu(Tape<S>& t, Var<S> a);

template <typename S>
Var<S> sum(Tape<S>& t, Var<S> a);
template <typename S>
Var<S> mean(Tape<S>& t, Var<S> a);
template <typename S>
Var<S> mse(Tape<S>& t, Var<S> a, Var<S> b);

template <typename S>
Var<S> reshape(Tape<S>& t, Var<S> a, std::vector<int> shape);

// Elementwise product with a constant (non-trained) mask.
template <typename S>
Var<S> mul_mask(Tape<S>& t, Var<S> a, Tensor<S> mask);

// y.flat[i] = x.flat[idx[i]]. Duplicated sources accumulate in the
// backward pass, so reflect-style gathers differentiate correctly. All
// token shuffling (tokenize, untokenize, repack) reduces to this.
template <typename S>
Var<S> gather(Tape<S>& t, Var<S> x, std::vector<int> out_shape,
              std::vector<int64_t> idx);

template <typename S>
Var<S> pad2d(Tape<S>& t, Var<S> x, int p, kern::PadMode mode);
template <typename S>
Var<S> conv2d(Tape<S>& t, Var<S> x, Var<S> w, Var<S> b, int stride);
template <typename S>
Var<S> tconv2d(Tape<S>& t, Var<S> x, Var<S> w, Var<S> b, int stride, int pad, int outpad);
template <typename S>
Var<S> linear(Tape<S>& t, Var<S> x, Var<S> w, Var<S> b);
template <typename S>
Var<S> gdn(Tape<S>& t, Var<S> x, Var<S> beta, Var<S> gamma, bool inverse);
template <typename S>
Var<S> layernorm(Tape<S>& t, Var<S> x, Var<S> gamma, Var<S> beta, S eps);

template <typename S>
Var<S> attn_scores(Tape<S>& t, Var<S> q, Var<S> k, int B, int H, int Tq, int Tk);
template <typename S>
Var<S> attn_softmax(Tape<S>& t, Var<S> s, int B, int H, int Tq, int Tk, bool causal);
template <typename S>
Var<S> attn_mix(Tape<S>& t, Var<S> p, Var<S> v, int B, int H, int Tq, int Tk);

// [B*Ta,D] ++ [B*Tb,D] -> [B*(Ta+Tb),D], interleaved per batch element.
template <typename S>
Var<S> concat_rows_blocks(Tape<S>& t, Var<S> a, Var<S> b, int B);
template <typename S>
Var<S> concat_channels(Tape<S>& t, const std::vector<Var<S>>& xs);
template <typename S>
Var<S> slice_cols(Tape<S>& t, Var<S> x, int c0, int c1);
// [D] -> [R,D] by repetition.
template <typename S>
Var<S> tile_rows(Tape<S>& t, Var<S> v, int rows);
// y[r,:] = x[r,:] + e[r % T,:]  (positional embeddings over batched blocks).
template <typename S>
Var<S> add_rows_cycle(Tape<S>& t, Var<S> x, Var<S> e);

// ---- value-level counterparts used by inference ----

template <typename S>
Tensor<S> concat_rows_blocks_t(const Tensor<S>& a, const Tensor<S>& b, int B);
template <typename S>
Tensor<S> concat_channels_t(const std::vector<Tensor<S>>& xs);
template <typename S>
Tensor<S> slice_cols_t(const Tensor<S>& x, int c0, int c1);
template <typename S>
Tensor<S> tile_rows_t(const Tensor<S>& v, int rows);
template <typename S>
Tensor<S> add_rows_cycle_t(const Tensor<S>& x, const Tensor<S>& e);
template <typename S>
Tensor<S> gather_t(const Tensor<S>& x, std::vector<int> out_shape,
                   const std::vector<int64_t>& idx);

}  // namespace tec::ops

namespace tec {

// Network definitions are written once as templates over a context. TapeCtx
// builds the autodiff graph for training; EvalCtx runs the same kernels on
// plain tensors for encoding and decoding. Keeping one definition is what
// makes training forwards and codec forwards bitwise identical.
template <typename S>
struct TapeCtx {
  using V = Var<S>;
  Tape<S>* t;
  Binding<S>* bind;
  bool training = true;

  V param(const std::string& n) { return (*bind)(n); }
  V constant(Tensor<S> x) { return ops::input(*t, std::move(x), false); }
  const Tensor<S>& value(V v) const { return t->val(v); }

  V add(V a, V b) { return ops::add(*t, a, b); }
  V sub(V a, V b) { return ops::sub(*t, a, b); }
  V mul(V a, V b) { return ops::mul(*t, a, b); }
  V scale(V a, S c) { return ops::scale(*t, a, c); }
  V add_scalar(V a, S c) { return ops::add_scalar(*t, a, c); }
  V square(V a) { return ops::square(*t, a); }
  V gelu(V a) { return ops::gelu(*t, a); }
  V softplus(V a) { return ops::softplus(*t, a); }
  V reshape(V a, std::vector<int> s) { return ops::reshape(*t, a, std::move(s)); }
  V mul_mask(V a, Tensor<S> m) { return ops::mul_mask(*t, a, std::move(m)); }
  V gather(V a, std::vector<int> s, std::vector<int64_t> idx) {
    return ops::gather(*t, a, std::move(s), std::move(idx));
  }
  V pad2d(V x, int p, kern::PadMode m) { return ops::pad2d(*t, x, p, m); }
  V conv2d(V x, V w, V b, int s) { return ops::conv2d(*t, x, w, b, s); }
  V tconv2d(V x, V w, V b, int s, int p, int op) { return ops::tconv2d(*t, x, w, b, s, p, op); }
  V linear(V x, V w, V b) { return ops::linear(*t, x, w, b); }
  V gdn(V x, V beta, V gamma, bool inv) { return ops::gdn(*t, x, beta, gamma, inv); }
  V layernorm(V x, V g, V b, S eps) { return ops::layernorm(*t, x, g, b, eps); }
  V attn_scores(V q, V k, int B, int H, int Tq, int Tk) {
    return ops::attn_scores(*t, q, k, B, H, Tq, Tk);
  }
  V attn_softmax(V s, int B, int H, int Tq, int Tk, bool causal) {
    return ops::attn_softmax(*t, s, B, H, Tq, Tk, causal);
  }
  V attn_mix(V p, V v, int B, int H, int Tq, int Tk) {
    return ops::attn_mix(*t, p, v, B, H, Tq, Tk);
  }
  V concat_rows_blocks(V a, V b, int B) { return ops::concat_rows_blocks(*t, a, b, B); }
  V concat_channels(const std::vector<V>& xs) { return ops::concat_channels(*t, xs); }
  V slice_cols(V x, int c0, int c1) { return ops::slice_cols(*t, x, c0, c1); }
  V tile_rows(V v, int rows) { return ops::tile_rows(*t, v, rows); }
  V add_rows_cycle(V x, V e) { return ops::add_rows_cycle(*t, x, e); }
};

template <typename S>
struct EvalCtx {
  using V = Tensor<S>;
  const ParamStore<S>* ps;
  bool training = false;

  V param(const std::string& n) const { return ps->value(n); }
  V constant(Tensor<S> x) const { return x; }
  const Tensor<S>& value(const V& v) const { return v; }

  V add(const V& a, const V& b) const {
    V y = a;
    y.array() += b.array();
    return y;
  }
  V sub(const V& a, const V& b) const {
    V y = a;
    y.array() -= b.array();
    return y;
  }
  V mul(const V& a, const V& b) const {
    V y = a;
    y.array() *= b.array();
    return y;
  }
  V scale(const V& a, S c) const {
    V y = a;
    y.array() *= c;
    return y;
  }
  V add_scalar(const V& a, S c) const {
    V y = a;
    y.array() += c;
    return y;
  }
  V square(const V& a) const {
    V y = a;
    y.array() = y.array().square();
    return y;
  }
  V gelu(const V& a) const { return kern::gelu(a); }
  V softplus(const V& a) const { return ops::softplus_t(a); }
  V reshape(const V& a, std::vector<int> s) const { return a.reshaped(std::move(s)); }
  V mul_mask(const V& a, const Tensor<S>& m) const { return mul(a, m); }
  V gather(const V& a, std::vector<int> s, const std::vector<int64_t>& idx) const {
    return ops::gather_t(a, std::move(s), idx);
  }
  V pad2d(const V& x, int p, kern::PadMode m) const { return kern::pad2d(x, p, m); }
  V conv2d(const V& x, const V& w, const V& b, int s) const { return kern::conv2d(x, w, b, s); }
  V tconv2d(const V& x, const V& w, const V& b, int s, int p, int op) const {
    return kern::tconv2d(x, w, b, s, p, op);
  }
  V linear(const V& x, const V& w, const V& b) const { return kern::linear(x, w, b); }
  V gdn(const V& x, const V& beta, const V& gamma, bool inv) const {
    return kern::gdn(x, beta, gamma, inv);
  }
  V layernorm(const V& x, const V& g, const V& b, S eps) const {
    return kern::layernorm(x, g, b, eps);
  }
  V attn_scores(const V& q, const V& k, int B, int H, int Tq, int Tk) const {
    return kern::attn_scores(q, k, B, H, Tq, Tk);
  }
  V attn_softmax(const V& s, int B, int H, int Tq, int Tk, bool causal) const {
    return kern::attn_softmax(s, B, H, Tq, Tk, causal);
  }
  V attn_mix(const V& p, const V& v, int B, int H, int Tq, int Tk) const {
    return kern::attn_mix(p, v, B, H, Tq, Tk);
  }
  V concat_rows_blocks(const V& a, const V& b, int B) const {
    return ops::concat_rows_blocks_t(a, b, B);
  }
  V concat_channels(const std::vector<V>& xs) const { return ops::concat_channels_t(xs); }
  V slice_cols(const V& x, int c0, int c1) const { return ops::slice_cols_t(x, c0, c1); }
  V tile_rows(const V& v, int rows) const { return ops::tile_rows_t(v, rows); }
  V add_rows_cycle(const V& x, const V& e) const { return ops::add_rows_cycle_t(x, e); }
};

}  // namespace tec

#endif  // TEC_OPS_HPP_
