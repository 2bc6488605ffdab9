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

#ifndef TEC_KERNELS_HPP_
#define TEC_KERNELS_HPP_

#include "tec/tensor.hpp"

// Raw forward/backward computations. The autodiff layer wraps these; the
// codec's inference paths call them directly, so a value computed while
// training is bit-identical to the one computed while encoding.
namespace tec::kern {

enum class PadMode { kZero, kReflect };

// ---- padding ----------------------------------------------------------

// x: [N,C,H,W] -> [N,C,H+2p,W+2p]. Reflect mirrors without repeating the
// edge sample, so p must be < min(H, W).
template <typename S>
Tensor<S> pad2d(const Tensor<S>& x, int p, PadMode mode);

// Gradient of pad2d: fold the padded gradient back onto the interior.
template <typename S>
Tensor<S> pad2d_back(const Tensor<S>& gy, int p, PadMode mode, const std::vector<int>& x_shape);

// ---- convolution (valid, strided) -------------------------------------

// x: [N,Ci,H,W], w: [Co,Ci,k,k], b: [Co]. Output [N,Co,Ho,Wo] with
// Ho = (H-k)/s + 1. Caller pads beforehand.
template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b, int stride);

template <typename S>
void conv2d_back(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& gy, int stride,
                 Tensor<S>* gx, Tensor<S>* gw, Tensor<S>* gb);

// ---- transposed convolution -------------------------------------------

// x: [N,Ci,H,W], w: [Ci,Co,k,k]. Output [N,Co,Ho,Wo] with
// Ho = s*(H-1) + k - 2p + op. Requires op <= p < k.
template <typename S>
Tensor<S> tconv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b, int stride, int pad,
                  int outpad);

template <typename S>
void tconv2d_back(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& gy, int stride, int pad,
                  int outpad, Tensor<S>* gx, Tensor<S>* gw, Tensor<S>* gb);

// ---- dense -------------------------------------------------------------

// x: [R,In], w: [Out,In], b: [Out] -> [R,Out].
template <typename S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b);

template <typename S>
void linear_back(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& gy, Tensor<S>* gx,
                 Tensor<S>* gw, Tensor<S>* gb);

// ---- divisive normalization -------------------------------------------

// y_i = x_i * r_i^(-1/2) with r_i = beta_i + sum_j gamma_ij x_j^2; the
// inverse form multiplies by r_i^(+1/2). x: [N,C,H,W], beta: [C],
// gamma: [C,C].
template <typename S>
Tensor<S> gdn(const Tensor<S>& x, const Tensor<S>& beta, const Tensor<S>& gamma, bool inverse);

template <typename S>
void gdn_back(const Tensor<S>& x, const Tensor<S>& beta, const Tensor<S>& gamma, bool inverse,
              const Tensor<S>& gy, Tensor<S>* gx, Tensor<S>* gbeta, Tensor<S>* ggamma);

// ---- layer norm --------------------------------------------------------

// Normalizes the last dim of [R,D], then scales and shifts.
template <typename S>
Tensor<S> layernorm(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta, S eps);

template <typename S>
void layernorm_back(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta, S eps,
                    const Tensor<S>& gy, Tensor<S>* gx, Tensor<S>* ggamma, Tensor<S>* gbeta);

// ---- attention pieces ---------------------------------------------------

// q: [B*Tq, H*dh], k: [B*Tk, H*dh] -> scores [B*H*Tq, Tk], scaled by
// 1/sqrt(dh). Rows are grouped (batch, head, query).
template <typename S>
Tensor<S> attn_scores(const Tensor<S>& q, const Tensor<S>& k, int B, int H, int Tq, int Tk);

template <typename S>
void attn_scores_back(const Tensor<S>& q, const Tensor<S>& k, int B, int H, int Tq, int Tk,
                      const Tensor<S>& gy, Tensor<S>* gq, Tensor<S>* gk);

// Row softmax over scores. With causal=true (needs Tq==Tk) entries past the
// query index are structurally excluded: their probability is exactly zero
// and they never enter the normalization, which keeps a full-length pass
// with placeholder rows bitwise equal to an incremental one.
template <typename S>
Tensor<S> attn_softmax(const Tensor<S>& s, int B, int H, int Tq, int Tk, bool causal);

template <typename S>
Tensor<S> attn_softmax_back(const Tensor<S>& p, const Tensor<S>& gy, int B, int H, int Tq, int Tk,
                            bool causal);

// p: [B*H*Tq, Tk], v: [B*Tk, H*dh] -> [B*Tq, H*dh].
template <typename S>
Tensor<S> attn_mix(const Tensor<S>& p, const Tensor<S>& v, int B, int H, int Tq, int Tk);

template <typename S>
void attn_mix_back(const Tensor<S>& p, const Tensor<S>& v, int B, int H, int Tq, int Tk,
                   const Tensor<S>& gy, Tensor<S>* gp, Tensor<S>* gv);

// ---- pointwise ----------------------------------------------------------

template <typename S>
Tensor<S> gelu(const Tensor<S>& x);
template <typename S>
Tensor<S> gelu_back(const Tensor<S>& x, const Tensor<S>& gy);

template <typename S>
S softplus(S x) {
  return x > S(30) ? x : std::log1p(std::exp(x));
}
template <typename S>
S softplus_grad(S x) {  // sigmoid
  return x > S(0) ? S(1) / (S(1) + std::exp(-x)) : std::exp(x) / (S(1) + std::exp(x));
}
template <typename S>
S inv_softplus(S y) {
  return y > S(30) ? y : std::log(std::expm1(y));
}

}  // namespace tec::kern

#endif  // TEC_KERNELS_HPP_
