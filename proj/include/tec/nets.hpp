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

#ifndef TEC_NETS_HPP_
#define TEC_NETS_HPP_

#include <string>

#include "tec/common.hpp"
#include "tec/ops.hpp"

// Parameter registration (at model build time) and the matching forward
// helpers (templated over TapeCtx / EvalCtx). Names follow "<block>.w",
// "<block>.b" and so on; registration order fixes serialization order.
namespace tec::nets {

inline constexpr float kLayerNormEps = 1e-5f;
inline constexpr float kGdnFloor = 1e-6f;

// ---- registration -----------------------------------------------------

template <typename S>
Tensor<S> fan_in_uniform(Rng& rng, std::vector<int> shape, Eigen::Index fan_in) {
  Tensor<S> t(std::move(shape));
  const double s = 1.0 / std::sqrt(double(fan_in));
  for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = S(rng.uniform(-s, s));
  return t;
}

template <typename S>
void add_conv(ParamStore<S>& ps, Rng& rng, const std::string& name, int co, int ci, int k) {
  ps.add(name + ".w", fan_in_uniform<S>(rng, {co, ci, k, k}, Eigen::Index(ci) * k * k));
  ps.add(name + ".b", Tensor<S>({co}));
}

template <typename S>
void add_tconv(ParamStore<S>& ps, Rng& rng, const std::string& name, int ci, int co, int k) {
  ps.add(name + ".w", fan_in_uniform<S>(rng, {ci, co, k, k}, Eigen::Index(ci) * k * k));
  ps.add(name + ".b", Tensor<S>({co}));
}

template <typename S>
void add_dense(ParamStore<S>& ps, Rng& rng, const std::string& name, int out, int in) {
  ps.add(name + ".w", fan_in_uniform<S>(rng, {out, in}, in));
  ps.add(name + ".b", Tensor<S>({out}));
}

// beta starts at 1 and gamma at 0.1*I, stored pre-softplus.
template <typename S>
void add_gdn(ParamStore<S>& ps, const std::string& name, int C) {
  Tensor<S> beta = Tensor<S>::full({C}, kern::inv_softplus(S(1) - S(kGdnFloor)));
  Tensor<S> gamma = Tensor<S>::full({C, C}, S(-18));
  const S diag = kern::inv_softplus(S(0.1) - S(kGdnFloor));
  for (int i = 0; i < C; ++i) gamma.at(i, i) = diag;
  ps.add(name + ".beta_raw", std::move(beta));
  ps.add(name + ".gamma_raw", std::move(gamma));
}

template <typename S>
void add_lnorm(ParamStore<S>& ps, const std::string& name, int d) {
  ps.add(name + ".g", Tensor<S>::full({d}, S(1)));
  ps.add(name + ".b", Tensor<S>({d}));
}

template <typename S>
void add_mha(ParamStore<S>& ps, Rng& rng, const std::string& name, int d) {
  add_dense(ps, rng, name + ".q", d, d);
  add_dense(ps, rng, name + ".k", d, d);
  add_dense(ps, rng, name + ".v", d, d);
  add_dense(ps, rng, name + ".o", d, d);
}

template <typename S>
void add_mlp(ParamStore<S>& ps, Rng& rng, const std::string& name, int d, int hidden) {
  add_dense(ps, rng, name + ".fc1", hidden, d);
  add_dense(ps, rng, name + ".fc2", d, hidden);
}

// ---- forward ------------------------------------------------------------

template <class Ctx>
typename Ctx::V conv(Ctx& c, typename Ctx::V x, const std::string& name, int stride, int pad,
                     kern::PadMode mode = kern::PadMode::kZero) {
  if (pad > 0) x = c.pad2d(x, pad, mode);
  return c.conv2d(x, c.param(name + ".w"), c.param(name + ".b"), stride);
}

template <class Ctx>
typename Ctx::V tconv(Ctx& c, typename Ctx::V x, const std::string& name, int stride, int pad,
                      int outpad) {
  return c.tconv2d(x, c.param(name + ".w"), c.param(name + ".b"), stride, pad, outpad);
}

template <class Ctx>
typename Ctx::V dense(Ctx& c, typename Ctx::V x, const std::string& name) {
  return c.linear(x, c.param(name + ".w"), c.param(name + ".b"));
}

template <class Ctx, typename S = float>
typename Ctx::V gdn(Ctx& c, typename Ctx::V x, const std::string& name, bool inverse) {
  auto beta = c.add_scalar(c.softplus(c.param(name + ".beta_raw")), S(kGdnFloor));
  auto gamma = c.add_scalar(c.softplus(c.param(name + ".gamma_raw")), S(kGdnFloor));
  return c.gdn(x, beta, gamma, inverse);
}

template <class Ctx, typename S = float>
typename Ctx::V lnorm(Ctx& c, typename Ctx::V x, const std::string& name) {
  return c.layernorm(x, c.param(name + ".g"), c.param(name + ".b"), S(kLayerNormEps));
}

// Multi-head attention over batched token rows. q_in: [B*Tq, d],
// kv_in: [B*Tk, d].
template <class Ctx>
typename Ctx::V mha(Ctx& c, typename Ctx::V q_in, typename Ctx::V kv_in, const std::string& name,
                    int B, int Tq, int Tk, int heads, bool causal) {
  auto q = dense(c, q_in, name + ".q");
  auto k = dense(c, kv_in, name + ".k");
  auto v = dense(c, kv_in, name + ".v");
  auto s = c.attn_scores(q, k, B, heads, Tq, Tk);
  auto p = c.attn_softmax(s, B, heads, Tq, Tk, causal);
  auto o = c.attn_mix(p, v, B, heads, Tq, Tk);
  return dense(c, o, name + ".o");
}

template <class Ctx>
typename Ctx::V mlp(Ctx& c, typename Ctx::V x, const std::string& name) {
  return dense(c, c.gelu(dense(c, x, name + ".fc1")), name + ".fc2");
}

}  // namespace tec::nets

#endif  // TEC_NETS_HPP_
