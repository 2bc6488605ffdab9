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

#include "tec/ops.hpp"

#include <cmath>

namespace tec::ops {

template <typename S>
Tensor<S> softplus_t(const Tensor<S>& x) {
  Tensor<S> y(x.shape());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = kern::softplus(x[i]);
  return y;
}

template <typename S>
Tensor<S> sigmoid_t(const Tensor<S>& x) {
  Tensor<S> y(x.shape());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = kern::softplus_grad(x[i]);
  return y;
}

template <typename S>
Var<S> input(Tape<S>& t, Tensor<S> value, bool requires_grad) {
  return t.leaf(std::move(value), requires_grad);
}

namespace {

template <typename S>
bool any_grad(Tape<S>& t, std::initializer_list<Var<S>> vs) {
  for (Var<S> v : vs)
    if (t.requires_grad(v)) return true;
  return false;
}

}  // namespace

template <typename S>
Var<S> add(Tape<S>& t, Var<S> a, Var<S> b) {
  TEC_CHECK(same_shape(t.val(a).shape(), t.val(b).shape()), "add: shape mismatch");
  Tensor<S> y = t.val(a);
  y.array() += t.val(b).array();
  return t.make(std::move(y), any_grad(t, {a, b}), [a, b](Tape<S>& tp, const Tensor<S>& g) {
    tp.accum(a, g);
    tp.accum(b, g);
  });
}

template <typename S>
Var<S> sub(Tape<S>& t, Var<S> a, Var<S> b) {
  TEC_CHECK(same_shape(t.val(a).shape(), t.val(b).shape()), "sub: shape mismatch");
  Tensor<S> y = t.val(a);
  y.array() -= t.val(b).array();
  return t.make(std::move(y), any_grad(t, {a, b}), [a, b](Tape<S>& tp, const Tensor<S>& g) {
    tp.accum(a, g);
    Tensor<S> gn = g;
    gn.array() = -gn.array();
    tp.accum(b, std::move(gn));
  });
}

template <typename S>
Var<S> mul(Tape<S>& t, Var<S> a, Var<S> b) {
  TEC_CHECK(same_shape(t.val(a).shape(), t.val(b).shape()), "mul: shape mismatch");
  Tensor<S> y = t.val(a);
  y.array() *= t.val(b).array();
  return t.make(std::move(y), any_grad(t, {a, b}), [a, b](Tape<S>& tp, const Tensor<S>& g) {
    Tensor<S> ga = g;
    ga.array() *= tp.val(b).array();
    tp.accum(a, std::move(ga));
    Tensor<S> gb = g;
    gb.array() *= tp.val(a).array();
    tp.accum(b, std::move(gb));
  });
}

template <typename S>
Var<S> scale(Tape<S>& t, Var<S> a, S c) {
  Tensor<S> y = t.val(a);
  y.array() *= c;
  return t.make(std::move(y), t.requires_grad(a), [a, c](Tape<S>& tp, const Tensor<S>& g) {
    Tensor<S> ga = g;
    ga.array() *= c;
    tp.accum(a, std::move(ga));
  });
}

template <typename S>
Var<S> add_scalar(Tape<S>& t, Var<S> a, S c) {
  Tensor<S> y = t.val(a);
  y.array() += c;
  return t.make(std::move(y), t.requires_grad(a),
                [a](Tape<S>& tp, const Tensor<S>& g) { tp.accum(a, g); });
}

template <typename S>
Var<S> square(Tape<S>& t, Var<S> a) {
  Tensor<S> y = t.val(a);
  y.array() = y.array().square();
  return t.make(std::move(y), t.requires_grad(a), [a](Tape<S>& tp, const Tensor<S>& g) {
    Tensor<S> ga = g;
    ga.array() *= S(2) * tp.val(a).array();
    tp.accum(a, std::move(ga));
  });
}

template <typename S>
Var<S> tanh_(Tape<S>& t, Var<S> a) {
  Tensor<S> y = t.val(a);
  y.array() = y.array().tanh();
  return t.make(std::move(y), t.requires_grad(a), [a](Tape<S>& tp, const Tensor<S>& g) {
    Tensor<S> ga = g;
    ga.array() *= S(1) - tp.val(a).array().tanh().square();
    tp.accum(a, std::move(ga));
  });
}

template <typename S>
Var<S> sigmoid(Tape<S>& t, Var<S> a) {
  Tensor<S> y = sigmoid_t(t.val(a));
  return t.make(std::move(y), t.requires_grad(a), [a](Tape<S>& tp, const Tensor<S>& g) {
    Tensor<S> s = sigmoid_t(tp.val(a));
    Tensor<S> ga = g;
    ga.array() *= s.array() * (S(1) - s.array());
    tp.accum(a, std::move(ga));
  });
}

template <typename S>
Var<S> softplus(Tape<S>& t, Var<S> a) {
  Tensor<S> y = softplus_t(t.val(a));
  return t.make(std::move(y), t.requires_grad(a), [a](Tape<S>& tp, const Tensor<S>& g) {
    Tensor<S> s = sigmoid_t(tp.val(a));
    Tensor<S> ga = g;
    ga.array() *= s.array();
    tp.accum(a, std::move(ga));
  });
}

template <typename S>
Var<S> gelu(Tape<S>& t, Var<S> a) {
  Tensor<S> y = kern::gelu(t.val(a));
  return t.make(std::move(y), t.requires_grad(a), [a](Tape<S>& tp, const Tensor<S>& g) {
    tp.accum(a, kern::gelu_back(tp.val(a), g));
  });
}

template <typename S>
Var<S> sum(Tape<S>& t, Var<S> a) {
  Tensor<S> y = Tensor<S>::scalar(t.val(a).array().sum());
  return t.make(std::move(y), t.requires_grad(a), [a](Tape<S>& tp, const Tensor<S>& g) {
    tp.accum(a, Tensor<S>::full(tp.val(a).shape(), g[0]));
  });
}

template <typename S>
Var<S> mean(Tape<S>& t, Var<S> a) {
  const S inv = S(1) / S(t.val(a).size());
  Tensor<S> y = Tensor<S>::scalar(t.val(a).array().sum() * inv);
  return t.make(std::move(y), t.requires_grad(a), [a, inv](Tape<S>& tp, const Tensor<S>& g) {
    tp.accum(a, Tensor<S>::full(tp.val(a).shape(), g[0] * inv));
  });
}

template <typename S>
Var<S> mse(Tape<S>& t, Var<S> a, Var<S> b) {
  TEC_CHECK(same_shape(t.val(a).shape(), t.val(b).shape()), "mse: shape mismatch");
  const S inv = S(1) / S(t.val(a).size());
  Tensor<S> y = Tensor<S>::scalar((t.val(a).array() - t.val(b).array()).square().sum() * inv);
  return t.make(std::move(y), any_grad(t, {a, b}), [a, b, inv](Tape<S>& tp, const Tensor<S>& g) {
    Tensor<S> d(tp.val(a).shape());
    d.array() = (tp.val(a).array() - tp.val(b).array()) * (S(2) * inv * g[0]);
    Tensor<S> dn = d;
    dn.array() = -dn.array();
    tp.accum(a, std::move(d));
    tp.accum(b, std::move(dn));
  });
}

template <typename S>
Var<S> reshape(Tape<S>& t, Var<S> a, std::vector<int> shape) {
  Tensor<S> y = t.val(a).reshaped(shape);
  return t.make(std::move(y), t.requires_grad(a), [a](Tape<S>& tp, const Tensor<S>& g) {
    tp.accum(a, g.reshaped(tp.val(a).shape()));
  });
}

template <typename S>
Var<S> mul_mask(Tape<S>& t, Var<S> a, Tensor<S> mask) {
  TEC_CHECK(t.val(a).size() == mask.size(), "mul_mask: size mismatch");
  Tensor<S> y = t.val(a);
  y.array() *= mask.array();
  return t.make(std::move(y), t.requires_grad(a),
                [a, m = std::move(mask)](Tape<S>& tp, const Tensor<S>& g) {
                  Tensor<S> ga = g;
                  ga.array() *= m.array();
                  tp.accum(a, std::move(ga));
                });
}

template <typename S>
Tensor<S> gather_t(const Tensor<S>& x, std::vector<int> out_shape,
                   const std::vector<int64_t>& idx) {
  Tensor<S> y(std::move(out_shape));
  TEC_CHECK(Eigen::Index(idx.size()) == y.size(), "gather: index map size mismatch");
  for (size_t i = 0; i < idx.size(); ++i) y[Eigen::Index(i)] = x[idx[i]];
  return y;
}

template <typename S>
Var<S> gather(Tape<S>& t, Var<S> x, std::vector<int> out_shape, std::vector<int64_t> idx) {
  Tensor<S> y = gather_t(t.val(x), std::move(out_shape), idx);
  return t.make(std::move(y), t.requires_grad(x),
                [x, id = std::move(idx)](Tape<S>& tp, const Tensor<S>& g) {
                  Tensor<S> gx(tp.val(x).shape());
                  for (size_t i = 0; i < id.size(); ++i) gx[id[i]] += g[Eigen::Index(i)];
                  tp.accum(x, std::move(gx));
                });
}

template <typename S>
Var<S> pad2d(Tape<S>& t, Var<S> x, int p, kern::PadMode mode) {
  Tensor<S> y = kern::pad2d(t.val(x), p, mode);
  return t.make(std::move(y), t.requires_grad(x), [x, p, mode](Tape<S>& tp, const Tensor<S>& g) {
    tp.accum(x, kern::pad2d_back(g, p, mode, tp.val(x).shape()));
  });
}

template <typename S>
Var<S> conv2d(Tape<S>& t, Var<S> x, Var<S> w, Var<S> b, int stride) {
  Tensor<S> y = kern::conv2d(t.val(x), t.val(w), t.val(b), stride);
  return t.make(std::move(y), any_grad(t, {x, w, b}),
                [x, w, b, stride](Tape<S>& tp, const Tensor<S>& g) {
                  Tensor<S> gx, gw, gb;
                  kern::conv2d_back(tp.val(x), tp.val(w), g, stride,
                                    tp.requires_grad(x) ? &gx : nullptr,
                                    tp.requires_grad(w) ? &gw : nullptr,
                                    tp.requires_grad(b) ? &gb : nullptr);
                  if (!gx.empty()) tp.accum(x, std::move(gx));
                  if (!gw.empty()) tp.accum(w, std::move(gw));
                  if (!gb.empty()) tp.accum(b, std::move(gb));
                });
}

template <typename S>
Var<S> tconv2d(Tape<S>& t, Var<S> x, Var<S> w, Var<S> b, int stride, int pad, int outpad) {
  Tensor<S> y = kern::tconv2d(t.val(x), t.val(w), t.val(b), stride, pad, outpad);
  return t.make(std::move(y), any_grad(t, {x, w, b}),
                [x, w, b, stride, pad, outpad](Tape<S>& tp, const Tensor<S>& g) {
                  Tensor<S> gx, gw, gb;
                  kern::tconv2d_back(tp.val(x), tp.val(w), g, stride, pad, outpad,
                                     tp.requires_grad(x) ? &gx : nullptr,
                                     tp.requires_grad(w) ? &gw : nullptr,
                                     tp.requires_grad(b) ? &gb : nullptr);
                  if (!gx.empty()) tp.accum(x, std::move(gx));
                  if (!gw.empty()) tp.accum(w, std::move(gw));
                  if (!gb.empty()) tp.accum(b, std::move(gb));
                });
}

template <typename S>
Var<S> linear(Tape<S>& t, Var<S> x, Var<S> w, Var<S> b) {
  Tensor<S> y = kern::linear(t.val(x), t.val(w), t.val(b));
  return t.make(std::move(y), any_grad(t, {x, w, b}), [x, w, b](Tape<S>& tp, const Tensor<S>& g) {
    Tensor<S> gx, gw, gb;
    kern::linear_back(tp.val(x), tp.val(w), g, tp.requires_grad(x) ? &gx : nullptr,
                      tp.requires_grad(w) ? &gw : nullptr, tp.requires_grad(b) ? &gb : nullptr);
    if (!gx.empty()) tp.accum(x, std::move(gx));
    if (!gw.empty()) tp.accum(w, std::move(gw));
    if (!gb.empty()) tp.accum(b, std::move(gb));
  });
}

template <typename S>
Var<S> gdn(Tape<S>& t, Var<S> x, Var<S> beta, Var<S> gamma, bool inverse) {
  Tensor<S> y = kern::gdn(t.val(x), t.val(beta), t.val(gamma), inverse);
  return t.make(std::move(y), any_grad(t, {x, beta, gamma}),
                [x, beta, gamma, inverse](Tape<S>& tp, const Tensor<S>& g) {
                  Tensor<S> gx, gb, gg;
                  kern::gdn_back(tp.val(x), tp.val(beta), tp.val(gamma), inverse, g,
                                 tp.requires_grad(x) ? &gx : nullptr,
                                 tp.requires_grad(beta) ? &gb : nullptr,
                                 tp.requires_grad(gamma) ? &gg : nullptr);
                  if (!gx.empty()) tp.accum(x, std::move(gx));
                  if (!gb.empty()) tp.accum(beta, std::move(gb));
                  if (!gg.empty()) tp.accum(gamma, std::move(gg));
                });
}

template <typename S>
Var<S> layernorm(Tape<S>& t, Var<S> x, Var<S> gamma, Var<S> beta, S eps) {
  Tensor<S> y = kern::layernorm(t.val(x), t.val(gamma), t.val(beta), eps);
  return t.make(std::move(y), any_grad(t, {x, gamma, beta}),
                [x, gamma, beta, eps](Tape<S>& tp, const Tensor<S>& g) {
                  Tensor<S> gx, gg, gb;
                  kern::layernorm_back(tp.val(x), tp.val(gamma), tp.val(beta), eps, g,
                                       tp.requires_grad(x) ? &gx : nullptr,
                                       tp.requires_grad(gamma) ? &gg : nullptr,
                                       tp.requires_grad(beta) ? &gb : nullptr);
                  if (!gx.empty()) tp.accum(x, std::move(gx));
                  if (!gg.empty()) tp.accum(gamma, std::move(gg));
                  if (!gb.empty()) tp.accum(beta, std::move(gb));
                });
}

template <typename S>
Var<S> attn_scores(Tape<S>& t, Var<S> q, Var<S> k, int B, int H, int Tq, int Tk) {
  Tensor<S> y = kern::attn_scores(t.val(q), t.val(k), B, H, Tq, Tk);
  return t.make(std::move(y), any_grad(t, {q, k}),
                [q, k, B, H, Tq, Tk](Tape<S>& tp, const Tensor<S>& g) {
                  Tensor<S> gq, gk;
                  kern::attn_scores_back(tp.val(q), tp.val(k), B, H, Tq, Tk, g,
                                         tp.requires_grad(q) ? &gq : nullptr,
                                         tp.requires_grad(k) ? &gk : nullptr);
                  if (!gq.empty()) tp.accum(q, std::move(gq));
                  if (!gk.empty()) tp.accum(k, std::move(gk));
                });
}

template <typename S>
Var<S> attn_softmax(Tape<S>& t, Var<S> s, int B, int H, int Tq, int Tk, bool causal) {
  Tensor<S> y = kern::attn_softmax(t.val(s), B, H, Tq, Tk, causal);
  // The backward reads the op's own output; its id is known before make.
  const int self_id = int(t.node_count());
  return t.make(std::move(y), t.requires_grad(s),
                [s, self_id, B, H, Tq, Tk, causal](Tape<S>& tp, const Tensor<S>& g) {
                  const Tensor<S>& p = tp.val(Var<S>{self_id});
                  tp.accum(s, kern::attn_softmax_back(p, g, B, H, Tq, Tk, causal));
                });
}

template <typename S>
Var<S> attn_mix(Tape<S>& t, Var<S> p, Var<S> v, int B, int H, int Tq, int Tk) {
  Tensor<S> y = kern::attn_mix(t.val(p), t.val(v), B, H, Tq, Tk);
  return t.make(std::move(y), any_grad(t, {p, v}),
                [p, v, B, H, Tq, Tk](Tape<S>& tp, const Tensor<S>& g) {
                  Tensor<S> gp, gv;
                  kern::attn_mix_back(tp.val(p), tp.val(v), B, H, Tq, Tk, g,
                                      tp.requires_grad(p) ? &gp : nullptr,
                                      tp.requires_grad(v) ? &gv : nullptr);
                  if (!gp.empty()) tp.accum(p, std::move(gp));
                  if (!gv.empty()) tp.accum(v, std::move(gv));
                });
}

template <typename S>
Tensor<S> concat_rows_blocks_t(const Tensor<S>& a, const Tensor<S>& b, int B) {
  const int D = a.dim(1);
  TEC_CHECK(b.dim(1) == D, "concat_rows_blocks: dim mismatch");
  const int Ta = a.dim(0) / B, Tb = b.dim(0) / B;
  Tensor<S> y({B * (Ta + Tb), D});
  for (int n = 0; n < B; ++n) {
    std::copy_n(a.data() + Eigen::Index(n) * Ta * D, Eigen::Index(Ta) * D,
                y.data() + Eigen::Index(n) * (Ta + Tb) * D);
    std::copy_n(b.data() + Eigen::Index(n) * Tb * D, Eigen::Index(Tb) * D,
                y.data() + (Eigen::Index(n) * (Ta + Tb) + Ta) * D);
  }
  return y;
}

template <typename S>
Var<S> concat_rows_blocks(Tape<S>& t, Var<S> a, Var<S> b, int B) {
  Tensor<S> y = concat_rows_blocks_t(t.val(a), t.val(b), B);
  return t.make(std::move(y), any_grad(t, {a, b}), [a, b, B](Tape<S>& tp, const Tensor<S>& g) {
    const int D = tp.val(a).dim(1);
    const int Ta = tp.val(a).dim(0) / B, Tb = tp.val(b).dim(0) / B;
    Tensor<S> ga(tp.val(a).shape()), gb(tp.val(b).shape());
    for (int n = 0; n < B; ++n) {
      std::copy_n(g.data() + Eigen::Index(n) * (Ta + Tb) * D, Eigen::Index(Ta) * D,
                  ga.data() + Eigen::Index(n) * Ta * D);
      std::copy_n(g.data() + (Eigen::Index(n) * (Ta + Tb) + Ta) * D, Eigen::Index(Tb) * D,
                  gb.data() + Eigen::Index(n) * Tb * D);
    }
    tp.accum(a, std::move(ga));
    tp.accum(b, std::move(gb));
  });
}

template <typename S>
Tensor<S> concat_channels_t(const std::vector<Tensor<S>>& xs) {
  TEC_CHECK(!xs.empty(), "concat_channels: empty input");
  const int N = xs[0].dim(0), H = xs[0].dim(2), W = xs[0].dim(3);
  int C = 0;
  for (const auto& x : xs) C += x.dim(1);
  Tensor<S> y({N, C, H, W});
  const Eigen::Index hw = Eigen::Index(H) * W;
  for (int n = 0; n < N; ++n) {
    Eigen::Index off = 0;
    for (const auto& x : xs) {
      const Eigen::Index nc = Eigen::Index(x.dim(1)) * hw;
      std::copy_n(x.data() + Eigen::Index(n) * nc, nc,
                  y.data() + (Eigen::Index(n) * C) * hw + off);
      off += nc;
    }
  }
  return y;
}

template <typename S>
Var<S> concat_channels(Tape<S>& t, const std::vector<Var<S>>& vars) {
  std::vector<Tensor<S>> vals;
  vals.reserve(vars.size());
  bool rg = false;
  for (Var<S> v : vars) {
    vals.push_back(t.val(v));
    rg = rg || t.requires_grad(v);
  }
  Tensor<S> y = concat_channels_t(vals);
  return t.make(std::move(y), rg, [vars](Tape<S>& tp, const Tensor<S>& g) {
    const int N = g.dim(0), C = g.dim(1);
    const Eigen::Index hw = Eigen::Index(g.dim(2)) * g.dim(3);
    Eigen::Index off = 0;
    for (Var<S> v : vars) {
      const int c = tp.val(v).dim(1);
      Tensor<S> gv(tp.val(v).shape());
      for (int n = 0; n < N; ++n) {
        std::copy_n(g.data() + (Eigen::Index(n) * C) * hw + off, Eigen::Index(c) * hw,
                    gv.data() + Eigen::Index(n) * c * hw);
      }
      tp.accum(v, std::move(gv));
      off += Eigen::Index(c) * hw;
    }
  });
}

template <typename S>
Tensor<S> slice_cols_t(const Tensor<S>& x, int c0, int c1) {
  const int R = x.dim(0), D = x.dim(1);
  TEC_CHECK(0 <= c0 && c0 < c1 && c1 <= D, "slice_cols: bad range");
  Tensor<S> y({R, c1 - c0});
  for (int rI = 0; rI < R; ++rI)
    std::copy_n(x.data() + Eigen::Index(rI) * D + c0, c1 - c0,
                y.data() + Eigen::Index(rI) * (c1 - c0));
  return y;
}

template <typename S>
Var<S> slice_cols(Tape<S>& t, Var<S> x, int c0, int c1) {
  Tensor<S> y = slice_cols_t(t.val(x), c0, c1);
  return t.make(std::move(y), t.requires_grad(x), [x, c0, c1](Tape<S>& tp, const Tensor<S>& g) {
    const int R = tp.val(x).dim(0), D = tp.val(x).dim(1);
    Tensor<S> gx({R, D});
    for (int rI = 0; rI < R; ++rI)
      std::copy_n(g.data() + Eigen::Index(rI) * (c1 - c0), c1 - c0,
                  gx.data() + Eigen::Index(rI) * D + c0);
    tp.accum(x, std::move(gx));
  });
}

template <typename S>
Tensor<S> tile_rows_t(const Tensor<S>& v, int rows) {
  const Eigen::Index D = v.size();
  Tensor<S> y({rows, int(D)});
  for (int rI = 0; rI < rows; ++rI) std::copy_n(v.data(), D, y.data() + Eigen::Index(rI) * D);
  return y;
}

template <typename S>
Var<S> tile_rows(Tape<S>& t, Var<S> v, int rows) {
  Tensor<S> y = tile_rows_t(t.val(v), rows);
  return t.make(std::move(y), t.requires_grad(v), [v, rows](Tape<S>& tp, const Tensor<S>& g) {
    const Eigen::Index D = tp.val(v).size();
    Tensor<S> gv(tp.val(v).shape());
    for (int rI = 0; rI < rows; ++rI)
      gv.array() += Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>>(
          g.data() + Eigen::Index(rI) * D, D);
    tp.accum(v, std::move(gv));
  });
}

template <typename S>
Tensor<S> add_rows_cycle_t(const Tensor<S>& x, const Tensor<S>& e) {
  const int R = x.dim(0), D = x.dim(1), T = e.dim(0);
  TEC_CHECK(e.dim(1) == D && R % T == 0, "add_rows_cycle: shape mismatch");
  Tensor<S> y = x;
  for (int rI = 0; rI < R; ++rI) {
    Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>>(y.data() + Eigen::Index(rI) * D, D) +=
        Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>>(e.data() + Eigen::Index(rI % T) * D,
                                                             D);
  }
  return y;
}

template <typename S>
Var<S> add_rows_cycle(Tape<S>& t, Var<S> x, Var<S> e) {
  Tensor<S> y = add_rows_cycle_t(t.val(x), t.val(e));
  return t.make(std::move(y), any_grad(t, {x, e}), [x, e](Tape<S>& tp, const Tensor<S>& g) {
    tp.accum(x, g);
    if (tp.requires_grad(e)) {
      const int R = g.dim(0), D = g.dim(1), T = tp.val(e).dim(0);
      Tensor<S> ge(tp.val(e).shape());
      for (int rI = 0; rI < R; ++rI) {
        Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>>(ge.data() + Eigen::Index(rI % T) * D, D) +=
            Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>>(g.data() + Eigen::Index(rI) * D,
                                                                 D);
      }
      tp.accum(e, std::move(ge));
    }
  });
}

#define TEC_INSTANTIATE(S)                                                                   \
  template Tensor<S> softplus_t<S>(const Tensor<S>&);                                       \
  template Tensor<S> sigmoid_t<S>(const Tensor<S>&);                                        \
  template Var<S> input<S>(Tape<S>&, Tensor<S>, bool);                                      \
  template Var<S> add<S>(Tape<S>&, Var<S>, Var<S>);                                         \
  template Var<S> sub<S>(Tape<S>&, Var<S>, Var<S>);                                         \
  template Var<S> mul<S>(Tape<S>&, Var<S>, Var<S>);                                         \
  template Var<S> scale<S>(Tape<S>&, Var<S>, S);                                            \
  template Var<S> add_scalar<S>(Tape<S>&, Var<S>, S);                                       \
  template Var<S> square<S>(Tape<S>&, Var<S>);                                              \
  template Var<S> tanh_<S>(Tape<S>&, Var<S>);                                               \
  template Var<S> sigmoid<S>(Tape<S>&, Var<S>);                                             \
  template Var<S> softplus<S>(Tape<S>&, Var<S>);                                            \
  template Var<S> gelu<S>(Tape<S>&, Var<S>);                                                \
  template Var<S> sum<S>(Tape<S>&, Var<S>);                                                 \
  template Var<S> mean<S>(Tape<S>&, Var<S>);                                                \
  template Var<S> mse<S>(Tape<S>&, Var<S>, Var<S>);                                         \
  template Var<S> reshape<S>(Tape<S>&, Var<S>, std::vector<int>);                           \
  template Var<S> mul_mask<S>(Tape<S>&, Var<S>, Tensor<S>);                                 \
  template Tensor<S> gather_t<S>(const Tensor<S>&, std::vector<int>,                        \
                                 const std::vector<int64_t>&);                              \
  template Var<S> gather<S>(Tape<S>&, Var<S>, std::vector<int>, std::vector<int64_t>);      \
  template Var<S> pad2d<S>(Tape<S>&, Var<S>, int, kern::PadMode);                           \
  template Var<S> conv2d<S>(Tape<S>&, Var<S>, Var<S>, Var<S>, int);                         \
  template Var<S> tconv2d<S>(Tape<S>&, Var<S>, Var<S>, Var<S>, int, int, int);              \
  template Var<S> linear<S>(Tape<S>&, Var<S>, Var<S>, Var<S>);                              \
  template Var<S> gdn<S>(Tape<S>&, Var<S>, Var<S>, Var<S>, bool);                           \
  template Var<S> layernorm<S>(Tape<S>&, Var<S>, Var<S>, Var<S>, S);                        \
  template Var<S> attn_scores<S>(Tape<S>&, Var<S>, Var<S>, int, int, int, int);             \
  template Var<S> attn_softmax<S>(Tape<S>&, Var<S>, int, int, int, int, bool);              \
  template Var<S> attn_mix<S>(Tape<S>&, Var<S>, Var<S>, int, int, int, int);                \
  template Tensor<S> concat_rows_blocks_t<S>(const Tensor<S>&, const Tensor<S>&, int);      \
  template Var<S> concat_rows_blocks<S>(Tape<S>&, Var<S>, Var<S>, int);                     \
  template Tensor<S> concat_channels_t<S>(const std::vector<Tensor<S>>&);                   \
  template Var<S> concat_channels<S>(Tape<S>&, const std::vector<Var<S>>&);                 \
  template Tensor<S> slice_cols_t<S>(const Tensor<S>&, int, int);                           \
  template Var<S> slice_cols<S>(Tape<S>&, Var<S>, int, int);                                \
  template Tensor<S> tile_rows_t<S>(const Tensor<S>&, int);                                 \
  template Var<S> tile_rows<S>(Tape<S>&, Var<S>, int);                                      \
  template Tensor<S> add_rows_cycle_t<S>(const Tensor<S>&, const Tensor<S>&);               \
  template Var<S> add_rows_cycle<S>(Tape<S>&, Var<S>, Var<S>);

TEC_INSTANTIATE(float)
TEC_INSTANTIATE(double)
#undef TEC_INSTANTIATE

}  // namespace tec::ops
