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

#include "tec/kernels.hpp"

#include <cmath>

namespace tec::kern {

namespace {

// Mirror an out-of-range coordinate back into [0, n) without repeating the
// edge sample. Valid while |i| < 2n-2, which pad p < n guarantees.
inline int reflect_index(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

// Gather sliding patches of one sample into a [Ci*k*k, Ho*Wo] column-major
// matrix; column ordering is (oh, ow) row-major.
template <typename S>
void im2col(const S* x, int C, int H, int W, int k, int stride, MatCM<S>& cols) {
  const int Ho = (H - k) / stride + 1;
  const int Wo = (W - k) / stride + 1;
  for (int ow = 0; ow < Wo; ++ow) {
    for (int oh = 0; oh < Ho; ++oh) {
      S* col = cols.data() + (Eigen::Index(oh) * Wo + ow) * cols.rows();
      const int h0 = oh * stride, w0 = ow * stride;
      for (int c = 0; c < C; ++c) {
        const S* src = x + (Eigen::Index(c) * H + h0) * W + w0;
        for (int u = 0; u < k; ++u) {
          for (int v = 0; v < k; ++v) *col++ = src[Eigen::Index(u) * W + v];
        }
      }
    }
  }
}

// Scatter-add of im2col's transpose: accumulate patch columns back onto the
// image grid.
template <typename S>
void col2im(const MatCM<S>& cols, int C, int H, int W, int k, int stride, S* x) {
  const int Ho = (H - k) / stride + 1;
  const int Wo = (W - k) / stride + 1;
  for (int ow = 0; ow < Wo; ++ow) {
    for (int oh = 0; oh < Ho; ++oh) {
      const S* col = cols.data() + (Eigen::Index(oh) * Wo + ow) * cols.rows();
      const int h0 = oh * stride, w0 = ow * stride;
      for (int c = 0; c < C; ++c) {
        S* dst = x + (Eigen::Index(c) * H + h0) * W + w0;
        for (int u = 0; u < k; ++u) {
          for (int v = 0; v < k; ++v) dst[Eigen::Index(u) * W + v] += *col++;
        }
      }
    }
  }
}

}  // namespace

// ---- padding ----------------------------------------------------------

template <typename S>
Tensor<S> pad2d(const Tensor<S>& x, int p, PadMode mode) {
  TEC_CHECK(x.rank() == 4, "pad2d expects [N,C,H,W]");
  if (p == 0) return x;
  const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  TEC_CHECK(mode == PadMode::kZero || (p < H && p < W), "reflect pad wider than input");
  Tensor<S> y({N, C, H + 2 * p, W + 2 * p});
  const int Hp = H + 2 * p, Wp = W + 2 * p;
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const S* src = x.data() + (Eigen::Index(n) * C + c) * H * W;
      S* dst = y.data() + (Eigen::Index(n) * C + c) * Hp * Wp;
      if (mode == PadMode::kZero) {
        for (int h = 0; h < H; ++h) {
          S* row = dst + Eigen::Index(h + p) * Wp + p;
          const S* srow = src + Eigen::Index(h) * W;
          for (int w = 0; w < W; ++w) row[w] = srow[w];
        }
      } else {
        for (int h = 0; h < Hp; ++h) {
          const int sh = reflect_index(h - p, H);
          S* row = dst + Eigen::Index(h) * Wp;
          const S* srow = src + Eigen::Index(sh) * W;
          for (int w = 0; w < Wp; ++w) row[w] = srow[reflect_index(w - p, W)];
        }
      }
    }
  }
  return y;
}

template <typename S>
Tensor<S> pad2d_back(const Tensor<S>& gy, int p, PadMode mode, const std::vector<int>& x_shape) {
  if (p == 0) return gy;
  const int N = x_shape[0], C = x_shape[1], H = x_shape[2], W = x_shape[3];
  const int Hp = H + 2 * p, Wp = W + 2 * p;
  Tensor<S> gx(x_shape);
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < C; ++c) {
      const S* src = gy.data() + (Eigen::Index(n) * C + c) * Hp * Wp;
      S* dst = gx.data() + (Eigen::Index(n) * C + c) * H * W;
      if (mode == PadMode::kZero) {
        for (int h = 0; h < H; ++h) {
          const S* row = src + Eigen::Index(h + p) * Wp + p;
          S* drow = dst + Eigen::Index(h) * W;
          for (int w = 0; w < W; ++w) drow[w] = row[w];
        }
      } else {
        for (int h = 0; h < Hp; ++h) {
          const int sh = reflect_index(h - p, H);
          const S* row = src + Eigen::Index(h) * Wp;
          for (int w = 0; w < Wp; ++w) dst[Eigen::Index(sh) * W + reflect_index(w - p, W)] += row[w];
        }
      }
    }
  }
  return gx;
}

// ---- convolution -------------------------------------------------------

template <typename S>
Tensor<S> conv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b, int stride) {
  TEC_CHECK(x.rank() == 4 && w.rank() == 4, "conv2d expects 4-d input and weights");
  const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Co = w.dim(0), k = w.dim(2);
  TEC_CHECK(w.dim(1) == Ci && w.dim(3) == k, "conv2d weight shape mismatch");
  TEC_CHECK(H >= k && W >= k, "conv2d input smaller than kernel");
  const int Ho = (H - k) / stride + 1;
  const int Wo = (W - k) / stride + 1;

  Tensor<S> y({N, Co, Ho, Wo});
  MatCM<S> cols(Eigen::Index(Ci) * k * k, Eigen::Index(Ho) * Wo);
  auto wm = as_mat(w, Co, Eigen::Index(Ci) * k * k);
  for (int n = 0; n < N; ++n) {
    im2col(x.data() + Eigen::Index(n) * Ci * H * W, Ci, H, W, k, stride, cols);
    Eigen::Map<MatRM<S>> ym(y.data() + Eigen::Index(n) * Co * Ho * Wo, Co, Eigen::Index(Ho) * Wo);
    ym.noalias() = wm * cols;
    if (b.size()) ym.colwise() += Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(b.data(), Co);
  }
  return y;
}

template <typename S>
void conv2d_back(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& gy, int stride,
                 Tensor<S>* gx, Tensor<S>* gw, Tensor<S>* gb) {
  const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Co = w.dim(0), k = w.dim(2);
  const int Ho = gy.dim(2), Wo = gy.dim(3);
  const Eigen::Index kk = Eigen::Index(Ci) * k * k, hw = Eigen::Index(Ho) * Wo;

  if (gx) *gx = Tensor<S>(x.shape());
  if (gw) *gw = Tensor<S>(w.shape());
  if (gb) *gb = Tensor<S>({Co});
  auto wm = as_mat(w, Co, kk);
  MatCM<S> cols(kk, hw);
  MatCM<S> gcols(kk, hw);
  for (int n = 0; n < N; ++n) {
    Eigen::Map<const MatRM<S>> gym(gy.data() + Eigen::Index(n) * Co * hw, Co, hw);
    if (gx) {
      gcols.noalias() = wm.transpose() * gym;
      col2im(gcols, Ci, H, W, k, stride, gx->data() + Eigen::Index(n) * Ci * H * W);
    }
    if (gw) {
      im2col(x.data() + Eigen::Index(n) * Ci * H * W, Ci, H, W, k, stride, cols);
      as_mat(*gw, Co, kk).noalias() += gym * cols.transpose();
    }
    if (gb) {
      Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(gb->data(), Co) += gym.rowwise().sum();
    }
  }
}

// ---- transposed convolution ---------------------------------------------
//
// Implemented through an unpadded canvas of size s*(H-1)+k: forward scatters
// weighted patches onto the canvas and crops rows/cols [p, p+Ho); the data
// gradient gathers the zero-embedded output gradient with im2col.

template <typename S>
Tensor<S> tconv2d(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b, int stride, int pad,
                  int outpad) {
  TEC_CHECK(x.rank() == 4 && w.rank() == 4, "tconv2d expects 4-d input and weights");
  const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Co = w.dim(1), k = w.dim(2);
  TEC_CHECK(w.dim(0) == Ci && w.dim(3) == k, "tconv2d weight shape mismatch");
  TEC_CHECK(outpad <= pad && pad < k, "tconv2d requires outpad <= pad < kernel");
  const int Hc = stride * (H - 1) + k, Wc = stride * (W - 1) + k;
  const int Ho = Hc - 2 * pad + outpad, Wo = Wc - 2 * pad + outpad;

  Tensor<S> y({N, Co, Ho, Wo});
  const Eigen::Index kk = Eigen::Index(Co) * k * k, hw = Eigen::Index(H) * W;
  auto wm = as_mat(w, Ci, kk);  // [Ci, Co*k*k]
  MatCM<S> cols(kk, hw);
  Tensor<S> canvas({Co, Hc, Wc});
  for (int n = 0; n < N; ++n) {
    Eigen::Map<const MatRM<S>> xm(x.data() + Eigen::Index(n) * Ci * hw, Ci, hw);
    cols.noalias() = wm.transpose() * xm;
    canvas.array().setZero();
    col2im(cols, Co, Hc, Wc, k, stride, canvas.data());
    for (int c = 0; c < Co; ++c) {
      const S bias = b.size() ? b[c] : S(0);
      for (int h = 0; h < Ho; ++h) {
        const S* src = canvas.data() + (Eigen::Index(c) * Hc + h + pad) * Wc + pad;
        S* dst = y.data() + ((Eigen::Index(n) * Co + c) * Ho + h) * Wo;
        for (int wo = 0; wo < Wo; ++wo) dst[wo] = src[wo] + bias;
      }
    }
  }
  return y;
}

template <typename S>
void tconv2d_back(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& gy, int stride, int pad,
                  int outpad, Tensor<S>* gx, Tensor<S>* gw, Tensor<S>* gb) {
  (void)outpad;
  const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Co = w.dim(1), k = w.dim(2);
  const int Ho = gy.dim(2), Wo = gy.dim(3);
  const int Hc = stride * (H - 1) + k, Wc = stride * (W - 1) + k;
  const Eigen::Index kk = Eigen::Index(Co) * k * k, hw = Eigen::Index(H) * W;

  if (gx) *gx = Tensor<S>(x.shape());
  if (gw) *gw = Tensor<S>(w.shape());
  if (gb) *gb = Tensor<S>({Co});
  auto wm = as_mat(w, Ci, kk);
  Tensor<S> canvas({Co, Hc, Wc});
  MatCM<S> gcols(kk, hw);
  for (int n = 0; n < N; ++n) {
    // Re-embed the output gradient into the canvas the forward cropped from.
    canvas.array().setZero();
    for (int c = 0; c < Co; ++c) {
      for (int h = 0; h < Ho; ++h) {
        S* dst = canvas.data() + (Eigen::Index(c) * Hc + h + pad) * Wc + pad;
        const S* src = gy.data() + ((Eigen::Index(n) * Co + c) * Ho + h) * Wo;
        for (int wo = 0; wo < Wo; ++wo) dst[wo] += src[wo];
      }
    }
    im2col(canvas.data(), Co, Hc, Wc, k, stride, gcols);
    if (gx) {
      Eigen::Map<MatRM<S>> gxm(gx->data() + Eigen::Index(n) * Ci * hw, Ci, hw);
      gxm.noalias() = wm * gcols;
    }
    if (gw) {
      Eigen::Map<const MatRM<S>> xm(x.data() + Eigen::Index(n) * Ci * hw, Ci, hw);
      as_mat(*gw, Ci, kk).noalias() += xm * gcols.transpose();
    }
    if (gb) {
      Eigen::Map<const MatRM<S>> gym(gy.data() + Eigen::Index(n) * Co * Ho * Wo, Co,
                                     Eigen::Index(Ho) * Wo);
      Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(gb->data(), Co) += gym.rowwise().sum();
    }
  }
}

// ---- dense -------------------------------------------------------------

template <typename S>
Tensor<S> linear(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& b) {
  const Eigen::Index in = w.dim(1), out = w.dim(0);
  const Eigen::Index R = x.size() / in;
  Tensor<S> y({int(R), int(out)});
  as_mat(y, R, out).noalias() = as_mat(x, R, in) * as_mat(w, out, in).transpose();
  if (b.size()) {
    as_mat(y, R, out).rowwise() +=
        Eigen::Map<const Eigen::Matrix<S, 1, Eigen::Dynamic>>(b.data(), out);
  }
  return y;
}

template <typename S>
void linear_back(const Tensor<S>& x, const Tensor<S>& w, const Tensor<S>& gy, Tensor<S>* gx,
                 Tensor<S>* gw, Tensor<S>* gb) {
  const Eigen::Index in = w.dim(1), out = w.dim(0);
  const Eigen::Index R = x.size() / in;
  auto gym = as_mat(gy, R, out);
  if (gx) {
    *gx = Tensor<S>(x.shape());
    as_mat(*gx, R, in).noalias() = gym * as_mat(w, out, in);
  }
  if (gw) {
    *gw = Tensor<S>(w.shape());
    as_mat(*gw, out, in).noalias() = gym.transpose() * as_mat(x, R, in);
  }
  if (gb) {
    *gb = Tensor<S>({int(out)});
    Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(gb->data(), out) = gym.colwise().sum();
  }
}

// ---- divisive normalization ---------------------------------------------

template <typename S>
Tensor<S> gdn(const Tensor<S>& x, const Tensor<S>& beta, const Tensor<S>& gamma, bool inverse) {
  const int N = x.dim(0), C = x.dim(1);
  const Eigen::Index P = Eigen::Index(x.dim(2)) * x.dim(3);
  Tensor<S> y(x.shape());
  auto gm = as_mat(gamma, C, C);
  auto bv = Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(beta.data(), C);
  MatRM<S> x2(C, P), r(C, P);
  for (int n = 0; n < N; ++n) {
    Eigen::Map<const MatRM<S>> xm(x.data() + Eigen::Index(n) * C * P, C, P);
    x2 = xm.array().square();
    r.noalias() = gm * x2;
    r.colwise() += bv;
    Eigen::Map<MatRM<S>> ym(y.data() + Eigen::Index(n) * C * P, C, P);
    if (inverse)
      ym = xm.array() * r.array().sqrt();
    else
      ym = xm.array() * r.array().rsqrt();
  }
  return y;
}

template <typename S>
void gdn_back(const Tensor<S>& x, const Tensor<S>& beta, const Tensor<S>& gamma, bool inverse,
              const Tensor<S>& gy, Tensor<S>* gx, Tensor<S>* gbeta, Tensor<S>* ggamma) {
  const int N = x.dim(0), C = x.dim(1);
  const Eigen::Index P = Eigen::Index(x.dim(2)) * x.dim(3);
  if (gx) *gx = Tensor<S>(x.shape());
  if (gbeta) *gbeta = Tensor<S>({C});
  if (ggamma) *ggamma = Tensor<S>({C, C});
  auto gm = as_mat(gamma, C, C);
  auto bv = Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, 1>>(beta.data(), C);
  MatRM<S> x2(C, P), r(C, P), gr(C, P);
  for (int n = 0; n < N; ++n) {
    Eigen::Map<const MatRM<S>> xm(x.data() + Eigen::Index(n) * C * P, C, P);
    Eigen::Map<const MatRM<S>> gym(gy.data() + Eigen::Index(n) * C * P, C, P);
    x2 = xm.array().square();
    r.noalias() = gm * x2;
    r.colwise() += bv;
    // dL/dr: y = x * r^(+-1/2)  =>  dy/dr = +-1/2 * x * r^(-+...)
    if (inverse)
      gr = gym.array() * xm.array() * (S(0.5) * r.array().rsqrt());
    else
      gr = gym.array() * xm.array() * (S(-0.5) * r.array().pow(S(-1.5)));
    if (gx) {
      Eigen::Map<MatRM<S>> gxm(gx->data() + Eigen::Index(n) * C * P, C, P);
      if (inverse)
        gxm = gym.array() * r.array().sqrt();
      else
        gxm = gym.array() * r.array().rsqrt();
      // r depends on every channel's square at the same position.
      gxm.noalias() += (S(2) * xm.array() * (gm.transpose() * gr).array()).matrix();
    }
    if (gbeta)
      Eigen::Map<Eigen::Matrix<S, Eigen::Dynamic, 1>>(gbeta->data(), C) += gr.rowwise().sum();
    if (ggamma) as_mat(*ggamma, C, C).noalias() += gr * x2.transpose();
  }
}

// ---- layer norm ----------------------------------------------------------

template <typename S>
Tensor<S> layernorm(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta, S eps) {
  const Eigen::Index D = gamma.size();
  const Eigen::Index R = x.size() / D;
  Tensor<S> y(x.shape());
  auto gv = Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>>(gamma.data(), D);
  auto bv = Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>>(beta.data(), D);
  for (Eigen::Index rI = 0; rI < R; ++rI) {
    Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>> row(x.data() + rI * D, D);
    Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>> out(y.data() + rI * D, D);
    const S mu = row.mean();
    const S var = (row - mu).square().mean();
    const S inv = S(1) / std::sqrt(var + eps);
    out = (row - mu) * inv * gv + bv;
  }
  return y;
}

template <typename S>
void layernorm_back(const Tensor<S>& x, const Tensor<S>& gamma, const Tensor<S>& beta, S eps,
                    const Tensor<S>& gy, Tensor<S>* gx, Tensor<S>* ggamma, Tensor<S>* gbeta) {
  (void)beta;
  const Eigen::Index D = gamma.size();
  const Eigen::Index R = x.size() / D;
  if (gx) *gx = Tensor<S>(x.shape());
  if (ggamma) *ggamma = Tensor<S>({int(D)});
  if (gbeta) *gbeta = Tensor<S>({int(D)});
  auto gv = Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>>(gamma.data(), D);
  for (Eigen::Index rI = 0; rI < R; ++rI) {
    Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>> row(x.data() + rI * D, D);
    Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>> g(gy.data() + rI * D, D);
    const S mu = row.mean();
    const S var = (row - mu).square().mean();
    const S inv = S(1) / std::sqrt(var + eps);
    Eigen::Array<S, Eigen::Dynamic, 1> xhat = (row - mu) * inv;
    if (ggamma)
      Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>>(ggamma->data(), D) += g * xhat;
    if (gbeta) Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>>(gbeta->data(), D) += g;
    if (gx) {
      Eigen::Array<S, Eigen::Dynamic, 1> gh = g * gv;
      const S m1 = gh.mean();
      const S m2 = (gh * xhat).mean();
      Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>> out(gx->data() + rI * D, D);
      out = inv * (gh - m1 - xhat * m2);
    }
  }
}

// ---- attention ------------------------------------------------------------

template <typename S>
Tensor<S> attn_scores(const Tensor<S>& q, const Tensor<S>& k, int B, int H, int Tq, int Tk) {
  const Eigen::Index dh = q.dim(1) / H;
  const S scale = S(1) / std::sqrt(S(dh));
  Tensor<S> s({B * H * Tq, Tk});
  for (int b = 0; b < B; ++b) {
    Eigen::Map<const MatRM<S>> qb(q.data() + Eigen::Index(b) * Tq * q.dim(1), Tq, q.dim(1));
    Eigen::Map<const MatRM<S>> kb(k.data() + Eigen::Index(b) * Tk * k.dim(1), Tk, k.dim(1));
    for (int h = 0; h < H; ++h) {
      Eigen::Map<MatRM<S>> sb(s.data() + (Eigen::Index(b) * H + h) * Tq * Tk, Tq, Tk);
      sb.noalias() = qb.middleCols(h * dh, dh) * kb.middleCols(h * dh, dh).transpose();
      sb *= scale;
    }
  }
  return s;
}

template <typename S>
void attn_scores_back(const Tensor<S>& q, const Tensor<S>& k, int B, int H, int Tq, int Tk,
                      const Tensor<S>& gy, Tensor<S>* gq, Tensor<S>* gk) {
  const Eigen::Index dh = q.dim(1) / H;
  const S scale = S(1) / std::sqrt(S(dh));
  if (gq) *gq = Tensor<S>(q.shape());
  if (gk) *gk = Tensor<S>(k.shape());
  for (int b = 0; b < B; ++b) {
    Eigen::Map<const MatRM<S>> qb(q.data() + Eigen::Index(b) * Tq * q.dim(1), Tq, q.dim(1));
    Eigen::Map<const MatRM<S>> kb(k.data() + Eigen::Index(b) * Tk * k.dim(1), Tk, k.dim(1));
    for (int h = 0; h < H; ++h) {
      Eigen::Map<const MatRM<S>> gs(gy.data() + (Eigen::Index(b) * H + h) * Tq * Tk, Tq, Tk);
      if (gq) {
        Eigen::Map<MatRM<S>> gqb(gq->data() + Eigen::Index(b) * Tq * q.dim(1), Tq, q.dim(1));
        gqb.middleCols(h * dh, dh).noalias() += scale * (gs * kb.middleCols(h * dh, dh));
      }
      if (gk) {
        Eigen::Map<MatRM<S>> gkb(gk->data() + Eigen::Index(b) * Tk * k.dim(1), Tk, k.dim(1));
        gkb.middleCols(h * dh, dh).noalias() += scale * (gs.transpose() * qb.middleCols(h * dh, dh));
      }
    }
  }
}

template <typename S>
Tensor<S> attn_softmax(const Tensor<S>& s, int B, int H, int Tq, int Tk, bool causal) {
  TEC_CHECK(!causal || Tq == Tk, "causal mask needs square attention");
  Tensor<S> p(s.shape());
  const Eigen::Index rows = Eigen::Index(B) * H * Tq;
  for (Eigen::Index rI = 0; rI < rows; ++rI) {
    const int qi = int(rI % Tq);
    const int n = causal ? qi + 1 : Tk;  // keys the query may attend to
    Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>> in(s.data() + rI * Tk, Tk);
    Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>> out(p.data() + rI * Tk, Tk);
    const S m = in.head(n).maxCoeff();
    out.head(n) = (in.head(n) - m).exp();
    const S z = out.head(n).sum();
    out.head(n) /= z;
    if (n < Tk) out.tail(Tk - n).setZero();
  }
  return p;
}

template <typename S>
Tensor<S> attn_softmax_back(const Tensor<S>& p, const Tensor<S>& gy, int B, int H, int Tq, int Tk,
                            bool causal) {
  Tensor<S> gs(p.shape());
  const Eigen::Index rows = Eigen::Index(B) * H * Tq;
  for (Eigen::Index rI = 0; rI < rows; ++rI) {
    const int qi = int(rI % Tq);
    const int n = causal ? qi + 1 : Tk;
    Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>> pr(p.data() + rI * Tk, Tk);
    Eigen::Map<const Eigen::Array<S, Eigen::Dynamic, 1>> g(gy.data() + rI * Tk, Tk);
    Eigen::Map<Eigen::Array<S, Eigen::Dynamic, 1>> out(gs.data() + rI * Tk, Tk);
    const S dot = (g.head(n) * pr.head(n)).sum();
    out.head(n) = pr.head(n) * (g.head(n) - dot);
    if (n < Tk) out.tail(Tk - n).setZero();
  }
  return gs;
}

template <typename S>
Tensor<S> attn_mix(const Tensor<S>& p, const Tensor<S>& v, int B, int H, int Tq, int Tk) {
  const Eigen::Index dh = v.dim(1) / H;
  Tensor<S> y({B * Tq, H * int(dh)});
  for (int b = 0; b < B; ++b) {
    Eigen::Map<const MatRM<S>> vb(v.data() + Eigen::Index(b) * Tk * v.dim(1), Tk, v.dim(1));
    Eigen::Map<MatRM<S>> yb(y.data() + Eigen::Index(b) * Tq * y.dim(1), Tq, y.dim(1));
    for (int h = 0; h < H; ++h) {
      Eigen::Map<const MatRM<S>> pb(p.data() + (Eigen::Index(b) * H + h) * Tq * Tk, Tq, Tk);
      yb.middleCols(h * dh, dh).noalias() = pb * vb.middleCols(h * dh, dh);
    }
  }
  return y;
}

template <typename S>
void attn_mix_back(const Tensor<S>& p, const Tensor<S>& v, int B, int H, int Tq, int Tk,
                   const Tensor<S>& gy, Tensor<S>* gp, Tensor<S>* gv) {
  const Eigen::Index dh = v.dim(1) / H;
  if (gp) *gp = Tensor<S>(p.shape());
  if (gv) *gv = Tensor<S>(v.shape());
  for (int b = 0; b < B; ++b) {
    Eigen::Map<const MatRM<S>> vb(v.data() + Eigen::Index(b) * Tk * v.dim(1), Tk, v.dim(1));
    Eigen::Map<const MatRM<S>> gyb(gy.data() + Eigen::Index(b) * Tq * gy.dim(1), Tq, gy.dim(1));
    for (int h = 0; h < H; ++h) {
      Eigen::Map<const MatRM<S>> pb(p.data() + (Eigen::Index(b) * H + h) * Tq * Tk, Tq, Tk);
      if (gp) {
        Eigen::Map<MatRM<S>> gpb(gp->data() + (Eigen::Index(b) * H + h) * Tq * Tk, Tq, Tk);
        gpb.noalias() = gyb.middleCols(h * dh, dh) * vb.middleCols(h * dh, dh).transpose();
      }
      if (gv) {
        Eigen::Map<MatRM<S>> gvb(gv->data() + Eigen::Index(b) * Tk * v.dim(1), Tk, v.dim(1));
        gvb.middleCols(h * dh, dh).noalias() += pb.transpose() * gyb.middleCols(h * dh, dh);
      }
    }
  }
  return;
}

// ---- pointwise -------------------------------------------------------------

template <typename S>
Tensor<S> gelu(const Tensor<S>& x) {
  Tensor<S> y(x.shape());
  const S* in = x.data();
  S* out = y.data();
  const S c = S(0.7071067811865475244);  // 1/sqrt(2)
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out[i] = S(0.5) * in[i] * (S(1) + std::erf(in[i] * c));
  }
  return y;
}

template <typename S>
Tensor<S> gelu_back(const Tensor<S>& x, const Tensor<S>& gy) {
  Tensor<S> gx(x.shape());
  const S c = S(0.7071067811865475244);
  const S q = S(0.3989422804014326779);  // 1/sqrt(2*pi)
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const S v = x[i];
    const S cdf = S(0.5) * (S(1) + std::erf(v * c));
    const S pdf = q * std::exp(S(-0.5) * v * v);
    gx[i] = gy[i] * (cdf + v * pdf);
  }
  return gx;
}

#define TEC_INSTANTIATE(S)                                                                        \
  template Tensor<S> pad2d<S>(const Tensor<S>&, int, PadMode);                                    \
  template Tensor<S> pad2d_back<S>(const Tensor<S>&, int, PadMode, const std::vector<int>&);      \
  template Tensor<S> conv2d<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, int);        \
  template void conv2d_back<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, int,         \
                               Tensor<S>*, Tensor<S>*, Tensor<S>*);                               \
  template Tensor<S> tconv2d<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, int, int,   \
                                int);                                                             \
  template void tconv2d_back<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, int, int,   \
                                int, Tensor<S>*, Tensor<S>*, Tensor<S>*);                         \
  template Tensor<S> linear<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&);             \
  template void linear_back<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, Tensor<S>*,  \
                               Tensor<S>*, Tensor<S>*);                                           \
  template Tensor<S> gdn<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, bool);          \
  template void gdn_back<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, bool,           \
                            const Tensor<S>&, Tensor<S>*, Tensor<S>*, Tensor<S>*);                \
  template Tensor<S> layernorm<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, S);       \
  template void layernorm_back<S>(const Tensor<S>&, const Tensor<S>&, const Tensor<S>&, S,        \
                                  const Tensor<S>&, Tensor<S>*, Tensor<S>*, Tensor<S>*);          \
  template Tensor<S> attn_scores<S>(const Tensor<S>&, const Tensor<S>&, int, int, int, int);      \
  template void attn_scores_back<S>(const Tensor<S>&, const Tensor<S>&, int, int, int, int,       \
                                    const Tensor<S>&, Tensor<S>*, Tensor<S>*);                    \
  template Tensor<S> attn_softmax<S>(const Tensor<S>&, int, int, int, int, bool);                 \
  template Tensor<S> attn_softmax_back<S>(const Tensor<S>&, const Tensor<S>&, int, int, int, int, \
                                          bool);                                                  \
  template Tensor<S> attn_mix<S>(const Tensor<S>&, const Tensor<S>&, int, int, int, int);         \
  template void attn_mix_back<S>(const Tensor<S>&, const Tensor<S>&, int, int, int, int,          \
                                 const Tensor<S>&, Tensor<S>*, Tensor<S>*);                       \
  template Tensor<S> gelu<S>(const Tensor<S>&);                                                   \
  template Tensor<S> gelu_back<S>(const Tensor<S>&, const Tensor<S>&);

TEC_INSTANTIATE(float)
TEC_INSTANTIATE(double)
#undef TEC_INSTANTIATE

}  // namespace tec::kern
