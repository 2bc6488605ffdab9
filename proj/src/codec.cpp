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

#include "tec/codec.hpp"

#include <cmath>

#include "tec/range_coder.hpp"

namespace tec {

namespace {

using Ctx = EvalCtx<float>;

std::vector<CdfTable> fd_tables(const FactorizedDensity& fd, const ParamStore<float>& ps) {
  std::vector<CdfTable> tabs;
  tabs.reserve(size_t(fd.channels));
  for (int c = 0; c < fd.channels; ++c) tabs.push_back(fd.build_cdf(ps, c));
  return tabs;
}

double table_bits(const CdfTable& tab, int sym) {
  return -std::log2(double(tab.freq(sym)) / double(rc::kTotal));
}

// Coded latent channels iterate in (channel, row, col) order; the
// checkerboard families split each group into the (h+w) even set first.
template <typename Fn>
void for_each_cell(int C, int h, int w, int parity, Fn&& fn) {
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        if (parity < 0 || (i + j) % 2 == parity) fn(c, i, j);
}

int latent_int(const Tensor<float>& t, int c, int i, int j) {
  const float v = t.at(0, c, i, j);
  TEC_CHECK(v == std::floor(v), "latent to encode is not integral");
  return int(v);
}

struct ElicPriors {
  Tensor<float> mu;
  Tensor<float> sigma;
};

// One parity pass of the grouped context model at inference values.
ElicPriors elic_pass(const Model& m, int g, const Tensor<float>& hyp,
                     const std::vector<Tensor<float>>& prevs, const Tensor<float>& spatial,
                     bool have_spatial, int size, int hl, int wl) {
  Ctx c{&m.ps};
  auto pr = elic::group_pass(c, g, hyp, prevs, spatial, have_spatial, size, hl, wl);
  return {pr.first, latent_sigma(m, pr.second)};
}

void check_family(const Model& m, Family f) {
  if (m.cfg.family != f) fail_usage("operation requires a different codec family");
}

}  // namespace

Tensor<float> quantize_latent(const Tensor<float>& y) {
  Tensor<float> v(y.shape());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    double r = std::round(double(y[i]));
    r = std::min(double(ent::kAlphabetMax), std::max(double(ent::kAlphabetMin), r));
    v[i] = float(r);
  }
  return v;
}

Tensor<float> analysis_frame(const Model& m, const Tensor<float>& x) {
  Ctx c{&m.ps};
  return transforms::analysis(c, x, m.cfg);
}

Tensor<float> synthesis_frame(const Model& m, const Tensor<float>& yhat) {
  Ctx c{&m.ps};
  return transforms::synthesis(c, yhat, m.cfg);
}

Tensor<float> latent_sigma(const Model& m, const Tensor<float>& sraw) {
  (void)m;
  Ctx c{nullptr};
  return c.add_scalar(c.softplus(sraw), ent::kSigmaMin);
}

Tensor<float> past_windows(const Tensor<float>& yhat) {
  const int M = yhat.dim(1), hl = yhat.dim(2), wl = yhat.dim(3);
  const int B = tokens::block_count(hl, wl);
  Ctx c{nullptr};
  return c.gather(yhat, {B * tokens::kPastTokens, M}, tokens::past_map(M, hl, wl));
}

Tensor<float> temporal_context(const Model& m, const Tensor<float>* past0,
                               const Tensor<float>* past1, int n_ctx, int B) {
  Ctx c{&m.ps};
  if (n_ctx == 0) return temporal::tt_dummy_context(c, B);
  TEC_CHECK(past1 != nullptr, "temporal context requires the previous frame");
  const Tensor<float> w1 = past_windows(*past1);
  if (n_ctx == 1) return temporal::tt_context(c, m.tt, w1, w1, B);
  TEC_CHECK(n_ctx == 2 && past0 != nullptr, "two-frame context requires both past frames");
  return temporal::tt_context(c, m.tt, past_windows(*past0), w1, B);
}

// ---- factorized prior ----------------------------------------------------

std::vector<uint8_t> fp_encode_latent(const Model& m, const Tensor<float>& yhat,
                                      double* est_bits) {
  check_family(m, Family::kFactorized);
  const int M = yhat.dim(1), hl = yhat.dim(2), wl = yhat.dim(3);
  TEC_CHECK(M == m.cfg.M, "latent channel count differs from model");
  const std::vector<CdfTable> tabs = fd_tables(m.yd, m.ps);
  RangeEncoder enc;
  double est = 0;
  for_each_cell(M, hl, wl, -1, [&](int c, int i, int j) {
    const int sym = value_to_symbol(latent_int(yhat, c, i, j));
    enc.encode_symbol(tabs[size_t(c)], sym);
    est += table_bits(tabs[size_t(c)], sym);
  });
  if (est_bits) *est_bits = est;
  return enc.finish();
}

Tensor<float> fp_decode_latent(const Model& m, int hl, int wl,
                               const std::vector<uint8_t>& payload) {
  check_family(m, Family::kFactorized);
  const int M = m.cfg.M;
  const std::vector<CdfTable> tabs = fd_tables(m.yd, m.ps);
  RangeDecoder dec(payload.data(), payload.size());
  Tensor<float> yhat({1, M, hl, wl});
  for_each_cell(M, hl, wl, -1, [&](int c, int i, int j) {
    const int sym = dec.decode_symbol(tabs[size_t(c)]);
    yhat.at(0, c, i, j) = float(symbol_to_value(sym));
  });
  return yhat;
}

// ---- hyperprior with grouped context ---------------------------------------

std::vector<uint8_t> elic_encode_latent(const Model& m, const Tensor<float>& yhat,
                                        const Tensor<float>& zhat, double* est_bits) {
  check_family(m, Family::kElic);
  const int M = yhat.dim(1), hl = yhat.dim(2), wl = yhat.dim(3);
  const int Nh = zhat.dim(1), hz = zhat.dim(2), wz = zhat.dim(3);
  TEC_CHECK(M == m.cfg.M && Nh == m.cfg.n_hyper(), "latent channels differ from model");
  TEC_CHECK(hz * 4 == hl && wz * 4 == wl, "hyper latent grid must be 1/4 of the latent grid");

  RangeEncoder enc;
  double est = 0;
  const std::vector<CdfTable> ztabs = fd_tables(m.zd, m.ps);
  for_each_cell(Nh, hz, wz, -1, [&](int c, int i, int j) {
    const int sym = value_to_symbol(latent_int(zhat, c, i, j));
    enc.encode_symbol(ztabs[size_t(c)], sym);
    est += table_bits(ztabs[size_t(c)], sym);
  });

  Ctx c{&m.ps};
  const Tensor<float> hyp = transforms::hyper_synthesis(c, zhat, m.cfg);
  GaussianCoder coder;
  std::vector<Tensor<float>> prevs;
  for (int g = 0; g < m.groups.count(); ++g) {
    const int size = m.groups.sizes[size_t(g)];
    const int off = m.groups.offset(g);
    Tensor<float> yg = c.gather(yhat, {1, size, hl, wl},
                                tokens::channel_slice_map(M, hl, wl, off, off + size));
    const Tensor<float> dummy;
    const ElicPriors pa = elic_pass(m, g, hyp, prevs, dummy, false, size, hl, wl);
    for_each_cell(size, hl, wl, 0, [&](int cc, int i, int j) {
      const int v = latent_int(yg, cc, i, j);
      est += coder.estimate_bits(v, pa.mu.at(0, cc, i, j), pa.sigma.at(0, cc, i, j));
      coder.encode(enc, v, pa.mu.at(0, cc, i, j), pa.sigma.at(0, cc, i, j));
    });
    const Tensor<float> masked = c.mul_mask(yg, elic::parity_mask<float>(size, hl, wl, 0));
    const ElicPriors pn = elic_pass(m, g, hyp, prevs, masked, true, size, hl, wl);
    for_each_cell(size, hl, wl, 1, [&](int cc, int i, int j) {
      const int v = latent_int(yg, cc, i, j);
      est += coder.estimate_bits(v, pn.mu.at(0, cc, i, j), pn.sigma.at(0, cc, i, j));
      coder.encode(enc, v, pn.mu.at(0, cc, i, j), pn.sigma.at(0, cc, i, j));
    });
    prevs.push_back(std::move(yg));
  }
  if (est_bits) *est_bits = est;
  return enc.finish();
}

void elic_decode_latent(const Model& m, int hl, int wl, const std::vector<uint8_t>& payload,
                        Tensor<float>* yhat, Tensor<float>* zhat) {
  check_family(m, Family::kElic);
  TEC_CHECK(hl % 4 == 0 && wl % 4 == 0, "latent grid must be divisible by 4");
  const int M = m.cfg.M, Nh = m.cfg.n_hyper(), hz = hl / 4, wz = wl / 4;

  RangeDecoder dec(payload.data(), payload.size());
  const std::vector<CdfTable> ztabs = fd_tables(m.zd, m.ps);
  Tensor<float> z({1, Nh, hz, wz});
  for_each_cell(Nh, hz, wz, -1, [&](int c, int i, int j) {
    z.at(0, c, i, j) = float(symbol_to_value(dec.decode_symbol(ztabs[size_t(c)])));
  });

  Ctx c{&m.ps};
  const Tensor<float> hyp = transforms::hyper_synthesis(c, z, m.cfg);
  GaussianCoder coder;
  std::vector<Tensor<float>> prevs;
  Tensor<float> y({1, M, hl, wl});
  for (int g = 0; g < m.groups.count(); ++g) {
    const int size = m.groups.sizes[size_t(g)];
    const int off = m.groups.offset(g);
    Tensor<float> yg({1, size, hl, wl});
    const Tensor<float> dummy;
    const ElicPriors pa = elic_pass(m, g, hyp, prevs, dummy, false, size, hl, wl);
    for_each_cell(size, hl, wl, 0, [&](int cc, int i, int j) {
      yg.at(0, cc, i, j) = float(coder.decode(dec, pa.mu.at(0, cc, i, j), pa.sigma.at(0, cc, i, j)));
    });
    const Tensor<float> masked = c.mul_mask(yg, elic::parity_mask<float>(size, hl, wl, 0));
    const ElicPriors pn = elic_pass(m, g, hyp, prevs, masked, true, size, hl, wl);
    for_each_cell(size, hl, wl, 1, [&](int cc, int i, int j) {
      yg.at(0, cc, i, j) = float(coder.decode(dec, pn.mu.at(0, cc, i, j), pn.sigma.at(0, cc, i, j)));
    });
    for_each_cell(size, hl, wl, -1,
                  [&](int cc, int i, int j) { y.at(0, off + cc, i, j) = yg.at(0, cc, i, j); });
    prevs.push_back(std::move(yg));
  }
  *yhat = std::move(y);
  *zhat = std::move(z);
}

// ---- temporal transformer --------------------------------------------------

namespace {

struct TokenPriors {
  Tensor<float> mu;
  Tensor<float> sigma;
};

TokenPriors token_priors(const Model& m, const Tensor<float>& ytok, const Tensor<float>& ctx,
                         int ctx_len, int B) {
  Ctx c{&m.ps};
  auto pr = temporal::tt_priors(c, m.tt, ytok, ctx, ctx_len, B);
  return {pr.first, latent_sigma(m, pr.second)};
}

// Sequential decode shared by the temporal families: decodes token indices
// [0, upto) from the stream into ytok. Each pass recomputes the priors with
// zeros standing in for rows not yet decoded; the causal mask keeps those
// rows out of every decoded row's receptive field.
void decode_tokens(const Model& m, RangeDecoder& dec, GaussianCoder& coder, Tensor<float>& ytok,
                   const Tensor<float>& ctx, int ctx_len, int B, int upto) {
  const int T = tokens::kTokensPerBlock, M = m.cfg.M;
  for (int t = 0; t < upto; ++t) {
    const TokenPriors pr = token_priors(m, ytok, ctx, ctx_len, B);
    for (int b = 0; b < B; ++b) {
      const int row = b * T + t;
      for (int ch = 0; ch < M; ++ch)
        ytok.at(row, ch) = float(coder.decode(dec, pr.mu.at(row, ch), pr.sigma.at(row, ch)));
    }
  }
}

// Autoregressive mean fill of token indices [from, 16): row values become
// the prior mean given everything before them. Encoder and decoder run the
// identical rollout, so the filled rows agree bit for bit.
void mean_fill_tokens(const Model& m, Tensor<float>& ytok, const Tensor<float>& ctx, int ctx_len,
                      int B, int from) {
  const int T = tokens::kTokensPerBlock, M = m.cfg.M;
  for (int t = from; t < T; ++t) {
    const TokenPriors pr = token_priors(m, ytok, ctx, ctx_len, B);
    for (int b = 0; b < B; ++b) {
      const int row = b * T + t;
      for (int ch = 0; ch < M; ++ch) ytok.at(row, ch) = pr.mu.at(row, ch);
    }
  }
}

void mask_fill_tokens(const Model& m, Tensor<float>& ytok, int B, int from) {
  const int T = tokens::kTokensPerBlock, M = m.cfg.M;
  const Tensor<float>& mask = m.ps.value("flex.mask");
  for (int b = 0; b < B; ++b)
    for (int t = from; t < T; ++t)
      for (int ch = 0; ch < M; ++ch) ytok.at(b * T + t, ch) = mask[ch];
}

Tensor<float> unpack_tokens(const Tensor<float>& ytok, int M, int hl, int wl, bool repacked) {
  Ctx c{nullptr};
  return c.gather(ytok, {1, M, hl, wl},
                  repacked ? tokens::repack_inverse_map(M, hl, wl)
                           : tokens::current_inverse_map(M, hl, wl));
}

}  // namespace

std::vector<uint8_t> tt_encode_latent(const Model& m, const Tensor<float>& yhat,
                                      const Tensor<float>* past0, const Tensor<float>* past1,
                                      int n_ctx, double* est_bits) {
  TEC_CHECK(m.cfg.temporal(), "temporal coding requires a temporal family");
  const int M = yhat.dim(1), hl = yhat.dim(2), wl = yhat.dim(3);
  TEC_CHECK(M == m.cfg.M, "latent channel count differs from model");
  const int B = tokens::block_count(hl, wl);
  const Tensor<float> ctx = temporal_context(m, past0, past1, n_ctx, B);
  const int ctx_len = m.tt.ctx_len(n_ctx);
  Ctx c{&m.ps};
  const Tensor<float> ytok =
      c.gather(yhat, {B * tokens::kTokensPerBlock, M}, tokens::current_map(M, hl, wl));
  const TokenPriors pr = token_priors(m, ytok, ctx, ctx_len, B);

  GaussianCoder coder;
  RangeEncoder enc;
  double est = 0;
  const int T = tokens::kTokensPerBlock;
  for (int t = 0; t < T; ++t)
    for (int b = 0; b < B; ++b) {
      const int row = b * T + t;
      for (int ch = 0; ch < M; ++ch) {
        const float v = ytok.at(row, ch);
        TEC_CHECK(v == std::floor(v), "latent to encode is not integral");
        est += coder.estimate_bits(int(v), pr.mu.at(row, ch), pr.sigma.at(row, ch));
        coder.encode(enc, int(v), pr.mu.at(row, ch), pr.sigma.at(row, ch));
      }
    }
  if (est_bits) *est_bits = est;
  return enc.finish();
}

Tensor<float> tt_decode_latent(const Model& m, int hl, int wl, const Tensor<float>* past0,
                               const Tensor<float>* past1, int n_ctx,
                               const std::vector<uint8_t>& payload) {
  TEC_CHECK(m.cfg.temporal(), "temporal coding requires a temporal family");
  const int M = m.cfg.M;
  const int B = tokens::block_count(hl, wl);
  const Tensor<float> ctx = temporal_context(m, past0, past1, n_ctx, B);
  Tensor<float> ytok({B * tokens::kTokensPerBlock, M});
  RangeDecoder dec(payload.data(), payload.size());
  GaussianCoder coder;
  decode_tokens(m, dec, coder, ytok, ctx, m.tt.ctx_len(n_ctx), B, tokens::kTokensPerBlock);
  return unpack_tokens(ytok, M, hl, wl, false);
}

std::vector<uint8_t> flex_encode_latent(const Model& m, const Tensor<float>& yhat,
                                        const Tensor<float>* past0, const Tensor<float>* past1,
                                        int n_ctx, int K, bool mask_fill, Tensor<float>* filled,
                                        double* est_bits) {
  check_family(m, Family::kFlex);
  const int M = yhat.dim(1), hl = yhat.dim(2), wl = yhat.dim(3);
  TEC_CHECK(M == m.cfg.M, "latent channel count differs from model");
  TEC_CHECK(K >= 1 && K <= tokens::kTokensPerBlock, "token budget out of range");
  const int B = tokens::block_count(hl, wl);
  const int T = tokens::kTokensPerBlock;
  const Tensor<float> ctx = temporal_context(m, past0, past1, n_ctx, B);
  const int ctx_len = m.tt.ctx_len(n_ctx);
  Ctx c{&m.ps};
  const Tensor<float> yrep = c.gather(yhat, {B * T, M}, tokens::repack_map(M, hl, wl));

  // Kept-token priors can come from the fully real sequence: the causal
  // mask keeps rows >= K out of every kept row's receptive field.
  const TokenPriors pr = token_priors(m, yrep, ctx, ctx_len, B);
  GaussianCoder coder;
  RangeEncoder enc;
  double est = 0;
  for (int t = 0; t < K; ++t)
    for (int b = 0; b < B; ++b) {
      const int row = b * T + t;
      for (int ch = 0; ch < M; ++ch) {
        const float v = yrep.at(row, ch);
        TEC_CHECK(v == std::floor(v), "latent to encode is not integral");
        est += coder.estimate_bits(int(v), pr.mu.at(row, ch), pr.sigma.at(row, ch));
        coder.encode(enc, int(v), pr.mu.at(row, ch), pr.sigma.at(row, ch));
      }
    }

  // Replay the decoder's fill so the next frame's context matches it.
  Tensor<float> dtok({B * T, M});
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < K; ++t) {
      const int row = b * T + t;
      for (int ch = 0; ch < M; ++ch) dtok.at(row, ch) = yrep.at(row, ch);
    }
  if (mask_fill) {
    mask_fill_tokens(m, dtok, B, K);
  } else {
    mean_fill_tokens(m, dtok, ctx, ctx_len, B, K);
  }
  if (filled) *filled = unpack_tokens(dtok, M, hl, wl, true);
  if (est_bits) *est_bits = est;
  return enc.finish();
}

Tensor<float> flex_decode_latent(const Model& m, int hl, int wl, const Tensor<float>* past0,
                                 const Tensor<float>* past1, int n_ctx, int K, bool mask_fill,
                                 const std::vector<uint8_t>& payload) {
  check_family(m, Family::kFlex);
  TEC_CHECK(K >= 1 && K <= tokens::kTokensPerBlock, "token budget out of range");
  const int M = m.cfg.M;
  const int B = tokens::block_count(hl, wl);
  const Tensor<float> ctx = temporal_context(m, past0, past1, n_ctx, B);
  const int ctx_len = m.tt.ctx_len(n_ctx);
  Tensor<float> ytok({B * tokens::kTokensPerBlock, M});
  RangeDecoder dec(payload.data(), payload.size());
  GaussianCoder coder;
  decode_tokens(m, dec, coder, ytok, ctx, ctx_len, B, K);
  if (mask_fill) {
    mask_fill_tokens(m, ytok, B, K);
  } else {
    mean_fill_tokens(m, ytok, ctx, ctx_len, B, K);
  }
  return unpack_tokens(ytok, M, hl, wl, true);
}

// ---- whole-cube entry points -----------------------------------------------

namespace {

void check_cube_dims(const Model& m, int C, int H, int W) {
  if (C != m.cfg.in_channels) fail_data("cube band count differs from model");
  const int f = transforms::kDownFactor;
  if (H % f != 0 || W % f != 0) fail_data("frame size must be a multiple of 16");
  if (m.cfg.family != Family::kFactorized) {
    if ((H / f) % tokens::kBlockSide != 0 || (W / f) % tokens::kBlockSide != 0)
      fail_data("frame size must be a multiple of 64 for this family");
  }
}

int context_frames(int t, int cap) { return std::min(t, std::min(cap, 2)); }

}  // namespace

TecbFile encode_cube(const Model& m, const ImageCube& cube, const EncodeOptions& opt,
                     EncodeStats* stats) {
  cube.validate();
  TEC_CHECK(m.has_stats(), "model carries no band statistics; train or load a checkpoint first");
  check_cube_dims(m, cube.C, cube.H, cube.W);
  TEC_CHECK(opt.context_cap >= 0 && opt.context_cap <= 2, "context cap out of range");

  TecbFile out;
  TecbHeader& h = out.header;
  h.family = m.cfg.family;
  h.context = m.cfg.temporal() ? uint8_t(opt.context_cap) : 0;
  h.mask_fill = m.cfg.family == Family::kFlex && opt.mask_fill;
  h.budget = m.cfg.family == Family::kFlex ? uint8_t(opt.budget) : uint8_t(255);
  h.H = uint16_t(cube.H);
  h.W = uint16_t(cube.W);
  h.C = uint8_t(cube.C);
  h.T = uint8_t(cube.T);
  h.d_lat = uint16_t(m.cfg.M);
  h.lambda_preset = opt.lambda_preset;

  if (stats) {
    stats->frame_est_bits.clear();
    stats->frame_bytes.clear();
  }
  std::vector<Tensor<float>> past;  // decoder-side latents, newest last
  for (int t = 0; t < cube.T; ++t) {
    const Tensor<float> x = standardize_frame(cube, t, m.stats);
    const Tensor<float> y = analysis_frame(m, x);
    const Tensor<float> yhat = quantize_latent(y);
    double est = 0;
    std::vector<uint8_t> payload;
    switch (m.cfg.family) {
      case Family::kFactorized:
        payload = fp_encode_latent(m, yhat, &est);
        break;
      case Family::kElic: {
        Ctx c{&m.ps};
        const Tensor<float> zhat = quantize_latent(transforms::hyper_analysis(c, y, m.cfg));
        payload = elic_encode_latent(m, yhat, zhat, &est);
        break;
      }
      case Family::kTemporal: {
        const int n = context_frames(t, opt.context_cap);
        const Tensor<float>* p1 = n >= 1 ? &past[past.size() - 1] : nullptr;
        const Tensor<float>* p0 = n >= 2 ? &past[past.size() - 2] : nullptr;
        payload = tt_encode_latent(m, yhat, p0, p1, n, &est);
        past.push_back(yhat);
        break;
      }
      case Family::kFlex: {
        const int n = context_frames(t, opt.context_cap);
        const Tensor<float>* p1 = n >= 1 ? &past[past.size() - 1] : nullptr;
        const Tensor<float>* p0 = n >= 2 ? &past[past.size() - 2] : nullptr;
        Tensor<float> filled;
        payload =
            flex_encode_latent(m, yhat, p0, p1, n, opt.budget, opt.mask_fill, &filled, &est);
        past.push_back(std::move(filled));
        break;
      }
    }
    if (stats) {
      stats->frame_est_bits.push_back(est);
      stats->frame_bytes.push_back(payload.size());
    }
    out.frames.push_back(std::move(payload));
  }
  return out;
}

ImageCube decode_cube(const Model& m, const TecbFile& file) {
  TEC_CHECK(m.has_stats(), "model carries no band statistics; train or load a checkpoint first");
  const TecbHeader& h = file.header;
  if (h.family != m.cfg.family) fail_data("stream family differs from model");
  if (h.C != m.cfg.in_channels || int(h.d_lat) != m.cfg.M)
    fail_data("stream dimensions differ from model");
  check_cube_dims(m, h.C, h.H, h.W);
  const int hl = h.H / transforms::kDownFactor, wl = h.W / transforms::kDownFactor;

  Tensor<float> recon({int(h.T), int(h.C), int(h.H), int(h.W)});
  std::vector<Tensor<float>> past;
  for (int t = 0; t < int(h.T); ++t) {
    const std::vector<uint8_t>& payload = file.frames[size_t(t)];
    Tensor<float> yhat;
    switch (m.cfg.family) {
      case Family::kFactorized:
        yhat = fp_decode_latent(m, hl, wl, payload);
        break;
      case Family::kElic: {
        Tensor<float> zhat;
        elic_decode_latent(m, hl, wl, payload, &yhat, &zhat);
        break;
      }
      case Family::kTemporal: {
        const int n = context_frames(t, h.context);
        const Tensor<float>* p1 = n >= 1 ? &past[past.size() - 1] : nullptr;
        const Tensor<float>* p0 = n >= 2 ? &past[past.size() - 2] : nullptr;
        yhat = tt_decode_latent(m, hl, wl, p0, p1, n, payload);
        past.push_back(yhat);
        break;
      }
      case Family::kFlex: {
        const int n = context_frames(t, h.context);
        const Tensor<float>* p1 = n >= 1 ? &past[past.size() - 1] : nullptr;
        const Tensor<float>* p0 = n >= 2 ? &past[past.size() - 2] : nullptr;
        TEC_CHECK(h.budget >= 1 && h.budget <= tokens::kTokensPerBlock,
                  "stream token budget out of range");
        yhat = flex_decode_latent(m, hl, wl, p0, p1, n, h.budget, h.mask_fill, payload);
        past.push_back(yhat);
        break;
      }
    }
    const Tensor<float> xr = synthesis_frame(m, yhat);
    const Eigen::Index frame = xr.size();
    for (Eigen::Index i = 0; i < frame; ++i) recon[Eigen::Index(t) * frame + i] = xr[i];
  }
  return destandardize(recon, m.stats);
}

}  // namespace tec
