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

#include "tec/inpaint.hpp"

#include <algorithm>

namespace tec {

namespace {

struct Priors {
  Tensor<float> mu;
  Tensor<float> sigma;
};

Priors rollout_priors(const Model& m, const Tensor<float>& ytok, const Tensor<float>& ctx,
                      int ctx_len, int B) {
  EvalCtx<float> c{&m.ps};
  auto pr = temporal::tt_priors(c, m.tt, ytok, ctx, ctx_len, B);
  return {pr.first, latent_sigma(m, pr.second)};
}

int best_other_frame(const CloudMaskCube& masks, int target) {
  int best = -1;
  double best_frac = 2.0;
  for (int t = 0; t < masks.T; ++t) {
    if (t == target) continue;
    const double f = masks.frame_fraction(t);
    if (f < best_frac) {
      best_frac = f;
      best = t;
    }
  }
  return best;
}

}  // namespace

std::vector<double> pool_mask(const CloudMaskCube& masks, int t, int hl, int wl) {
  const int f = 16;
  TEC_CHECK(masks.H == hl * f && masks.W == wl * f, "mask size does not cover the latent grid");
  std::vector<double> frac(size_t(hl) * size_t(wl), 0.0);
  for (int i = 0; i < hl; ++i)
    for (int j = 0; j < wl; ++j) {
      int n = 0;
      for (int y = 0; y < f; ++y)
        for (int x = 0; x < f; ++x) n += masks.at(t, i * f + y, j * f + x) != 0;
      frac[size_t(i) * size_t(wl) + size_t(j)] = double(n) / double(f * f);
    }
  return frac;
}

std::vector<int> reorder_context(const CloudMaskCube& masks, int target) {
  std::vector<std::pair<double, int>> cand;
  for (int t = 0; t < masks.T; ++t)
    if (t != target) cand.push_back({masks.frame_fraction(t), t});
  if (cand.empty()) return {};
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second < b.second;
  });
  int usable = 0;
  for (const auto& c : cand) usable += c.first < 0.5;
  if (usable < 2) return {cand[0].second, cand[0].second};
  std::vector<int> pick = {cand[0].second, cand[1].second};
  std::sort(pick.begin(), pick.end());
  return pick;
}

ImageCube inpaint_frame(const Model& m, const ImageCube& cube, const CloudMaskCube& masks,
                        int target, const InpaintOptions& opt) {
  TEC_CHECK(m.cfg.temporal(), "inpainting needs a temporal codec family");
  TEC_CHECK(m.has_stats(), "model carries no band statistics");
  cube.validate();
  TEC_CHECK(masks.T == cube.T && masks.H == cube.H && masks.W == cube.W,
            "mask cube shape differs from image cube");
  TEC_CHECK(target >= 0 && target < cube.T, "target frame out of range");
  const int hl = cube.H / transforms::kDownFactor, wl = cube.W / transforms::kDownFactor;
  const int B = tokens::block_count(hl, wl);
  const int T = tokens::kTokensPerBlock, M = m.cfg.M;
  const int wb = wl / tokens::kBlockSide;

  // Context from the least-cloudy other frames.
  const std::vector<int> ctxf = reorder_context(masks, target);
  const int n_ctx = int(ctxf.size());
  Tensor<float> p0, p1;
  if (n_ctx >= 1)
    p1 = quantize_latent(analysis_frame(m, standardize_frame(cube, ctxf.back(), m.stats)));
  if (n_ctx == 2)
    p0 = quantize_latent(analysis_frame(m, standardize_frame(cube, ctxf.front(), m.stats)));
  const Tensor<float> ctx =
      temporal_context(m, n_ctx == 2 ? &p0 : nullptr, n_ctx >= 1 ? &p1 : nullptr, n_ctx, B);
  const int ctx_len = m.tt.ctx_len(n_ctx);

  // Observed target tokens and their cloud state.
  const Tensor<float> yobs =
      quantize_latent(analysis_frame(m, standardize_frame(cube, target, m.stats)));
  EvalCtx<float> ec{&m.ps};
  const Tensor<float> ytok_obs = ec.gather(yobs, {B * T, M}, tokens::current_map(M, hl, wl));
  const std::vector<double> frac = pool_mask(masks, target, hl, wl);
  std::vector<char> known(size_t(B) * size_t(T), 0);
  for (int b = 0; b < B; ++b) {
    const int bh0 = (b / wb) * tokens::kBlockSide, bw0 = (b % wb) * tokens::kBlockSide;
    int first_cloudy = T;
    for (int t = 0; t < T; ++t) {
      const int cell = (bh0 + t / tokens::kBlockSide) * wl + (bw0 + t % tokens::kBlockSide);
      const bool cloudy = frac[size_t(cell)] > opt.tau;
      if (cloudy && first_cloudy == T) first_cloudy = t;
      bool keep = false;
      switch (opt.mode) {
        case InpaintMode::kInterleave: keep = !cloudy; break;
        case InpaintMode::kPropagate: keep = !cloudy && t < first_cloudy; break;
        case InpaintMode::kForecast: keep = false; break;
      }
      known[size_t(b) * size_t(T) + size_t(t)] = keep;
    }
  }

  Rng srng(opt.seed);
  Tensor<float> ytok({B * T, M});
  for (int t = 0; t < T; ++t) {
    const Priors pr = rollout_priors(m, ytok, ctx, ctx_len, B);
    for (int b = 0; b < B; ++b) {
      const int row = b * T + t;
      if (known[size_t(b) * size_t(T) + size_t(t)]) {
        for (int ch = 0; ch < M; ++ch) ytok.at(row, ch) = ytok_obs.at(row, ch);
      } else {
        for (int ch = 0; ch < M; ++ch) {
          const double mu = pr.mu.at(row, ch), sg = pr.sigma.at(row, ch);
          ytok.at(row, ch) =
              opt.sample ? float(sample_gaussian_symbol(mu, sg, srng)) : float(mu);
        }
      }
    }
  }

  const Tensor<float> yfill =
      ec.gather(ytok, {1, M, hl, wl}, tokens::current_inverse_map(M, hl, wl));
  return destandardize(synthesis_frame(m, yfill), m.stats);
}

ImageCube copy_least_cloudy(const ImageCube& cube, const CloudMaskCube& masks, int target) {
  cube.validate();
  TEC_CHECK(masks.T == cube.T && masks.H == cube.H && masks.W == cube.W,
            "mask cube shape differs from image cube");
  const int src = best_other_frame(masks, target);
  TEC_CHECK(src >= 0, "no other frame to copy from");
  ImageCube out(1, cube.C, cube.H, cube.W);
  for (int c = 0; c < cube.C; ++c)
    for (int h = 0; h < cube.H; ++h)
      for (int w = 0; w < cube.W; ++w)
        out.at(0, c, h, w) =
            masks.at(target, h, w) ? cube.at(src, c, h, w) : cube.at(target, c, h, w);
  return out;
}

}  // namespace tec
