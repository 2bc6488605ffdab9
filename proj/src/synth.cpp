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

#include "tec/synth.hpp"

#include <algorithm>
#include <cmath>

#include "tec/common.hpp"

namespace tec {

namespace {

// Value-noise field: coarse uniform grid, bilinear upsampling. Pure
// arithmetic so identical on every platform.
struct Field {
  int H, W, cell;
  std::vector<double> grid;  // (H/cell+2) x (W/cell+2)
  int gw;

  Field(Rng& rng, int H_, int W_, int cell_, double lo, double hi) : H(H_), W(W_), cell(cell_) {
    const int gh = H / cell + 3;
    gw = W / cell + 3;
    grid.resize(size_t(gh) * size_t(gw));
    for (double& g : grid) g = rng.uniform(lo, hi);
  }

  double at(double h, double w) const {
    const double gh = h / cell, gwv = w / cell;
    const int i = int(gh), j = int(gwv);
    const double fh = gh - i, fw = gwv - j;
    const double a = grid[size_t(i) * size_t(gw) + size_t(j)];
    const double b = grid[size_t(i) * size_t(gw) + size_t(j + 1)];
    const double c = grid[size_t(i + 1) * size_t(gw) + size_t(j)];
    const double d = grid[size_t(i + 1) * size_t(gw) + size_t(j + 1)];
    return (a * (1 - fw) + b * fw) * (1 - fh) + (c * (1 - fw) + d * fw) * fh;
  }
};

struct Blob {
  double ch, cw, rh, rw;
  // Quartic falloff, 1 at center, 0 at the ellipse boundary.
  double opacity(int h, int w) const {
    const double dh = (h - ch) / rh, dw = (w - cw) / rw;
    const double d2 = dh * dh + dw * dw;
    if (d2 >= 1.0) return 0.0;
    const double f = (1.0 - d2) * (1.0 - d2);
    return std::min(1.0, 1.6 * f);
  }
};

}  // namespace

double CloudMaskCube::frame_fraction(int t) const {
  const size_t plane = size_t(H) * size_t(W);
  size_t n = 0;
  for (size_t i = 0; i < plane; ++i) n += v[size_t(t) * plane + i];
  return double(n) / double(plane);
}

SynthResult synth_sequence(const SynthConfig& cfg) {
  TEC_CHECK(cfg.T >= 1 && cfg.C >= 1 && cfg.H >= 8 && cfg.W >= 8, "synth: degenerate geometry");
  Rng rng(cfg.seed);
  const int pad = 8;  // translation head-room

  // Shared terrain octaves on a padded canvas.
  Field coarse(rng, cfg.H + 2 * pad, cfg.W + 2 * pad, std::max(8, cfg.H / 8), 0.2, 0.8);
  Field fine(rng, cfg.H + 2 * pad, cfg.W + 2 * pad, std::max(4, cfg.H / 16), -0.08, 0.08);

  // Band palette: shared terrain with per-band gain/offset plus a slow
  // band-specific octave, so bands correlate but are not copies.
  std::vector<double> gain(size_t(cfg.C)), offset(size_t(cfg.C));
  std::vector<Field> tint;
  tint.reserve(size_t(cfg.C));
  for (int c = 0; c < cfg.C; ++c) {
    gain[size_t(c)] = rng.uniform(0.5, 1.0);
    offset[size_t(c)] = rng.uniform(0.05, 0.3);
    tint.emplace_back(rng, cfg.H + 2 * pad, cfg.W + 2 * pad, std::max(8, cfg.H / 4), -0.05, 0.05);
  }

  // Per-frame drift and drifting viewpoint (small random walk).
  std::vector<double> scale(size_t(cfg.T));
  std::vector<int> sh(size_t(cfg.T)), sw(size_t(cfg.T));
  double s = 1.0;
  int h0 = pad, w0 = pad;
  for (int t = 0; t < cfg.T; ++t) {
    if (t > 0) {
      s *= 1.0 + rng.uniform(-cfg.drift, cfg.drift);
      h0 += int(rng.uniform_int(3)) - 1;
      w0 += int(rng.uniform_int(3)) - 1;
      h0 = std::clamp(h0, 0, 2 * pad - 1);
      w0 = std::clamp(w0, 0, 2 * pad - 1);
    }
    scale[size_t(t)] = s;
    sh[size_t(t)] = h0;
    sw[size_t(t)] = w0;
  }

  SynthResult out;
  out.clean = ImageCube(cfg.T, cfg.C, cfg.H, cfg.W);
  out.masks.T = cfg.T;
  out.masks.H = cfg.H;
  out.masks.W = cfg.W;
  out.masks.v.assign(size_t(cfg.T) * size_t(cfg.H) * size_t(cfg.W), 0);

  for (int t = 0; t < cfg.T; ++t) {
    for (int c = 0; c < cfg.C; ++c) {
      for (int h = 0; h < cfg.H; ++h) {
        for (int w = 0; w < cfg.W; ++w) {
          const double hh = h + sh[size_t(t)], ww = w + sw[size_t(t)];
          double val = coarse.at(hh, ww) * gain[size_t(c)] + offset[size_t(c)] + fine.at(hh, ww) +
                       tint[size_t(c)].at(hh, ww);
          val = val * scale[size_t(t)] + rng.uniform(-0.004, 0.004);
          val = std::clamp(val, 0.0, 1.5);
          out.clean.at(t, c, h, w) = uint16_t(std::lround(val * 10000.0));
        }
      }
    }
  }

  // Clouds: bright blobs with offset darker shadows, applied on top of the
  // clean frames. Coverage is re-rolled until it lands in the target band.
  out.cube = out.clean;
  for (int t = 0; t < cfg.T; ++t) {
    if (rng.uniform() >= cfg.cloud_prob) continue;
    std::vector<Blob> clouds;
    for (int attempt = 0; attempt < 64; ++attempt) {
      clouds.clear();
      const int n = 2 + int(rng.uniform_int(4));
      for (int i = 0; i < n; ++i) {
        Blob b;
        b.ch = rng.uniform(0, cfg.H);
        b.cw = rng.uniform(0, cfg.W);
        b.rh = rng.uniform(cfg.H / 8.0, cfg.H / 2.2);
        b.rw = rng.uniform(cfg.W / 8.0, cfg.W / 2.2);
        clouds.push_back(b);
      }
      size_t covered = 0;
      for (int h = 0; h < cfg.H; ++h)
        for (int w = 0; w < cfg.W; ++w) {
          double a = 0;
          for (const Blob& b : clouds) a = std::max(a, b.opacity(h, w));
          if (a > 0.3) ++covered;
        }
      const double frac = double(covered) / double(cfg.H * cfg.W);
      if (frac >= cfg.cloud_min_frac && frac <= cfg.cloud_max_frac) break;
    }
    const double cloud_level = rng.uniform(0.85, 1.05);
    for (int h = 0; h < cfg.H; ++h) {
      for (int w = 0; w < cfg.W; ++w) {
        double a = 0, ash = 0;
        for (const Blob& b : clouds) {
          a = std::max(a, b.opacity(h, w));
          // Shadow cast down-right of each cloud.
          Blob sb = b;
          sb.ch += b.rh * 0.6;
          sb.cw += b.rw * 0.6;
          ash = std::max(ash, sb.opacity(h, w) * 0.5);
        }
        if (a <= 0.02 && ash <= 0.02) continue;
        const bool masked = a > 0.3 || ash > 0.15;
        if (masked)
          out.masks.v[(size_t(t) * size_t(cfg.H) + size_t(h)) * size_t(cfg.W) + size_t(w)] = 1;
        for (int c = 0; c < cfg.C; ++c) {
          double val = double(out.clean.at(t, c, h, w)) / 10000.0;
          val = val * (1.0 - a) + cloud_level * a;  // bright cloud
          val *= 1.0 - 0.45 * ash;                  // darker shadow
          out.cube.at(t, c, h, w) = uint16_t(std::lround(std::clamp(val, 0.0, 1.5) * 10000.0));
        }
      }
    }
  }
  return out;
}

double clear_sky_correlation(const ImageCube& cube, const CloudMaskCube& masks) {
  double sum_r = 0;
  int n_r = 0;
  for (int t = 1; t < cube.T; ++t) {
    for (int c = 0; c < cube.C; ++c) {
      double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
      int64_t n = 0;
      for (int h = 0; h < cube.H; ++h) {
        for (int w = 0; w < cube.W; ++w) {
          if (!masks.v.empty() && (masks.at(t, h, w) || masks.at(t - 1, h, w))) continue;
          const double x = cube.at(t - 1, c, h, w), y = cube.at(t, c, h, w);
          sx += x, sy += y, sxx += x * x, syy += y * y, sxy += x * y;
          ++n;
        }
      }
      if (n < 16) continue;
      const double cov = sxy / n - (sx / n) * (sy / n);
      const double vx = sxx / n - (sx / n) * (sx / n);
      const double vy = syy / n - (sy / n) * (sy / n);
      if (vx <= 0 || vy <= 0) continue;
      sum_r += cov / std::sqrt(vx * vy);
      ++n_r;
    }
  }
  return n_r ? sum_r / n_r : 0.0;
}

}  // namespace tec
