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

#include <doctest.h>

#include "tec/inpaint.hpp"

using namespace tec;

namespace {

CloudMaskCube make_masks(int T, int H, int W) {
  CloudMaskCube m;
  m.T = T;
  m.H = H;
  m.W = W;
  m.v.assign(size_t(T) * size_t(H) * size_t(W), 0);
  return m;
}

void fill_frame_fraction(CloudMaskCube& m, int t, double frac) {
  const int total = m.H * m.W;
  const int n = int(frac * total);
  for (int i = 0; i < n; ++i) {
    const int h = i / m.W, w = i % m.W;
    m.v[(size_t(t) * size_t(m.H) + size_t(h)) * size_t(m.W) + size_t(w)] = 1;
  }
}

Model tt_model() {
  CodecConfig cfg = desk_codec_config(Family::kTemporal);
  cfg.in_channels = 3;
  cfg.N = 8;
  cfg.M = 16;
  TTConfig tt = desk_tt_config(cfg.M);
  tt.d_tt = 32;
  tt.heads = 2;
  tt.sep_layers = tt.joint_layers = tt.dec_layers = 1;
  Model m = build_model(cfg, tt, 33);
  m.stats.mean = {1000.0, 1100.0, 1200.0};
  m.stats.stdev = {300.0, 300.0, 300.0};
  return m;
}

}  // namespace

TEST_CASE("mask pooling reports per-cell cloud fractions") {
  CloudMaskCube m = make_masks(1, 32, 32);  // latent 2x2
  // Cell (0,0): fully cloudy. Cell (0,1): one pixel. Others clear.
  for (int h = 0; h < 16; ++h)
    for (int w = 0; w < 16; ++w) m.v[size_t(h) * 32 + size_t(w)] = 1;
  m.v[0 * 32 + 20] = 1;

  const std::vector<double> f = pool_mask(m, 0, 2, 2);
  REQUIRE(f.size() == 4);
  CHECK(f[0] == doctest::Approx(1.0));
  CHECK(f[1] == doctest::Approx(1.0 / 256.0));
  CHECK(f[2] == doctest::Approx(0.0));
  CHECK(f[3] == doctest::Approx(0.0));
}

TEST_CASE("context picks the two least cloudy frames in time order") {
  CloudMaskCube m = make_masks(4, 32, 32);
  fill_frame_fraction(m, 0, 0.40);
  fill_frame_fraction(m, 1, 0.10);
  fill_frame_fraction(m, 2, 0.90);  // target anyway
  fill_frame_fraction(m, 3, 0.20);
  CHECK(reorder_context(m, 2) == std::vector<int>{1, 3});

  // Ties break toward the earlier frame.
  CloudMaskCube tie = make_masks(3, 32, 32);
  fill_frame_fraction(tie, 0, 0.10);
  fill_frame_fraction(tie, 1, 0.10);
  CHECK(reorder_context(tie, 2) == std::vector<int>{0, 1});
}

TEST_CASE("a single usable frame is duplicated") {
  CloudMaskCube m = make_masks(3, 32, 32);
  fill_frame_fraction(m, 0, 0.80);  // unusable, over half cloudy
  fill_frame_fraction(m, 1, 0.30);
  CHECK(reorder_context(m, 2) == std::vector<int>{1, 1});

  CloudMaskCube solo = make_masks(1, 32, 32);
  CHECK(reorder_context(solo, 0).empty());
}

TEST_CASE("inpainting touches only cloud-marked tokens under interleave") {
  const Model m = tt_model();
  SynthConfig sc;
  sc.T = 3;
  sc.C = 3;
  sc.H = 128;
  sc.W = 128;
  sc.seed = 91;
  const SynthResult sr = synth_sequence(sc);

  // Cloud the top-left 32x32 corner of the last frame: latent cells with
  // both indices <= 1.
  CloudMaskCube masks = make_masks(3, 128, 128);
  for (int h = 0; h < 32; ++h)
    for (int w = 0; w < 32; ++w)
      masks.v[(size_t(2) * 128 + size_t(h)) * 128 + size_t(w)] = 1;

  const ImageCube out = inpaint_frame(m, sr.cube, masks, 2);
  CHECK(out.T == 1);
  CHECK(out.H == 128);

  // Clear tokens stay observed, so pixels outside the replaced cells'
  // synthesis footprint (a cell at index i reaches up to pixel 16*i + 60
  // through the four upsampling stages) must match the plain reconstruction.
  const Tensor<float> x = standardize_frame(sr.cube, 2, m.stats);
  const Tensor<float> yhat = quantize_latent(analysis_frame(m, x));
  const ImageCube plain = destandardize(synthesis_frame(m, yhat), m.stats);
  bool clear_matches = true, cloudy_differs = false;
  for (int c = 0; c < 3; ++c)
    for (int h = 0; h < 128; ++h)
      for (int w = 0; w < 128; ++w) {
        const bool cloudy_region = h < 32 && w < 32;
        if (h >= 77 || w >= 77) {
          if (out.at(0, c, h, w) != plain.at(0, c, h, w)) clear_matches = false;
        }
        if (cloudy_region && out.at(0, c, h, w) != plain.at(0, c, h, w)) cloudy_differs = true;
      }
  CHECK(clear_matches);
  CHECK(cloudy_differs);
}

TEST_CASE("forecast mode predicts every token") {
  const Model m = tt_model();
  SynthConfig sc;
  sc.T = 3;
  sc.C = 3;
  sc.H = 64;
  sc.W = 64;
  sc.seed = 93;
  const SynthResult sr = synth_sequence(sc);
  CloudMaskCube masks = make_masks(3, 64, 64);
  masks.v[(size_t(2) * 64 + 0) * 64 + 0] = 1;  // one cloudy pixel

  InpaintOptions io;
  io.mode = InpaintMode::kForecast;
  const ImageCube fc = inpaint_frame(m, sr.cube, masks, 2, io);

  io.mode = InpaintMode::kInterleave;
  const ImageCube il = inpaint_frame(m, sr.cube, masks, 2, io);
  CHECK(fc.v != il.v);  // forecast ignores the observed frame
}

TEST_CASE("sampling is reproducible by seed") {
  const Model m = tt_model();
  SynthConfig sc;
  sc.T = 2;
  sc.C = 3;
  sc.H = 64;
  sc.W = 64;
  sc.seed = 95;
  const SynthResult sr = synth_sequence(sc);
  CloudMaskCube masks = make_masks(2, 64, 64);
  for (int h = 0; h < 64; ++h)
    for (int w = 0; w < 32; ++w) masks.v[(size_t(1) * 64 + size_t(h)) * 64 + size_t(w)] = 1;

  InpaintOptions io;
  io.sample = true;
  io.seed = 7;
  const ImageCube a = inpaint_frame(m, sr.cube, masks, 1, io);
  const ImageCube b = inpaint_frame(m, sr.cube, masks, 1, io);
  CHECK(a.v == b.v);
  io.seed = 8;
  const ImageCube c = inpaint_frame(m, sr.cube, masks, 1, io);
  CHECK(a.v != c.v);
}

TEST_CASE("baseline copies only inside the cloud mask") {
  SynthConfig sc;
  sc.T = 2;
  sc.C = 3;
  sc.H = 32;
  sc.W = 32;
  sc.seed = 97;
  const SynthResult sr = synth_sequence(sc);
  CloudMaskCube masks = make_masks(2, 32, 32);
  for (int w = 0; w < 32; ++w) masks.v[(size_t(1) * 32 + 5) * 32 + size_t(w)] = 1;

  const ImageCube out = copy_least_cloudy(sr.cube, masks, 1);
  for (int c = 0; c < 3; ++c)
    for (int h = 0; h < 32; ++h)
      for (int w = 0; w < 32; ++w) {
        if (h == 5)
          CHECK(out.at(0, c, h, w) == sr.cube.at(0, c, h, w));
        else
          CHECK(out.at(0, c, h, w) == sr.cube.at(1, c, h, w));
      }
}
