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

#include "tec/model.hpp"
#include "tec/ops.hpp"

using namespace tec;

namespace {

Tensor<float> randu(std::vector<int> shape, uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t(std::move(shape));
  for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = float(rng.uniform(-1, 1));
  return t;
}

}  // namespace

TEST_CASE("analysis downsamples 16x and synthesis restores the frame size") {
  for (Family f : {Family::kFactorized, Family::kElic}) {
    CAPTURE(family_name(f));
    CodecConfig cfg = desk_codec_config(f);
    cfg.in_channels = 3;
    cfg.N = 8;
    cfg.M = 16;
    const Model m = build_model(cfg, 41);
    EvalCtx<float> c{&m.ps};

    const Tensor<float> x = randu({1, 3, 64, 32}, 43);
    const Tensor<float> y = transforms::analysis(c, x, cfg);
    CHECK(y.shape() == std::vector<int>{1, 16, 4, 2});
    const Tensor<float> xr = transforms::synthesis(c, y, cfg);
    CHECK(xr.shape() == std::vector<int>{1, 3, 64, 32});

    // Same input, same output: the forward pass has no hidden state.
    const Tensor<float> y2 = transforms::analysis(c, x, cfg);
    for (Eigen::Index i = 0; i < y.size(); ++i) CHECK(y[i] == y2[i]);
  }
}

TEST_CASE("analysis rejects off-grid input sizes") {
  CodecConfig cfg = desk_codec_config(Family::kFactorized);
  cfg.in_channels = 3;
  cfg.N = 8;
  cfg.M = 16;
  const Model m = build_model(cfg, 47);
  EvalCtx<float> c{&m.ps};
  CHECK_THROWS_AS(transforms::analysis(c, randu({1, 3, 60, 64}, 49), cfg), Error);
  CHECK_THROWS_AS(transforms::analysis(c, randu({1, 2, 64, 64}, 53), cfg), Error);
}

TEST_CASE("hyperprior transforms shrink and restore by 4x") {
  CodecConfig cfg = desk_codec_config(Family::kElic);
  cfg.in_channels = 3;
  cfg.N = 8;
  cfg.M = 16;
  const Model m = build_model(cfg, 59);
  EvalCtx<float> c{&m.ps};

  const Tensor<float> y = randu({1, 16, 8, 4}, 61);
  const Tensor<float> z = transforms::hyper_analysis(c, y, cfg);
  CHECK(z.shape() == std::vector<int>{1, 8, 2, 1});
  const Tensor<float> f = transforms::hyper_synthesis(c, z, cfg);
  CHECK(f.shape() == std::vector<int>{1, 16, 8, 4});

  CodecConfig fp = desk_codec_config(Family::kFactorized);
  fp.in_channels = 3;
  fp.N = 8;
  fp.M = 16;
  CHECK_THROWS_AS(transforms::hyper_analysis(c, y, fp), Error);
}

TEST_CASE("the two backbones are actually different functions") {
  CodecConfig a = desk_codec_config(Family::kFactorized);
  a.in_channels = 3;
  a.N = 8;
  a.M = 16;
  CodecConfig b = a;
  b.family = Family::kElic;
  const Model ma = build_model(a, 67);
  const Model mb = build_model(b, 67);

  // Residual backbones register different parameter names.
  CHECK(ma.ps.has("ga.c0.w"));
  CHECK_FALSE(ma.ps.has("ga.s0.down.w"));
  CHECK(mb.ps.has("ga.s0.down.w"));
  CHECK_FALSE(mb.ps.has("ga.c0.w"));
}

TEST_CASE("model construction is reproducible by seed") {
  CodecConfig cfg = desk_codec_config(Family::kTemporal);
  cfg.in_channels = 3;
  cfg.N = 8;
  cfg.M = 16;
  TTConfig tt = desk_tt_config(cfg.M);
  tt.d_tt = 32;
  tt.heads = 2;
  tt.sep_layers = tt.joint_layers = tt.dec_layers = 1;

  const Model a = build_model(cfg, tt, 71);
  const Model b = build_model(cfg, tt, 71);
  const Model c = build_model(cfg, tt, 72);
  REQUIRE(a.ps.count() == b.ps.count());
  bool same = true, differs_by_seed = false;
  for (int i = 0; i < a.ps.count(); ++i) {
    for (Eigen::Index j = 0; j < a.ps.entry(i).value.size(); ++j) {
      if (a.ps.entry(i).value[j] != b.ps.entry(i).value[j]) same = false;
      if (a.ps.entry(i).value[j] != c.ps.entry(i).value[j]) differs_by_seed = true;
    }
  }
  CHECK(same);
  CHECK(differs_by_seed);
}
