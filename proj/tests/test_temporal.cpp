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

#include "tec/codec.hpp"
#include "tec/model.hpp"
#include "tec/ops.hpp"

using namespace tec;

namespace {

Model tt_model(uint64_t seed = 9) {
  CodecConfig cfg = desk_codec_config(Family::kTemporal);
  cfg.in_channels = 3;
  cfg.N = 8;
  cfg.M = 16;
  TTConfig tt = desk_tt_config(cfg.M);
  tt.d_tt = 32;
  tt.heads = 2;
  tt.sep_layers = 1;
  tt.joint_layers = 1;
  tt.dec_layers = 2;
  return build_model(cfg, tt, seed);
}

Tensor<float> randu(std::vector<int> shape, uint64_t seed, double span = 2) {
  Rng rng(seed);
  Tensor<float> t(std::move(shape));
  for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = float(rng.uniform(-span, span));
  return t;
}

}  // namespace

TEST_CASE("transformer config rejects bad head splits") {
  TTConfig t = desk_tt_config(16);
  t.d_tt = 30;
  t.heads = 4;
  CHECK_THROWS_AS(t.validate(), Error);
  t.d_tt = 32;
  CHECK_NOTHROW(t.validate());
  CHECK(t.ctx_len(0) == 1);
  CHECK(t.ctx_len(1) == 128);
  CHECK(t.ctx_len(2) == 128);
}

TEST_CASE("prior row t never looks at token rows >= t") {
  const Model m = tt_model();
  EvalCtx<float> c{&m.ps};
  const int B = 2, T = tokens::kTokensPerBlock;
  const Tensor<float> ctx = temporal::tt_dummy_context(c, B);

  const Tensor<float> full = randu({B * T, m.cfg.M}, 211);
  for (int t = 0; t < T; ++t) {
    Tensor<float> zeroed = full;
    for (int b = 0; b < B; ++b)
      for (int r = t; r < T; ++r)
        for (int d = 0; d < m.cfg.M; ++d) zeroed.at(b * T + r, d) = 0;
    const auto pf = temporal::tt_priors(c, m.tt, full, ctx, 1, B);
    const auto pz = temporal::tt_priors(c, m.tt, zeroed, ctx, 1, B);
    for (int b = 0; b < B; ++b)
      for (int d = 0; d < m.cfg.M; ++d) {
        CHECK(pf.first.at(b * T + t, d) == pz.first.at(b * T + t, d));
        CHECK(pf.second.at(b * T + t, d) == pz.second.at(b * T + t, d));
      }
  }
}

TEST_CASE("blocks do not attend across block boundaries") {
  const Model m = tt_model();
  EvalCtx<float> c{&m.ps};
  const int B = 2, T = tokens::kTokensPerBlock;
  const Tensor<float> ctx = temporal::tt_dummy_context(c, B);

  const Tensor<float> base = randu({B * T, m.cfg.M}, 223);
  Tensor<float> other = base;
  for (int r = 0; r < T; ++r)
    for (int d = 0; d < m.cfg.M; ++d) other.at(T + r, d) += 7.0f;  // mutate block 1 only

  const auto p0 = temporal::tt_priors(c, m.tt, base, ctx, 1, B);
  const auto p1 = temporal::tt_priors(c, m.tt, other, ctx, 1, B);
  for (int r = 0; r < T; ++r)
    for (int d = 0; d < m.cfg.M; ++d) {
      CHECK(p0.first.at(r, d) == p1.first.at(r, d));
      CHECK(p0.second.at(r, d) == p1.second.at(r, d));
    }
}

TEST_CASE("sigma grid activation is floored above zero") {
  const Model m = tt_model();
  Tensor<float> sraw({2, 2});
  sraw[0] = -50;
  sraw[1] = 0;
  sraw[2] = 3;
  sraw[3] = 50;
  const Tensor<float> sg = latent_sigma(m, sraw);
  for (Eigen::Index i = 0; i < sg.size(); ++i) CHECK(sg[i] >= 0.11f);
  CHECK(sg[0] == doctest::Approx(0.11).epsilon(1e-4));
  CHECK(sg[3] > 1.0f);
}

TEST_CASE("frame order changes the context") {
  const Model m = tt_model();
  EvalCtx<float> c{&m.ps};
  const int B = 1;
  const Tensor<float> w0 = randu({B * 64, m.cfg.M}, 227);
  const Tensor<float> w1 = randu({B * 64, m.cfg.M}, 229);
  const Tensor<float> ab = temporal::tt_context(c, m.tt, w0, w1, B);
  const Tensor<float> ba = temporal::tt_context(c, m.tt, w1, w0, B);
  bool differs = false;
  for (Eigen::Index i = 0; i < ab.size(); ++i)
    if (ab[i] != ba[i]) differs = true;
  CHECK(differs);
}

TEST_CASE("past windows tile the latent with reflected borders") {
  const Model m = tt_model();
  const Tensor<float> y = randu({1, m.cfg.M, 4, 8}, 233);
  const Tensor<float> win = past_windows(y);
  CHECK(win.shape() == std::vector<int>{2 * 64, m.cfg.M});
  // Block 0 window token (2,2) is the block's own top-left cell (0,0).
  for (int ch = 0; ch < m.cfg.M; ++ch) CHECK(win.at(2 * 8 + 2, ch) == y.at(0, ch, 0, 0));
}
