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

#include <cmath>

#include "tec/synth.hpp"
#include "tec/trainer.hpp"

using namespace tec;

namespace {

Model small_model(Family f, uint64_t seed = 13) {
  CodecConfig cfg = desk_codec_config(f);
  cfg.in_channels = 3;
  cfg.N = 8;
  cfg.M = 16;
  TTConfig tt = desk_tt_config(cfg.M);
  tt.d_tt = 32;
  tt.heads = 2;
  tt.sep_layers = tt.joint_layers = tt.dec_layers = 1;
  return build_model(cfg, tt, seed);
}

std::vector<ImageCube> small_corpus(int n, int T, uint64_t seed) {
  std::vector<ImageCube> out;
  for (int i = 0; i < n; ++i) {
    SynthConfig sc;
    sc.T = T;
    sc.C = 3;
    sc.H = 64;
    sc.W = 64;
    sc.seed = seed + uint64_t(i);
    out.push_back(synth_sequence(sc).cube);
  }
  return out;
}

bool same_params(const Model& a, const Model& b) {
  if (a.ps.count() != b.ps.count()) return false;
  for (int i = 0; i < a.ps.count(); ++i) {
    const auto& ea = a.ps.entry(i);
    const auto& eb = b.ps.entry(i);
    if (ea.name != eb.name || ea.value.size() != eb.value.size()) return false;
    for (Eigen::Index j = 0; j < ea.value.size(); ++j)
      if (ea.value[j] != eb.value[j]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("learning rate warms up linearly and decays to zero") {
  const double peak = 2e-3;
  const int64_t total = 1000;
  CHECK(lr_schedule(peak, 0, total, 0.1) == doctest::Approx(0.01 * peak));
  CHECK(lr_schedule(peak, 49, total, 0.1) == doctest::Approx(0.5 * peak));
  CHECK(lr_schedule(peak, 99, total, 0.1) == doctest::Approx(peak));
  CHECK(lr_schedule(peak, 100, total, 0.1) == doctest::Approx(peak));
  CHECK(lr_schedule(peak, total, total, 0.1) == doctest::Approx(0.0).epsilon(1e-9));
  // Cosine midpoint of the decay leg.
  const double mid = lr_schedule(peak, 550, total, 0.1);
  CHECK(mid == doctest::Approx(0.5 * peak).epsilon(1e-6));
}

TEST_CASE("small lambdas start boosted and anneal back") {
  const double lam = 0.5;
  const int64_t total = 1000;
  CHECK(lambda_schedule(lam, 0, total) == doctest::Approx(10 * lam));
  CHECK(lambda_schedule(lam, 149, total) == doctest::Approx(10 * lam));
  CHECK(lambda_schedule(lam, 300, total) == doctest::Approx(lam));
  CHECK(lambda_schedule(lam, 999, total) == doctest::Approx(lam));
  const double midway = lambda_schedule(lam, 225, total);
  CHECK(midway > lam);
  CHECK(midway < 10 * lam);
  // Large lambdas skip the boost.
  CHECK(lambda_schedule(10.0, 0, total) == doctest::Approx(10.0));
}

TEST_CASE("training is deterministic for a fixed seed") {
  const std::vector<ImageCube> corpus = small_corpus(2, 2, 501);
  TrainConfig tc;
  tc.steps = 5;
  tc.lambda = 0.1;
  tc.seed = 99;

  Model a = small_model(Family::kFactorized);
  Model b = small_model(Family::kFactorized);
  train_model(a, corpus, tc);
  train_model(b, corpus, tc);
  CHECK(same_params(a, b));
}

TEST_CASE("a few steps keep the loss finite and move the parameters") {
  const std::vector<ImageCube> corpus = small_corpus(2, 2, 601);
  for (Family f : {Family::kFactorized, Family::kElic, Family::kTemporal, Family::kFlex}) {
    CAPTURE(family_name(f));
    Model m = small_model(f);
    const Model before = small_model(f);
    TrainConfig tc;
    tc.steps = 3;
    tc.lambda = 0.1;
    train_model(m, corpus, tc);
    CHECK(m.has_stats());
    CHECK_FALSE(same_params(m, before));
  }
}

TEST_CASE("restoring trainer state replays the identical run") {
  const std::vector<ImageCube> corpus = small_corpus(2, 2, 701);
  TrainConfig tc;
  tc.steps = 6;
  tc.lambda = 0.1;

  // Straight run.
  Model full = small_model(Family::kFactorized);
  full.stats = compute_band_stats({&corpus[0], &corpus[1]});
  Trainer t_full(full, tc);
  for (int i = 0; i < 6; ++i) t_full.train_step(corpus);

  // Run three steps, snapshot, resume on a fresh trainer.
  Model half = small_model(Family::kFactorized);
  half.stats = full.stats;
  Trainer t_half(half, tc);
  for (int i = 0; i < 3; ++i) t_half.train_step(corpus);
  const TrainerState snap = t_half.state();

  Trainer t_resume(half, tc);
  t_resume.restore(snap);
  CHECK(t_resume.step() == 3);
  for (int i = 0; i < 3; ++i) t_resume.train_step(corpus);

  CHECK(same_params(full, half));
}

TEST_CASE("validation reports real payload sizes") {
  const std::vector<ImageCube> corpus = small_corpus(1, 2, 801);
  Model m = small_model(Family::kFactorized);
  TrainConfig tc;
  tc.steps = 2;
  tc.lambda = 0.1;
  train_model(m, corpus, tc);

  const ValPoint vp = validate_cube(m, corpus[0]);
  CHECK(vp.bytes > 0);
  CHECK(vp.bpp > 0);
  CHECK(std::isfinite(vp.mse_std));
  const double cells = double(corpus[0].T) * 3 * 64 * 64;
  CHECK(vp.bpp == doctest::Approx(double(vp.bytes) * 8.0 / cells));
}

TEST_CASE("step statistics expose the effective schedule values") {
  const std::vector<ImageCube> corpus = small_corpus(1, 2, 901);
  Model m = small_model(Family::kFactorized);
  m.stats = compute_band_stats({&corpus[0]});
  TrainConfig tc;
  tc.steps = 10;
  tc.lambda = 0.2;
  Trainer tr(m, tc);
  const StepStats s = tr.train_step(corpus);
  CHECK(s.lambda_eff == doctest::Approx(lambda_schedule(0.2, 0, 10)));
  CHECK(s.lr == doctest::Approx(lr_schedule(tc.lr, 0, 10, warmup_fraction(Family::kFactorized))));
  CHECK(std::isfinite(s.loss));
  CHECK(s.rate_bpp > 0);
}
