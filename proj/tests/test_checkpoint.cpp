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

#include <cstdio>
#include <fstream>
#include <vector>

#include "tec/checkpoint.hpp"
#include "tec/synth.hpp"
#include "tec/trainer.hpp"

using namespace tec;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/tec_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

Model make_model(Family f) {
  CodecConfig cfg = desk_codec_config(f);
  cfg.in_channels = 3;
  cfg.N = 8;
  cfg.M = 16;
  TTConfig tt = desk_tt_config(cfg.M);
  tt.d_tt = 32;
  tt.heads = 2;
  tt.sep_layers = tt.joint_layers = tt.dec_layers = 1;
  Model m = build_model(cfg, tt, 21);
  m.stats.mean = {100.0, 200.0, 300.0};
  m.stats.stdev = {40.0, 50.0, 60.0};
  return m;
}

bool params_equal(const Model& a, const Model& b, bool adam_too) {
  if (a.ps.count() != b.ps.count()) return false;
  for (int i = 0; i < a.ps.count(); ++i) {
    const auto& ea = a.ps.entry(i);
    const auto& eb = b.ps.entry(i);
    if (ea.name != eb.name || ea.group != eb.group) return false;
    if (ea.value.shape() != eb.value.shape()) return false;
    for (Eigen::Index j = 0; j < ea.value.size(); ++j)
      if (ea.value[j] != eb.value[j]) return false;
    if (adam_too) {
      if (ea.adam_m.size() != eb.adam_m.size() || ea.adam_v.size() != eb.adam_v.size()) return false;
      for (Eigen::Index j = 0; j < ea.adam_m.size(); ++j)
        if (ea.adam_m[j] != eb.adam_m[j]) return false;
      for (Eigen::Index j = 0; j < ea.adam_v.size(); ++j)
        if (ea.adam_v[j] != eb.adam_v[j]) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("checkpoints restore every family bit for bit") {
  for (Family f : {Family::kFactorized, Family::kElic, Family::kTemporal, Family::kFlex}) {
    CAPTURE(family_name(f));
    TempFile tf(std::string("ckpt_") + family_name(f) + ".teck");
    const Model m = make_model(f);
    save_checkpoint(tf.path, m);
    const Model r = load_checkpoint(tf.path);
    CHECK(r.cfg.family == m.cfg.family);
    CHECK(r.cfg.M == m.cfg.M);
    CHECK(r.cfg.N == m.cfg.N);
    CHECK(r.cfg.in_channels == m.cfg.in_channels);
    CHECK(r.stats.mean == m.stats.mean);
    CHECK(r.stats.stdev == m.stats.stdev);
    CHECK(r.seed == m.seed);
    CHECK(params_equal(m, r, false));
    if (m.cfg.temporal()) {
      CHECK(r.tt.d_tt == m.tt.d_tt);
      CHECK(r.tt.heads == m.tt.heads);
      CHECK(r.tt.dec_layers == m.tt.dec_layers);
    }
  }
}

TEST_CASE("optimizer slots and trainer state ride along") {
  TempFile tf("ckpt_state.teck");
  Model m = make_model(Family::kFactorized);

  SynthConfig sc;
  sc.T = 2;
  sc.C = 3;
  sc.H = 64;
  sc.W = 64;
  sc.seed = 5;
  const std::vector<ImageCube> corpus = {synth_sequence(sc).cube};

  TrainConfig tc;
  tc.steps = 4;
  tc.lambda = 0.1;
  m.stats = compute_band_stats({&corpus[0]});
  Trainer tr(m, tc);
  tr.train_step(corpus);
  tr.train_step(corpus);

  const TrainerState ts = tr.state();
  CHECK(ts.step == 2);
  CHECK(ts.has_adam);
  save_checkpoint(tf.path, m, &ts);

  TrainerState ts2;
  const Model r = load_checkpoint(tf.path, &ts2);
  CHECK(ts2.step == 2);
  CHECK(ts2.has_adam);
  CHECK(ts2.rng == ts.rng);
  CHECK(params_equal(m, r, true));
}

TEST_CASE("a corrupted parameter payload is rejected") {
  TempFile tf("ckpt_bad.teck");
  const Model m = make_model(Family::kFactorized);
  save_checkpoint(tf.path, m);

  std::ifstream in(tf.path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  bytes[bytes.size() - 5] ^= 0x40;  // flip a bit inside the last parameter
  std::ofstream out(tf.path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size()));
  out.close();

  CHECK_THROWS_AS(load_checkpoint(tf.path), Error);
}

TEST_CASE("a truncated file is rejected") {
  TempFile tf("ckpt_trunc.teck");
  const Model m = make_model(Family::kFactorized);
  save_checkpoint(tf.path, m);

  std::ifstream in(tf.path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  std::ofstream out(tf.path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), std::streamsize(bytes.size() / 2));
  out.close();

  CHECK_THROWS_AS(load_checkpoint(tf.path), Error);
}

TEST_CASE("wrong magic is rejected") {
  TempFile tf("ckpt_magic.teck");
  std::ofstream out(tf.path, std::ios::binary);
  out << "NOPEjunkjunkjunkjunk";
  out.close();
  CHECK_THROWS_AS(load_checkpoint(tf.path), Error);
}
