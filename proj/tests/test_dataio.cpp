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

#include "tec/cube_io.hpp"
#include "tec/image.hpp"
#include "tec/synth.hpp"

using namespace tec;

namespace {

std::string temp_path(const char* name) {
  return std::string("/tmp/tec_test_") + name;
}

ImageCube random_cube(int T, int C, int H, int W, uint64_t seed) {
  ImageCube cube(T, C, H, W);
  Rng rng(seed);
  for (auto& v : cube.v) v = uint16_t(rng.uniform_int(65536));
  return cube;
}

}  // namespace

TEST_CASE("cube validation rejects malformed inputs") {
  ImageCube ok(2, 3, 4, 4);
  ok.validate();

  ImageCube bad = ok;
  bad.v.pop_back();
  CHECK_THROWS_AS(bad.validate(), Error);

  bad = ok;
  bad.timestamps = {5, 5};
  CHECK_THROWS_AS(bad.validate(), Error);

  bad = ok;
  bad.H = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("standardize then destandardize restores 16-bit values") {
  const ImageCube cube = random_cube(2, 3, 8, 8, 77);
  const BandStats stats = compute_band_stats({&cube});
  REQUIRE(stats.bands() == 3);

  const Tensor<float> x = standardize(cube, stats);
  REQUIRE(x.shape() == std::vector<int>{2, 3, 8, 8});

  // Per-band mean ~0, stdev ~1 after standardization.
  for (int c = 0; c < 3; ++c) {
    double sum = 0, sq = 0;
    int n = 0;
    for (int t = 0; t < 2; ++t)
      for (int h = 0; h < 8; ++h)
        for (int w = 0; w < 8; ++w) {
          const double v = x.at(t, c, h, w);
          sum += v;
          sq += v * v;
          ++n;
        }
    CHECK(std::abs(sum / n) < 1e-4);
    CHECK(std::abs(sq / n - 1.0) < 1e-3);
  }

  const ImageCube back = destandardize(x, stats);
  REQUIRE(back.v.size() == cube.v.size());
  int max_err = 0;
  for (size_t i = 0; i < cube.v.size(); ++i)
    max_err = std::max(max_err, std::abs(int(back.v[i]) - int(cube.v[i])));
  CHECK(max_err <= 1);

  const Tensor<float> one = standardize_frame(cube, 1, stats);
  REQUIRE(one.shape() == std::vector<int>{1, 3, 8, 8});
  CHECK(one.at(0, 2, 5, 5) == x.at(1, 2, 5, 5));
}

TEST_CASE("cube files round trip with a fixed 16-byte header") {
  const ImageCube cube = random_cube(3, 2, 5, 7, 123);
  const std::string path = temp_path("cube.tecr");
  save_cube(path, cube);

  const std::vector<uint8_t> raw = read_file(path);
  REQUIRE(raw.size() == 16 + cube.v.size() * 2);
  CHECK(raw[0] == 'T');
  CHECK(raw[1] == 'E');
  CHECK(raw[2] == 'C');
  CHECK(raw[3] == 'R');
  CHECK(raw[4] == 1);  // version
  CHECK(raw[5] == 0);  // dtype u16
  CHECK(raw[6] == 3);  // T
  CHECK(raw[7] == 2);  // C
  CHECK((raw[8] | raw[9] << 8) == 5);    // H, little endian
  CHECK((raw[10] | raw[11] << 8) == 7);  // W

  const ImageCube back = load_cube(path);
  CHECK(back.T == cube.T);
  CHECK(back.v == cube.v);
  CHECK(back.timestamps == cube.timestamps);

  // Truncation must be a data error, not a crash.
  std::vector<uint8_t> cut(raw.begin(), raw.end() - 3);
  const std::string cut_path = temp_path("cut.tecr");
  write_file(cut_path, cut);
  CHECK_THROWS_AS(load_cube(cut_path), Error);

  std::remove(path.c_str());
  std::remove(cut_path.c_str());
}

TEST_CASE("band stats sidecar round trips through json") {
  BandStats stats;
  stats.mean = {120.5, 3000.0};
  stats.stdev = {17.25, 905.125};
  const std::string path = temp_path("cube.tecr.stats.json");
  save_band_stats(path, stats);
  const BandStats back = load_band_stats(path);
  REQUIRE(back.bands() == 2);
  CHECK(back.mean[1] == doctest::Approx(3000.0).epsilon(1e-12));
  CHECK(back.stdev[0] == doctest::Approx(17.25).epsilon(1e-12));
  CHECK(stats_sidecar_path("a/b.tecr") == "a/b.tecr.stats.json");
  std::remove(path.c_str());
}

TEST_CASE("synthetic sequences are deterministic and temporally coherent") {
  SynthConfig cfg;
  cfg.T = 4;
  cfg.C = 6;
  cfg.H = 48;
  cfg.W = 48;
  cfg.seed = 9;

  const SynthResult a = synth_sequence(cfg);
  const SynthResult b = synth_sequence(cfg);
  CHECK(a.cube.v == b.cube.v);

  a.cube.validate();
  REQUIRE(a.cube.T == 4);
  REQUIRE(a.clean.v == a.cube.v);  // no clouds requested

  // Consecutive cloud-free frames stay strongly correlated; that is the
  // temporal redundancy the conditional codecs exploit.
  for (int t = 1; t < cfg.T; ++t) {
    ImageCube pair(2, cfg.C, cfg.H, cfg.W);
    std::copy_n(a.clean.v.begin() + ptrdiff_t(a.clean.idx(t - 1, 0, 0, 0)),
                size_t(cfg.C) * size_t(cfg.H) * size_t(cfg.W), pair.v.begin());
    std::copy_n(a.clean.v.begin() + ptrdiff_t(a.clean.idx(t, 0, 0, 0)),
                size_t(cfg.C) * size_t(cfg.H) * size_t(cfg.W),
                pair.v.begin() + ptrdiff_t(pair.idx(1, 0, 0, 0)));
    CloudMaskCube none;
    none.T = 2;
    none.H = cfg.H;
    none.W = cfg.W;
    none.v.assign(size_t(2) * size_t(cfg.H) * size_t(cfg.W), 0);
    CHECK(clear_sky_correlation(pair, none) > 0.9);
  }
}

TEST_CASE("cloudy frames hit the requested coverage band") {
  SynthConfig cfg;
  cfg.T = 6;
  cfg.C = 4;
  cfg.H = 48;
  cfg.W = 48;
  cfg.seed = 31;
  cfg.cloud_prob = 1.0;
  cfg.cloud_min_frac = 0.3;
  cfg.cloud_max_frac = 0.7;

  const SynthResult r = synth_sequence(cfg);
  double diff_in = 0, diff_out = 0;
  int n_in = 0, n_out = 0;
  for (int t = 0; t < cfg.T; ++t) {
    const double f = r.masks.frame_fraction(t);
    CHECK(f > 0.15);
    CHECK(f < 0.85);
    for (int h = 0; h < cfg.H; ++h)
      for (int w = 0; w < cfg.W; ++w) {
        const double d = std::abs(double(r.cube.at(t, 0, h, w)) - double(r.clean.at(t, 0, h, w)));
        if (r.masks.at(t, h, w)) {
          diff_in += d;
          ++n_in;
        } else {
          diff_out += d;
          ++n_out;
        }
      }
  }
  REQUIRE(n_in > 0);
  REQUIRE(n_out > 0);
  // Clouds perturb masked pixels far more than unmasked ones.
  CHECK(diff_in / n_in > 10.0 * (diff_out / std::max(1, n_out) + 1.0));
}
