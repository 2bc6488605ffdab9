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

#include "tec/metrics.hpp"
#include "tec/synth.hpp"

using namespace tec;

namespace {

ImageCube flat_cube(int T, int C, int H, int W, uint16_t fill) {
  ImageCube c(T, C, H, W);
  for (auto& x : c.v) x = fill;
  return c;
}

ImageCube noisy_copy(const ImageCube& ref, int delta) {
  ImageCube t = ref;
  for (size_t i = 0; i < t.v.size(); ++i) {
    const int v = int(t.v[i]) + ((i % 2 == 0) ? delta : -delta);
    t.v[i] = uint16_t(std::min(65535, std::max(0, v)));
  }
  return t;
}

}  // namespace

TEST_CASE("psnr hits closed-form values") {
  const ImageCube ref = flat_cube(2, 3, 16, 16, 1000);

  // Exact copy: infinite, prints as "inf".
  CHECK(std::isinf(psnr(ref, ref)));
  CHECK(format_metric(psnr(ref, ref)) == "inf");

  // Uniform +-d error: MSE = d^2, PSNR = 20 log10(peak / d).
  const ImageCube off = noisy_copy(ref, 655);
  const double expect = 20.0 * std::log10(65535.0 / 655.0);
  CHECK(psnr(ref, off) == doctest::Approx(expect).epsilon(1e-6));

  // Reflectance peak swaps 65535 for 10000.
  const double expect10k = 20.0 * std::log10(10000.0 / 655.0);
  CHECK(psnr(ref, off, PsnrPeak::k10000) == doctest::Approx(expect10k).epsilon(1e-6));
}

TEST_CASE("auto peak uses the per-band reference spread") {
  ImageCube ref = flat_cube(1, 1, 4, 4, 0);
  // Band spread 0..750.
  for (int h = 0; h < 4; ++h)
    for (int w = 0; w < 4; ++w) ref.at(0, 0, h, w) = uint16_t(h * 200 + w * 50);
  ImageCube test = ref;
  for (int h = 0; h < 4; ++h)
    for (int w = 0; w < 4; ++w) test.at(0, 0, h, w) = uint16_t(ref.at(0, 0, h, w) + 8);
  const double expect = 20.0 * std::log10(750.0 / 8.0);
  CHECK(psnr(ref, test, PsnrPeak::kAuto) == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("psnr averages per band, not per pixel") {
  // Two bands with different errors: the score is the mean of the band
  // PSNRs, not the PSNR of the pooled MSE.
  ImageCube ref = flat_cube(1, 2, 8, 8, 5000);
  ImageCube test = ref;
  for (int h = 0; h < 8; ++h)
    for (int w = 0; w < 8; ++w) {
      test.at(0, 0, h, w) = uint16_t(5000 + 100);
      test.at(0, 1, h, w) = uint16_t(5000 + 400);
    }
  const double band0 = 20.0 * std::log10(65535.0 / 100.0);
  const double band1 = 20.0 * std::log10(65535.0 / 400.0);
  CHECK(psnr(ref, test) == doctest::Approx(0.5 * (band0 + band1)).epsilon(1e-6));
}

TEST_CASE("band order does not change the score") {
  SynthConfig sc;
  sc.T = 1;
  sc.C = 3;
  sc.H = 32;
  sc.W = 32;
  sc.seed = 31;
  const ImageCube a = synth_sequence(sc).cube;
  const ImageCube b = noisy_copy(a, 37);

  ImageCube ap = a, bp = b;  // permute bands 0<->2 in both
  for (int h = 0; h < 32; ++h)
    for (int w = 0; w < 32; ++w) {
      std::swap(ap.at(0, 0, h, w), ap.at(0, 2, h, w));
      std::swap(bp.at(0, 0, h, w), bp.at(0, 2, h, w));
    }
  CHECK(psnr(a, b) == doctest::Approx(psnr(ap, bp)).epsilon(1e-12));
  CHECK(ssim(a, b) == doctest::Approx(ssim(ap, bp)).epsilon(1e-12));
}

TEST_CASE("region psnr scores only the masked pixels") {
  ImageCube ref = flat_cube(1, 1, 8, 8, 2000);
  ImageCube test = ref;
  // Corrupt the left half only.
  for (int h = 0; h < 8; ++h)
    for (int w = 0; w < 4; ++w) test.at(0, 0, h, w) = 2100;

  RegionMask left{1, 8, 8, std::vector<uint8_t>(64, 0)};
  RegionMask right = left;
  for (int h = 0; h < 8; ++h)
    for (int w = 0; w < 8; ++w) {
      left.v[size_t(h) * 8 + size_t(w)] = uint8_t(w < 4 ? 1 : 0);
      right.v[size_t(h) * 8 + size_t(w)] = uint8_t(w >= 4 ? 1 : 0);
    }
  CHECK(psnr_region(ref, test, left) ==
        doctest::Approx(20.0 * std::log10(65535.0 / 100.0)).epsilon(1e-6));
  CHECK(std::isinf(psnr_region(ref, test, right)));
}

TEST_CASE("ssim is one on identity and drops with noise") {
  SynthConfig sc;
  sc.T = 1;
  sc.C = 2;
  sc.H = 48;
  sc.W = 48;
  sc.seed = 77;
  const ImageCube a = synth_sequence(sc).cube;
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));

  const double s_small = ssim(a, noisy_copy(a, 50));
  const double s_big = ssim(a, noisy_copy(a, 800));
  CHECK(s_small < 1.0);
  CHECK(s_big < s_small);
  CHECK(s_big > -1.0);
}

TEST_CASE("ms-ssim drops levels that cannot fit the window") {
  SynthConfig sc;
  sc.T = 1;
  sc.C = 1;
  sc.H = 48;  // levels: 48, 24 -> only two fit the 11-pixel window
  sc.W = 48;
  sc.seed = 79;
  const ImageCube a = synth_sequence(sc).cube;
  CHECK(ms_ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
  const double m = ms_ssim(a, noisy_copy(a, 300));
  CHECK(m > 0.0);
  CHECK(m < 1.0);

  // Large enough for all five levels.
  SynthConfig big = sc;
  big.H = 192;
  big.W = 192;
  const ImageCube b = synth_sequence(big).cube;
  CHECK(ms_ssim(b, b) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("payload rate counts payload bytes only") {
  TecbFile f;
  f.header.H = 64;
  f.header.W = 32;
  f.header.C = 4;
  f.header.T = 2;
  f.frames = {std::vector<uint8_t>(100), std::vector<uint8_t>(28)};
  const double cells = 64.0 * 32 * 4 * 2;
  CHECK(bppbf(f) == doctest::Approx(128 * 8 / cells));
}

TEST_CASE("rate-distortion tables serialize to csv and json") {
  RdRecord r;
  r.family = "tec-fp";
  r.budget = 16;
  r.lambda = 0.5;
  r.bppbf = 1.25;
  r.psnr = std::numeric_limits<double>::infinity();
  r.ssim = 0.987;
  r.msssim = 0.99;
  r.bytes = 4096;
  const std::string csv = rd_csv({r});
  CHECK(csv.find("family") != std::string::npos);
  CHECK(csv.find("tec-fp") != std::string::npos);
  CHECK(csv.find("inf") != std::string::npos);
  const std::string js = rd_json({r});
  CHECK(js.find("\"inf\"") != std::string::npos);
  CHECK(js.find("4096") != std::string::npos);
}
