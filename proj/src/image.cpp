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

#include "tec/image.hpp"

#include <cmath>

namespace tec {

ImageCube::ImageCube(int T_, int C_, int H_, int W_) : T(T_), C(C_), H(H_), W(W_) {
  v.assign(size_t(T) * size_t(C) * size_t(H) * size_t(W), 0);
  timestamps.resize(size_t(T));
  for (int t = 0; t < T; ++t) timestamps[size_t(t)] = t;
}

void ImageCube::validate() const {
  if (T <= 0 || C <= 0 || H <= 0 || W <= 0)
    fail_data("cube has empty axis: T=" + std::to_string(T) + " C=" + std::to_string(C) +
              " H=" + std::to_string(H) + " W=" + std::to_string(W));
  if (v.size() != size_t(T) * size_t(C) * size_t(H) * size_t(W))
    fail_data("cube sample count does not match T*C*H*W");
  if (timestamps.size() != size_t(T)) fail_data("cube timestamp count does not match T");
  for (int t = 1; t < T; ++t)
    if (timestamps[size_t(t)] <= timestamps[size_t(t) - 1])
      fail_data("timestamps not strictly increasing at frame " + std::to_string(t));
}

BandStats compute_band_stats(const std::vector<const ImageCube*>& corpus) {
  TEC_CHECK(!corpus.empty(), "empty corpus for band stats");
  const int C = corpus[0]->C;
  std::vector<double> sum(size_t(C), 0.0), sumsq(size_t(C), 0.0);
  std::vector<int64_t> n(size_t(C), 0);
  for (const ImageCube* cube : corpus) {
    if (cube->C != C) fail_data("corpus cubes disagree on band count");
    const size_t plane = size_t(cube->H) * size_t(cube->W);
    for (int t = 0; t < cube->T; ++t) {
      for (int c = 0; c < C; ++c) {
        const uint16_t* p = cube->v.data() + cube->idx(t, c, 0, 0);
        double s = 0, s2 = 0;
        for (size_t i = 0; i < plane; ++i) {
          const double x = double(p[i]);
          s += x;
          s2 += x * x;
        }
        sum[size_t(c)] += s;
        sumsq[size_t(c)] += s2;
        n[size_t(c)] += int64_t(plane);
      }
    }
  }
  BandStats st;
  st.mean.resize(size_t(C));
  st.stdev.resize(size_t(C));
  for (int c = 0; c < C; ++c) {
    const double m = sum[size_t(c)] / double(n[size_t(c)]);
    const double var = std::max(0.0, sumsq[size_t(c)] / double(n[size_t(c)]) - m * m);
    st.mean[size_t(c)] = m;
    st.stdev[size_t(c)] = std::max(std::sqrt(var), BandStats::kMinStd);
  }
  return st;
}

Tensor<float> standardize(const ImageCube& cube, const BandStats& stats) {
  if (stats.bands() != cube.C) fail_data("band stats do not match cube band count");
  Tensor<float> x({cube.T, cube.C, cube.H, cube.W});
  const size_t plane = size_t(cube.H) * size_t(cube.W);
  Eigen::Index o = 0;
  for (int t = 0; t < cube.T; ++t) {
    for (int c = 0; c < cube.C; ++c) {
      const double m = stats.mean[size_t(c)], inv = 1.0 / stats.stdev[size_t(c)];
      const uint16_t* p = cube.v.data() + cube.idx(t, c, 0, 0);
      for (size_t i = 0; i < plane; ++i) x[o++] = float((double(p[i]) - m) * inv);
    }
  }
  return x;
}

Tensor<float> standardize_frame(const ImageCube& cube, int t, const BandStats& stats) {
  if (stats.bands() != cube.C) fail_data("band stats do not match cube band count");
  Tensor<float> x({1, cube.C, cube.H, cube.W});
  const size_t plane = size_t(cube.H) * size_t(cube.W);
  Eigen::Index o = 0;
  for (int c = 0; c < cube.C; ++c) {
    const double m = stats.mean[size_t(c)], inv = 1.0 / stats.stdev[size_t(c)];
    const uint16_t* p = cube.v.data() + cube.idx(t, c, 0, 0);
    for (size_t i = 0; i < plane; ++i) x[o++] = float((double(p[i]) - m) * inv);
  }
  return x;
}

ImageCube destandardize(const Tensor<float>& x, const BandStats& stats) {
  TEC_CHECK(x.rank() == 4, "destandardize expects [T,C,H,W]");
  const int T = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (stats.bands() != C) fail_data("band stats do not match tensor band count");
  ImageCube cube(T, C, H, W);
  const size_t plane = size_t(H) * size_t(W);
  Eigen::Index o = 0;
  for (int t = 0; t < T; ++t) {
    for (int c = 0; c < C; ++c) {
      const double m = stats.mean[size_t(c)], s = stats.stdev[size_t(c)];
      uint16_t* p = cube.v.data() + cube.idx(t, c, 0, 0);
      for (size_t i = 0; i < plane; ++i) {
        const double r = std::round(double(x[o++]) * s + m);
        p[i] = uint16_t(std::min(65535.0, std::max(0.0, r)));
      }
    }
  }
  return cube;
}

}  // namespace tec
