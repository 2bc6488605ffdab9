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

#ifndef TEC_IMAGE_HPP_
#define TEC_IMAGE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tec/tensor.hpp"

namespace tec {

// A short multispectral sequence: T frames of C bands at H x W, unsigned
// 16-bit reflectance, stored frame-major then band-major. Timestamps are
// strictly increasing; files without them get 0..T-1.
struct ImageCube {
  int T = 0, C = 0, H = 0, W = 0;
  std::vector<uint16_t> v;
  std::vector<int64_t> timestamps;

  ImageCube() = default;
  ImageCube(int T_, int C_, int H_, int W_);

  size_t idx(int t, int c, int h, int w) const {
    return ((size_t(t) * size_t(C) + size_t(c)) * size_t(H) + size_t(h)) * size_t(W) + size_t(w);
  }
  uint16_t at(int t, int c, int h, int w) const { return v[idx(t, c, h, w)]; }
  uint16_t& at(int t, int c, int h, int w) { return v[idx(t, c, h, w)]; }

  void validate() const;
};

// Per-band standardization constants, estimated over a corpus.
struct BandStats {
  std::vector<double> mean;
  std::vector<double> stdev;  // floored at kMinStd
  int bands() const { return int(mean.size()); }
  static constexpr double kMinStd = 1e-6;
};

BandStats compute_band_stats(const std::vector<const ImageCube*>& corpus);

// (v - mean) / std per band, as float32 [T,C,H,W].
Tensor<float> standardize(const ImageCube& cube, const BandStats& stats);
// One frame only: [1,C,H,W].
Tensor<float> standardize_frame(const ImageCube& cube, int t, const BandStats& stats);

// Inverse map with round-to-nearest and clip to [0, 65535]. x is [T,C,H,W]
// or [1,C,H,W].
ImageCube destandardize(const Tensor<float>& x, const BandStats& stats);

}  // namespace tec

#endif  // TEC_IMAGE_HPP_
