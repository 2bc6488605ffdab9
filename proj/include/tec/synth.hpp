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

#ifndef TEC_SYNTH_HPP_
#define TEC_SYNTH_HPP_

#include "tec/image.hpp"

namespace tec {

// Synthetic Earth-observation sequences: smooth band-correlated terrain, a
// slow multiplicative drift plus a small translation between frames, and
// optional bright cloud blobs with offset shadows. With the same seed, the
// clean cube is the cloud-free version of the returned cube.
struct SynthConfig {
  int T = 4, C = 12, H = 64, W = 64;
  uint64_t seed = 0;
  double cloud_prob = 0.0;       // chance a frame receives clouds
  double cloud_min_frac = 0.3;   // target cover bounds when cloudy
  double cloud_max_frac = 0.7;
  double drift = 0.05;           // per-frame multiplicative drift span
};

struct CloudMaskCube {
  int T = 0, H = 0, W = 0;
  std::vector<uint8_t> v;  // 1 = cloud or shadow
  uint8_t at(int t, int h, int w) const {
    return v[(size_t(t) * size_t(H) + size_t(h)) * size_t(W) + size_t(w)];
  }
  double frame_fraction(int t) const;
};

struct SynthResult {
  ImageCube cube;       // with clouds
  ImageCube clean;      // same scene, cloud-free
  CloudMaskCube masks;  // per-pixel cloud/shadow union
};

SynthResult synth_sequence(const SynthConfig& cfg);

// Mean Pearson correlation between consecutive frames over clear pixels,
// averaged over bands. The generator is expected to stay above 0.9.
double clear_sky_correlation(const ImageCube& cube, const CloudMaskCube& masks);

}  // namespace tec

#endif  // TEC_SYNTH_HPP_
