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

#ifndef TEC_INPAINT_HPP_
#define TEC_INPAINT_HPP_

#include <vector>

#include "tec/codec.hpp"
#include "tec/synth.hpp"

// Cloud inpainting with the temporal prior: tokens of the target frame that
// the cloud mask touches are replaced by the transformer's prediction,
// conditioned on the two least-cloudy context frames and, token order
// permitting, the clear tokens of the target frame itself.
namespace tec {

enum class InpaintMode {
  kInterleave,  // clear tokens stay observed and condition later predictions
  kPropagate,   // per block, everything after its first cloudy token is predicted
  kForecast,    // every token predicted from context alone
};

struct InpaintOptions {
  InpaintMode mode = InpaintMode::kInterleave;
  double tau = 0.0;    // token is cloudy when its cloud fraction exceeds tau
  bool sample = false; // draw from the predictive distribution instead of its mean
  uint64_t seed = 0;
};

// Fraction of cloud-marked pixels under each latent cell (16x16 footprint).
// Returns [hl*wl] in row-major latent order.
std::vector<double> pool_mask(const CloudMaskCube& masks, int t, int hl, int wl);

// Context frame selection: the two least-cloudy frames other than `target`
// (ties break toward the earlier index), returned in time order. If fewer
// than two candidates are less than half cloudy, the best one is
// duplicated. Empty when the sequence has no other frame.
std::vector<int> reorder_context(const CloudMaskCube& masks, int target);

// Replaces cloud-covered tokens of the target frame and synthesizes the
// result. Returns a single-frame cube.
ImageCube inpaint_frame(const Model& m, const ImageCube& cube, const CloudMaskCube& masks,
                        int target, const InpaintOptions& opt = {});

// Baseline: per-pixel copy from the least-cloudy other frame inside the
// cloud-marked region; clear pixels stay observed.
ImageCube copy_least_cloudy(const ImageCube& cube, const CloudMaskCube& masks, int target);

}  // namespace tec

#endif  // TEC_INPAINT_HPP_
