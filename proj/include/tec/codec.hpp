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

#ifndef TEC_CODEC_HPP_
#define TEC_CODEC_HPP_

#include <cstdint>
#include <vector>

#include "tec/container.hpp"
#include "tec/model.hpp"

// Value-level encoding and decoding. Latents are quantized by rounding half
// away from zero and saturated to the coder alphabet; every prior is
// computed from exactly the values the decoder will have at that point, so
// streams decode bit for bit.
namespace tec {

struct EncodeOptions {
  int budget = tokens::kTokensPerBlock;  // kept tokens per block (flex)
  int context_cap = 2;                   // max past frames (temporal)
  bool mask_fill = false;                // fill dropped tokens with the mask vector
  uint8_t lambda_preset = 255;
};

struct EncodeStats {
  std::vector<double> frame_est_bits;  // model estimate, snapped priors
  std::vector<size_t> frame_bytes;     // actual payload sizes

  double estimated_bits() const {
    double s = 0;
    for (double b : frame_est_bits) s += b;
    return s;
  }
  size_t total_bytes() const {
    size_t s = 0;
    for (size_t b : frame_bytes) s += b;
    return s;
  }
};

// Round half away from zero, saturated to the coder alphabet.
Tensor<float> quantize_latent(const Tensor<float>& y);

// Whole-cube entry points. The model must carry band statistics.
TecbFile encode_cube(const Model& m, const ImageCube& cube, const EncodeOptions& opt = {},
                     EncodeStats* stats = nullptr);
ImageCube decode_cube(const Model& m, const TecbFile& file);

// Per-frame latent coding, exposed for round-trip verification. All latent
// tensors are [1,M,hl,wl] (or [1,n_hyper,...] for z) holding integers.
std::vector<uint8_t> fp_encode_latent(const Model& m, const Tensor<float>& yhat,
                                      double* est_bits = nullptr);
Tensor<float> fp_decode_latent(const Model& m, int hl, int wl,
                               const std::vector<uint8_t>& payload);

std::vector<uint8_t> elic_encode_latent(const Model& m, const Tensor<float>& yhat,
                                        const Tensor<float>& zhat, double* est_bits = nullptr);
void elic_decode_latent(const Model& m, int hl, int wl, const std::vector<uint8_t>& payload,
                        Tensor<float>* yhat, Tensor<float>* zhat);

// Temporal frames. past0 is the older context frame; pass n_ctx = 0 for the
// learned dummy context and n_ctx = 1 to duplicate past1.
std::vector<uint8_t> tt_encode_latent(const Model& m, const Tensor<float>& yhat,
                                      const Tensor<float>* past0, const Tensor<float>* past1,
                                      int n_ctx, double* est_bits = nullptr);
Tensor<float> tt_decode_latent(const Model& m, int hl, int wl, const Tensor<float>* past0,
                               const Tensor<float>* past1, int n_ctx,
                               const std::vector<uint8_t>& payload);

// Budgeted frames code the first K repacked tokens and fill the rest with
// the prior mean (or the mask vector). Returns the payload and writes the
// filled latent the decoder will reconstruct, which the encoder feeds back
// as context for the next frame.
std::vector<uint8_t> flex_encode_latent(const Model& m, const Tensor<float>& yhat,
                                        const Tensor<float>* past0, const Tensor<float>* past1,
                                        int n_ctx, int K, bool mask_fill, Tensor<float>* filled,
                                        double* est_bits = nullptr);
Tensor<float> flex_decode_latent(const Model& m, int hl, int wl, const Tensor<float>* past0,
                                 const Tensor<float>* past1, int n_ctx, int K, bool mask_fill,
                                 const std::vector<uint8_t>& payload);

// Shared helpers for the temporal families.
Tensor<float> past_windows(const Tensor<float>& yhat);  // [1,M,hl,wl] -> [B*64,M]
Tensor<float> temporal_context(const Model& m, const Tensor<float>* past0,
                               const Tensor<float>* past1, int n_ctx, int B);
Tensor<float> latent_sigma(const Model& m, const Tensor<float>& sraw);

// Per-frame analysis/synthesis on standardized frames.
Tensor<float> analysis_frame(const Model& m, const Tensor<float>& x);
Tensor<float> synthesis_frame(const Model& m, const Tensor<float>& yhat);

}  // namespace tec

#endif  // TEC_CODEC_HPP_
