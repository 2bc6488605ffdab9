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

#ifndef TEC_METRICS_HPP_
#define TEC_METRICS_HPP_

#include <string>
#include <vector>

#include "tec/container.hpp"
#include "tec/image.hpp"

// Reconstruction quality metrics. Every metric is computed per band across
// the whole sequence and then averaged over bands; PSNR of an exact
// reconstruction is +infinity and prints as "inf".
namespace tec {

enum class PsnrPeak {
  k65535,  // full uint16 range
  k10000,  // reflectance convention
  kAuto,   // per-band min..max spread of the reference
};

PsnrPeak psnr_peak_from_name(const std::string& s);
const char* psnr_peak_name(PsnrPeak p);

double psnr(const ImageCube& ref, const ImageCube& test, PsnrPeak mode = PsnrPeak::k65535);

// PSNR restricted to pixels where region.at(t,h,w) != 0, shared across
// bands. The peak follows the same mode rules on the full reference.
struct RegionMask {
  int T = 0, H = 0, W = 0;
  std::vector<uint8_t> v;
  uint8_t at(int t, int h, int w) const {
    return v[(size_t(t) * size_t(H) + size_t(h)) * size_t(W) + size_t(w)];
  }
};
double psnr_region(const ImageCube& ref, const ImageCube& test, const RegionMask& region,
                   PsnrPeak mode = PsnrPeak::k65535);

// Single-scale structural similarity, 11x11 Gaussian window (sigma 1.5),
// K1 = 0.01, K2 = 0.03, L = 65535, valid-window averaging.
double ssim(const ImageCube& ref, const ImageCube& test);

// Multi-scale variant with the five standard level weights; levels that do
// not fit the 11-pixel window after downsampling are dropped and the
// remaining weights renormalized.
double ms_ssim(const ImageCube& ref, const ImageCube& test);

// Actual payload bits per pixel, band and frame.
double bppbf(const TecbFile& file);

// Formats a metric value, mapping +infinity to "inf".
std::string format_metric(double v);

struct RdRecord {
  std::string family;
  int budget = 16;
  double lambda = 0;
  double bppbf = 0;
  double psnr = 0;
  double ssim = 0;
  double msssim = 0;
  size_t bytes = 0;
};

std::string rd_csv(const std::vector<RdRecord>& records);
std::string rd_json(const std::vector<RdRecord>& records);

}  // namespace tec

#endif  // TEC_METRICS_HPP_
