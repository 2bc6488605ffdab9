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

#ifndef TEC_ENTROPY_HPP_
#define TEC_ENTROPY_HPP_

#include <array>
#include <map>
#include <utility>

#include "tec/range_coder.hpp"
#include "tec/tape.hpp"

namespace tec {

// Deterministic scalar transcendentals: fixed-order series and continued
// fractions over plain +,-,*,/ and exact ldexp/frexp. Everything that feeds
// a frequency table goes through these rather than libm, so identical
// checkpoints yield identical tables on any IEEE-754 platform.
namespace detmath {
double det_exp(double x);
double det_log(double x);
double det_log1p(double x);
double det_tanh(double x);
double det_sigmoid(double x);
double det_softplus(double x);
double det_erf(double x);
// Standard normal CDF.
inline double det_phi(double z) { return 0.5 * (1.0 + det_erf(z * 0.70710678118654752440)); }
}  // namespace detmath

// Shared coding constants.
namespace ent {
constexpr double kSigmaMin = 0.11;
constexpr double kSigmaMax = 64.0;
constexpr int kSigmaLevels = 64;
constexpr double kTailMass = 1.0 / 65536.0;  // floors bits at 16 per sample
constexpr int kAlphabetMin = -255;
constexpr int kAlphabetMax = 256;
constexpr int kNumSymbols = kAlphabetMax - kAlphabetMin + 1;  // 512
constexpr int kMuGrid = 64;  // mu is snapped to 1/64 steps before coding
}  // namespace ent

// Rounding used at inference: nearest integer, ties away from zero.
template <typename S>
Tensor<S> quantize_infer(const Tensor<S>& y) {
  Tensor<S> q(y.shape());
  for (Eigen::Index i = 0; i < y.size(); ++i) q[i] = std::round(y[i]);
  return q;
}

inline int value_to_symbol(int v) {
  if (v < ent::kAlphabetMin || v > ent::kAlphabetMax)
    fail_data("latent value " + std::to_string(v) + " outside coder alphabet");
  return v - ent::kAlphabetMin;
}
inline int symbol_to_value(int s) { return s + ent::kAlphabetMin; }

// Log-spaced scale levels; priors are snapped to the nearest level before
// table construction so encoder and decoder quantize identically.
const std::array<double, ent::kSigmaLevels>& sigma_table();
int sigma_index(double sigma);
int32_t mu_quantize(double mu);

// Information content of one quantized sample under N(mu, sigma^2)
// integrated over the unit bin, with the scale floored at kSigmaMin and the
// probability floored at kTailMass.
double gaussian_bits(double yhat, double mu, double sigma);

// Entropy of the full discretized distribution over the alphabet.
double gaussian_alphabet_entropy(double mu, double sigma);

// Frequency table for the snapped prior (mu_q in 1/64 units, sigma level
// index). Every symbol keeps frequency >= 1.
CdfTable build_gaussian_cdf(int32_t mu_q, int sigma_idx);

// Draw from the discretized Gaussian by inverse CDF, for sampling-based
// checks and stochastic forecasting.
int sample_gaussian_symbol(double mu, double sigma, Rng& rng);

// ---- trainable factorized density ---------------------------------------
//
// One monotone scalar CDF per channel: four stacked affine stages with
// softplus-positive weights and tanh-bounded residual gates, closed by a
// sigmoid. Used as the prior for factorized latents and hyper-latents.
struct FactorizedDensity {
  std::string prefix;
  int channels = 0;

  template <typename S>
  void add_params(ParamStore<S>& ps, Rng& rng, int group = 1) const;

  // CDF at x for one channel, straight from stored parameters.
  double cdf(const ParamStore<float>& ps, int channel, double x) const;
  double bits(const ParamStore<float>& ps, int channel, double yhat) const;
  CdfTable build_cdf(const ParamStore<float>& ps, int channel) const;
};

// Conditional-Gaussian symbol coding with snapped priors. mu is quantized
// to the 1/64 grid and split into integer + fractional parts; the integer
// part recenters the symbol so the alphabet covers the prediction residual,
// and tables are cached on (mu fraction, sigma level). Encoder and decoder
// snap identically, which is what makes the streams portable.
class GaussianCoder {
 public:
  void encode(RangeEncoder& enc, int value, double mu, double sigma);
  int decode(RangeDecoder& dec, double mu, double sigma);
  // Estimated bits under the same snapped prior the real coder would use.
  double estimate_bits(int value, double mu, double sigma);

 private:
  struct Snapped {
    int mu_int;
    int mu_frac;  // in [0, kMuGrid)
    int sigma_idx;
  };
  Snapped snap(double mu, double sigma) const;
  const CdfTable& table(int mu_frac, int sigma_idx);

  std::map<std::pair<int, int>, CdfTable> cache_;
};

// Total bits of y under a per-channel factorized density, as a tape op.
// y: [N,C,H,W] with C == density.channels. weight (same shape, or empty for
// all-ones) multiplies each element's bits; gradients flow to y and to the
// density parameters bound through `bind`.
template <typename S>
Var<S> factorized_rate_bits(Tape<S>& t, Var<S> y, const FactorizedDensity& density,
                            Binding<S>& bind, Tensor<S> weight = {});

// Total bits of y under elementwise Gaussians, as a tape op. All four
// tensors share a shape; empty weight means all ones. per_element_bits, if
// given, receives the forward per-sample bits (no gradient).
template <typename S>
Var<S> gaussian_rate_bits(Tape<S>& t, Var<S> y, Var<S> mu, Var<S> sigma, Tensor<S> weight = {},
                          Tensor<S>* per_element_bits = nullptr);

}  // namespace tec

#endif  // TEC_ENTROPY_HPP_
