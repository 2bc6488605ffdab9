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

#ifndef TEC_MODEL_HPP_
#define TEC_MODEL_HPP_

#include <cstdint>

#include "tec/elic.hpp"
#include "tec/entropy.hpp"
#include "tec/flexrate.hpp"
#include "tec/image.hpp"
#include "tec/temporal.hpp"
#include "tec/transforms.hpp"

namespace tec {

// Everything one codec needs: configuration, parameters, and the per-band
// standardization statistics frozen at training time. Parameter
// registration order is fixed by build_model so checkpoints can restore by
// flat offset.
struct Model {
  CodecConfig cfg;
  TTConfig tt;                        // temporal families only
  GroupSpec groups;                   // elic only
  FactorizedDensity yd{"yd", 0};      // factorized-prior latent density
  FactorizedDensity zd{"zd", 0};      // elic hyper-latent density
  ParamStore<float> ps;
  BandStats stats;
  uint64_t seed = 0;

  bool has_stats() const { return !stats.mean.empty(); }
};

// Builds a freshly initialized model. The tt argument is ignored for the
// per-frame families. Registration order: transforms, densities, context
// nets, transformer, budget mask.
Model build_model(const CodecConfig& cfg, const TTConfig& tt, uint64_t seed);
Model build_model(const CodecConfig& cfg, uint64_t seed);

}  // namespace tec

#endif  // TEC_MODEL_HPP_
