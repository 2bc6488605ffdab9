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

#include "tec/model.hpp"

namespace tec {

Model build_model(const CodecConfig& cfg, const TTConfig& tt, uint64_t seed) {
  cfg.validate();
  Model m;
  m.cfg = cfg;
  m.seed = seed;
  Rng rng(seed);
  transforms::add_transform_params(m.ps, rng, cfg);
  if (cfg.family == Family::kFactorized) {
    m.yd = FactorizedDensity{"yd", cfg.M};
    m.yd.add_params(m.ps, rng);
  }
  if (cfg.family == Family::kElic) {
    m.zd = FactorizedDensity{"zd", cfg.n_hyper()};
    m.zd.add_params(m.ps, rng);
    m.groups = groups_for_channels(cfg.M);
    elic::add_context_params(m.ps, rng, cfg, m.groups);
  }
  if (cfg.temporal()) {
    m.tt = tt;
    m.tt.d_lat = cfg.M;
    temporal::add_tt_params(m.ps, rng, m.tt);
  }
  if (cfg.family == Family::kFlex) flex::add_flex_params(m.ps, rng, cfg.M);
  return m;
}

Model build_model(const CodecConfig& cfg, uint64_t seed) {
  return build_model(cfg, desk_tt_config(cfg.M), seed);
}

}  // namespace tec
