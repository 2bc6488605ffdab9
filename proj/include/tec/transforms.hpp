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

#ifndef TEC_TRANSFORMS_HPP_
#define TEC_TRANSFORMS_HPP_

#include "tec/container.hpp"
#include "tec/nets.hpp"

// Analysis/synthesis stacks. Both directions downsample/upsample by exactly
// 16x over four stages. The factorized family uses the plain conv+GDN stack;
// every other family uses the residual backbone. The hyperprior pair exists
// only for the space-channel-context family.
namespace tec {

struct CodecConfig {
  Family family = Family::kFactorized;
  int in_channels = 12;
  int N = 32;  // backbone width
  int M = 32;  // latent channels (d_lat)

  bool residual_backbone() const { return family != Family::kFactorized; }
  bool has_hyperprior() const { return family == Family::kElic; }
  bool temporal() const { return family == Family::kTemporal || family == Family::kFlex; }
  int n_hyper() const { return M / 2; }

  void validate() const {
    TEC_CHECK(in_channels > 0 && N > 0 && M > 0, "codec config axes must be positive");
    if (has_hyperprior()) TEC_CHECK(M % 2 == 0, "latent channels must be even with a hyperprior");
    if (temporal()) TEC_CHECK(M % 16 == 0, "latent channels must divide into 16 tokens");
  }
};

// Desk-scale defaults, trainable on a CPU; the "paper" preset mirrors the
// published channel table at lambda=10.
inline CodecConfig desk_codec_config(Family f) {
  CodecConfig c;
  c.family = f;
  return c;
}

inline CodecConfig paper_codec_config(Family f) {
  CodecConfig c;
  c.family = f;
  c.N = 128;
  c.M = f == Family::kFactorized ? 128 : 192;
  return c;
}

namespace transforms {

inline constexpr int kDownFactor = 16;

// ---- registration ---------------------------------------------------------

template <typename S>
void add_residual_block(ParamStore<S>& ps, Rng& rng, const std::string& name, int C) {
  const int mid = std::max(C / 2, 1);
  nets::add_conv(ps, rng, name + ".c0", mid, C, 1);
  nets::add_conv(ps, rng, name + ".c1", mid, mid, 3);
  nets::add_conv(ps, rng, name + ".c2", C, mid, 1);
}

template <typename S>
void add_transform_params(ParamStore<S>& ps, Rng& rng, const CodecConfig& cfg) {
  cfg.validate();
  const int C = cfg.in_channels, N = cfg.N, M = cfg.M;
  const int a_in[4] = {C, N, N, N}, a_out[4] = {N, N, N, M};
  if (!cfg.residual_backbone()) {
    for (int s = 0; s < 4; ++s) {
      nets::add_conv(ps, rng, "ga.c" + std::to_string(s), a_out[s], a_in[s], 5);
      if (s < 3) nets::add_gdn(ps, "ga.gdn" + std::to_string(s), a_out[s]);
    }
    const int s_in[4] = {M, N, N, N}, s_out[4] = {N, N, N, C};
    for (int s = 0; s < 4; ++s) {
      nets::add_tconv(ps, rng, "gs.c" + std::to_string(s), s_in[s], s_out[s], 5);
      if (s < 3) nets::add_gdn(ps, "gs.gdn" + std::to_string(s), s_out[s]);
    }
  } else {
    for (int s = 0; s < 4; ++s) {
      const std::string nm = "ga.s" + std::to_string(s);
      nets::add_conv(ps, rng, nm + ".down", a_out[s], a_in[s], 5);
      add_residual_block(ps, rng, nm + ".rb", a_out[s]);
    }
    const int s_in[4] = {M, N, N, N}, s_out[4] = {N, N, N, C};
    for (int s = 0; s < 4; ++s) {
      const std::string nm = "gs.s" + std::to_string(s);
      add_residual_block(ps, rng, nm + ".rb", s_in[s]);
      nets::add_tconv(ps, rng, nm + ".up", s_in[s], s_out[s], 5);
    }
  }
  if (cfg.has_hyperprior()) {
    const int Nh = cfg.n_hyper();
    nets::add_conv(ps, rng, "ha.c0", Nh, M, 3);
    nets::add_conv(ps, rng, "ha.c1", Nh, Nh, 3);
    nets::add_tconv(ps, rng, "hs.c0", Nh, Nh, 3);
    nets::add_tconv(ps, rng, "hs.c1", Nh, M, 3);
  }
}

// ---- forward ---------------------------------------------------------------

// 1x1 -> GELU -> 3x3 -> GELU -> 1x1, plus the skip.
template <class Ctx>
typename Ctx::V residual_block(Ctx& c, typename Ctx::V x, const std::string& name) {
  auto h = c.gelu(nets::conv(c, x, name + ".c0", 1, 0));
  h = c.gelu(nets::conv(c, h, name + ".c1", 1, 1));
  h = nets::conv(c, h, name + ".c2", 1, 0);
  return c.add(x, h);
}

template <class Ctx>
typename Ctx::V analysis(Ctx& c, typename Ctx::V x, const CodecConfig& cfg) {
  const auto& shape = c.value(x).shape();
  TEC_CHECK(shape.size() == 4 && shape[1] == cfg.in_channels, "analysis: bad input shape");
  TEC_CHECK(shape[2] % kDownFactor == 0 && shape[3] % kDownFactor == 0,
            "analysis: H and W must be multiples of 16");
  if (!cfg.residual_backbone()) {
    for (int s = 0; s < 4; ++s) {
      x = nets::conv(c, x, "ga.c" + std::to_string(s), 2, 2);
      if (s < 3) x = nets::gdn(c, x, "ga.gdn" + std::to_string(s), false);
    }
    return x;
  }
  for (int s = 0; s < 4; ++s) {
    const std::string nm = "ga.s" + std::to_string(s);
    x = nets::conv(c, x, nm + ".down", 2, 2);
    x = residual_block(c, x, nm + ".rb");
  }
  return x;
}

template <class Ctx>
typename Ctx::V synthesis(Ctx& c, typename Ctx::V y, const CodecConfig& cfg) {
  const auto& shape = c.value(y).shape();
  TEC_CHECK(shape.size() == 4 && shape[1] == cfg.M, "synthesis: bad latent shape");
  if (!cfg.residual_backbone()) {
    for (int s = 0; s < 4; ++s) {
      y = nets::tconv(c, y, "gs.c" + std::to_string(s), 2, 2, 1);
      if (s < 3) y = nets::gdn(c, y, "gs.gdn" + std::to_string(s), true);
    }
    return y;
  }
  for (int s = 0; s < 4; ++s) {
    const std::string nm = "gs.s" + std::to_string(s);
    y = residual_block(c, y, nm + ".rb");
    y = nets::tconv(c, y, nm + ".up", 2, 2, 1);
  }
  return y;
}

template <class Ctx>
typename Ctx::V hyper_analysis(Ctx& c, typename Ctx::V y, const CodecConfig& cfg) {
  TEC_CHECK(cfg.has_hyperprior(), "hyperprior unavailable for family " +
                                      std::string(family_name(cfg.family)));
  auto z = c.gelu(nets::conv(c, y, "ha.c0", 2, 1));
  return nets::conv(c, z, "ha.c1", 2, 1);
}

template <class Ctx>
typename Ctx::V hyper_synthesis(Ctx& c, typename Ctx::V z, const CodecConfig& cfg) {
  TEC_CHECK(cfg.has_hyperprior(), "hyperprior unavailable for family " +
                                      std::string(family_name(cfg.family)));
  auto f = c.gelu(nets::tconv(c, z, "hs.c0", 2, 1, 1));
  return nets::tconv(c, f, "hs.c1", 2, 1, 1);
}

}  // namespace transforms
}  // namespace tec

#endif  // TEC_TRANSFORMS_HPP_
