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

#ifndef TEC_ELIC_HPP_
#define TEC_ELIC_HPP_

#include "tec/entropy.hpp"
#include "tec/nets.hpp"
#include "tec/tokens.hpp"
#include "tec/transforms.hpp"

// Space-channel context prior: latent channels split into groups coded
// sequentially; within a group, checkerboard anchors ((h+w) even) are coded
// from hyper features and earlier groups, then the other parity additionally
// sees the decoded anchors through a 3x3 conv. Training, encoding, and
// decoding all evaluate the same two passes.
namespace tec {

struct GroupSpec {
  std::vector<int> sizes;

  int count() const { return int(sizes.size()); }
  int offset(int g) const {
    int o = 0;
    for (int i = 0; i < g; ++i) o += sizes[size_t(i)];
    return o;
  }
  void validate(int M) const {
    TEC_CHECK(!sizes.empty(), "empty channel group list");
    int sum = 0;
    for (int s : sizes) {
      TEC_CHECK(s > 0, "channel group sizes must be positive");
      sum += s;
    }
    TEC_CHECK(sum == M, "channel groups must cover all latent channels");
  }
};

// The published table [16,16,32,64,M-128] when it fits, otherwise the same
// doubling shape scaled down to M.
inline GroupSpec groups_for_channels(int M) {
  GroupSpec g;
  if (M >= 160) {
    g.sizes = {16, 16, 32, 64, M - 128};
  } else {
    TEC_CHECK(M % 8 == 0, "latent channels must be divisible by 8 for grouped coding");
    g.sizes = {M / 8, M / 8, M / 4, M / 2};
  }
  return g;
}

namespace elic {

// Checkerboard mask over [1,C,H,W]; parity 0 marks anchors ((h+w) even).
template <typename S>
Tensor<S> parity_mask(int C, int h, int w, int parity) {
  Tensor<S> m({1, C, h, w});
  for (int c = 0; c < C; ++c)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j)
        m.at(0, c, i, j) = S((i + j) % 2 == parity ? 1 : 0);
  return m;
}

template <typename S>
void add_context_params(ParamStore<S>& ps, Rng& rng, const CodecConfig& cfg,
                        const GroupSpec& groups) {
  groups.validate(cfg.M);
  const int hidden = 2 * cfg.M;
  for (int g = 0; g < groups.count(); ++g) {
    const std::string nm = "ectx.g" + std::to_string(g);
    const int size = groups.sizes[size_t(g)];
    nets::add_conv(ps, rng, nm + ".sp", 2 * size, size, 3);
    const int in = cfg.M + groups.offset(g) + 2 * size;
    nets::add_conv(ps, rng, nm + ".p0", hidden, in, 1);
    nets::add_conv(ps, rng, nm + ".mu", size, hidden, 1);
    nets::add_conv(ps, rng, nm + ".sg", size, hidden, 1);
  }
}

// One parity pass for one group. spatial is the anchor-masked group latent
// for the non-anchor pass, or empty for the anchor pass (anchors see exact
// zeros, not a conv of zeros, so the bias cannot leak).
template <class Ctx>
std::pair<typename Ctx::V, typename Ctx::V> group_pass(
    Ctx& c, int g, typename Ctx::V hyper, const std::vector<typename Ctx::V>& prev_groups,
    typename Ctx::V spatial_in, bool have_spatial, int size, int h, int w) {
  using S = float;
  const std::string nm = "ectx.g" + std::to_string(g);
  std::vector<typename Ctx::V> feats;
  feats.push_back(hyper);
  for (const auto& p : prev_groups) feats.push_back(p);
  if (have_spatial) {
    feats.push_back(nets::conv(c, spatial_in, nm + ".sp", 1, 1));
  } else {
    feats.push_back(c.constant(Tensor<S>({1, 2 * size, h, w})));
  }
  auto hid = c.gelu(nets::conv(c, c.concat_channels(feats), nm + ".p0", 1, 0));
  auto mu = nets::conv(c, hid, nm + ".mu", 1, 0);
  auto sg = nets::conv(c, hid, nm + ".sg", 1, 0);
  return {mu, sg};
}

// Full two-pass prior for group g given the group's own latent (used for
// the anchor-masked spatial context) plus everything decoded before it.
// Returns (mu, sigma_raw) assembled across parities.
template <class Ctx>
std::pair<typename Ctx::V, typename Ctx::V> group_priors(
    Ctx& c, int g, typename Ctx::V hyper, const std::vector<typename Ctx::V>& prev_groups,
    typename Ctx::V y_group, int size, int h, int w) {
  using S = float;
  const Tensor<S> anchors = parity_mask<S>(size, h, w, 0);
  const Tensor<S> others = parity_mask<S>(size, h, w, 1);

  auto [mu_a, sg_a] =
      group_pass(c, g, hyper, prev_groups, y_group, /*have_spatial=*/false, size, h, w);
  auto masked = c.mul_mask(y_group, anchors);
  auto [mu_n, sg_n] = group_pass(c, g, hyper, prev_groups, masked, true, size, h, w);

  auto mu = c.add(c.mul_mask(mu_a, anchors), c.mul_mask(mu_n, others));
  auto sg = c.add(c.mul_mask(sg_a, anchors), c.mul_mask(sg_n, others));
  return {mu, sg};
}

template <class Ctx>
typename Ctx::V slice_group(Ctx& c, typename Ctx::V y, const GroupSpec& groups, int g, int M,
                            int h, int w) {
  const int c0 = groups.offset(g), c1 = c0 + groups.sizes[size_t(g)];
  return c.gather(y, {1, c1 - c0, h, w}, tokens::channel_slice_map(M, h, w, c0, c1));
}

}  // namespace elic
}  // namespace tec

#endif  // TEC_ELIC_HPP_
