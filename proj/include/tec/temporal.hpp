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

#ifndef TEC_TEMPORAL_HPP_
#define TEC_TEMPORAL_HPP_

#include <string>
#include <utility>

#include "tec/nets.hpp"
#include "tec/tokens.hpp"

// Temporal entropy transformer. Latent frames are split into 4x4 blocks of
// 16 tokens; up to two past frames contribute 8x8 windows of 64 context
// tokens each. A shared per-frame encoder stack, a joint stack over the
// concatenated windows, and a token-causal decoder with cross attention
// produce per-token Gaussian parameters for the current frame.
namespace tec {

struct TTConfig {
  int d_lat = 32;
  int d_tt = 128;
  int heads = 4;
  int sep_layers = 3;
  int joint_layers = 2;
  int dec_layers = 3;

  int mlp_hidden() const { return 4 * d_tt; }
  // Context token count per block for the given number of past frames.
  int ctx_len(int n_ctx) const { return n_ctx == 0 ? 1 : 2 * tokens::kPastTokens; }
  void validate() const {
    TEC_CHECK(d_lat > 0 && d_tt > 0, "transformer dims must be positive");
    TEC_CHECK(d_tt % heads == 0, "transformer width must divide into heads");
    TEC_CHECK(sep_layers > 0 && joint_layers > 0 && dec_layers > 0,
              "transformer stacks need at least one layer");
  }
};

inline TTConfig desk_tt_config(int d_lat) {
  TTConfig t;
  t.d_lat = d_lat;
  return t;
}

inline TTConfig paper_tt_config(int d_lat) {
  TTConfig t;
  t.d_lat = d_lat;
  t.d_tt = 768;
  t.heads = 16;
  t.sep_layers = 6;
  t.joint_layers = 4;
  t.dec_layers = 5;
  return t;
}

namespace temporal {

template <typename S>
Tensor<S> small_uniform(Rng& rng, std::vector<int> shape, double a) {
  Tensor<S> t(std::move(shape));
  for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = S(rng.uniform(-a, a));
  return t;
}

template <typename S>
void add_tt_params(ParamStore<S>& ps, Rng& rng, const TTConfig& tt) {
  tt.validate();
  const int d = tt.d_tt;
  nets::add_dense(ps, rng, "tt.emb_cur", d, tt.d_lat);
  nets::add_dense(ps, rng, "tt.emb_past", d, tt.d_lat);
  ps.add("tt.pos_cur", small_uniform<S>(rng, {tokens::kTokensPerBlock, d}, 0.02));
  ps.add("tt.pos_past", small_uniform<S>(rng, {tokens::kPastTokens, d}, 0.02));
  ps.add("tt.femb0", small_uniform<S>(rng, {1, d}, 0.02));
  ps.add("tt.femb1", small_uniform<S>(rng, {1, d}, 0.02));
  ps.add("tt.sos", small_uniform<S>(rng, {d}, 0.02));
  ps.add("tt.dummy", small_uniform<S>(rng, {d}, 0.02));
  for (int l = 0; l < tt.sep_layers; ++l) {
    const std::string nm = "tt.sep" + std::to_string(l);
    nets::add_lnorm(ps, nm + ".ln1", d);
    nets::add_mha(ps, rng, nm + ".att", d);
    nets::add_lnorm(ps, nm + ".ln2", d);
    nets::add_mlp(ps, rng, nm + ".mlp", d, tt.mlp_hidden());
  }
  for (int l = 0; l < tt.joint_layers; ++l) {
    const std::string nm = "tt.joint" + std::to_string(l);
    nets::add_lnorm(ps, nm + ".ln1", d);
    nets::add_mha(ps, rng, nm + ".att", d);
    nets::add_lnorm(ps, nm + ".ln2", d);
    nets::add_mlp(ps, rng, nm + ".mlp", d, tt.mlp_hidden());
  }
  nets::add_lnorm(ps, "tt.ctxln", d);
  for (int l = 0; l < tt.dec_layers; ++l) {
    const std::string nm = "tt.dec" + std::to_string(l);
    nets::add_lnorm(ps, nm + ".ln1", d);
    nets::add_mha(ps, rng, nm + ".att", d);
    nets::add_lnorm(ps, nm + ".lnx", d);
    nets::add_mha(ps, rng, nm + ".xatt", d);
    nets::add_lnorm(ps, nm + ".ln2", d);
    nets::add_mlp(ps, rng, nm + ".mlp", d, tt.mlp_hidden());
  }
  nets::add_lnorm(ps, "tt.decln", d);
  nets::add_dense(ps, rng, "tt.head0", d, d);
  nets::add_dense(ps, rng, "tt.head1", d, d);
  nets::add_dense(ps, rng, "tt.head2", 2 * tt.d_lat, d);
}

template <class Ctx>
typename Ctx::V self_block(Ctx& c, typename Ctx::V x, const std::string& nm, int B, int T,
                           int heads, bool causal) {
  auto h = nets::lnorm(c, x, nm + ".ln1");
  x = c.add(x, nets::mha(c, h, h, nm + ".att", B, T, T, heads, causal));
  x = c.add(x, nets::mlp(c, nets::lnorm(c, x, nm + ".ln2"), nm + ".mlp"));
  return x;
}

// One past window [B*64, d_lat] -> embedded tokens [B*64, d_tt] through the
// shared separate-frame stack. slot picks the frame embedding (0 = older).
template <class Ctx>
typename Ctx::V embed_past(Ctx& c, const TTConfig& tt, typename Ctx::V win, int slot, int B) {
  auto x = nets::dense(c, win, "tt.emb_past");
  x = c.add_rows_cycle(x, c.param("tt.pos_past"));
  x = c.add_rows_cycle(x, c.param(slot == 0 ? "tt.femb0" : "tt.femb1"));
  for (int l = 0; l < tt.sep_layers; ++l)
    x = self_block(c, x, "tt.sep" + std::to_string(l), B, tokens::kPastTokens, tt.heads, false);
  return x;
}

// Context from two past windows (the older frame first). Returns
// [B*128, d_tt]; pass the same window twice when only one frame exists.
template <class Ctx>
typename Ctx::V tt_context(Ctx& c, const TTConfig& tt, typename Ctx::V win_old,
                           typename Ctx::V win_new, int B) {
  auto x0 = embed_past(c, tt, win_old, 0, B);
  auto x1 = embed_past(c, tt, win_new, 1, B);
  auto x = c.concat_rows_blocks(x0, x1, B);
  const int T = 2 * tokens::kPastTokens;
  for (int l = 0; l < tt.joint_layers; ++l)
    x = self_block(c, x, "tt.joint" + std::to_string(l), B, T, tt.heads, false);
  return nets::lnorm(c, x, "tt.ctxln");
}

// Learned stand-in context for frames with no usable past: one token per
// block, bypassing the context stacks entirely.
template <class Ctx>
typename Ctx::V tt_dummy_context(Ctx& c, int B) {
  return c.tile_rows(c.param("tt.dummy"), B);
}

// Token-causal decode pass. y_tokens is [B*16, d_lat]; row t of the output
// depends only on rows < t (the start token covers t = 0), so sequential
// decoding can run this with zeros in not-yet-decoded rows and still match
// the teacher-forced pass bit for bit. Returns (mu, sigma_raw).
template <class Ctx>
std::pair<typename Ctx::V, typename Ctx::V> tt_priors(Ctx& c, const TTConfig& tt,
                                                      typename Ctx::V y_tokens,
                                                      typename Ctx::V ctx, int ctx_len, int B) {
  const int T = tokens::kTokensPerBlock;
  auto e = nets::dense(c, y_tokens, "tt.emb_cur");
  auto sos = c.tile_rows(c.param("tt.sos"), B);
  auto cat = c.concat_rows_blocks(sos, e, B);
  auto x = c.gather(cat, {B * T, tt.d_tt}, tokens::shift_map(B, T, tt.d_tt));
  x = c.add_rows_cycle(x, c.param("tt.pos_cur"));
  for (int l = 0; l < tt.dec_layers; ++l) {
    const std::string nm = "tt.dec" + std::to_string(l);
    auto h = nets::lnorm(c, x, nm + ".ln1");
    x = c.add(x, nets::mha(c, h, h, nm + ".att", B, T, T, tt.heads, true));
    auto hx = nets::lnorm(c, x, nm + ".lnx");
    x = c.add(x, nets::mha(c, hx, ctx, nm + ".xatt", B, T, ctx_len, tt.heads, false));
    x = c.add(x, nets::mlp(c, nets::lnorm(c, x, nm + ".ln2"), nm + ".mlp"));
  }
  x = nets::lnorm(c, x, "tt.decln");
  x = c.gelu(nets::dense(c, x, "tt.head0"));
  x = c.gelu(nets::dense(c, x, "tt.head1"));
  x = nets::dense(c, x, "tt.head2");
  auto mu = c.slice_cols(x, 0, tt.d_lat);
  auto sraw = c.slice_cols(x, tt.d_lat, 2 * tt.d_lat);
  return {mu, sraw};
}

}  // namespace temporal
}  // namespace tec

#endif  // TEC_TEMPORAL_HPP_
