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

#ifndef TEC_FLEXRATE_HPP_
#define TEC_FLEXRATE_HPP_

#include <vector>

#include "tec/tape.hpp"
#include "tec/tokens.hpp"

// Flexible-rate coding over repacked tokens. Repacking turns each 4x4 latent
// block into 16 tokens that each carry a channel slice of the whole block,
// so transmitting only the first K tokens still covers every pixel. Tokens
// past the budget are replaced by a learned mask vector during training and
// by the same vector or the prior mean during decoding.
namespace tec::flex {

template <typename S>
void add_flex_params(ParamStore<S>& ps, Rng& rng, int d_lat) {
  Tensor<S> m({d_lat});
  for (int i = 0; i < d_lat; ++i) m[i] = S(rng.uniform(-1.0, 1.0));
  ps.add("flex.mask", std::move(m), 0);
}

// Token budgets are drawn with probability proportional to k so larger
// budgets, which dominate reconstruction quality, are seen more often:
// Pr(K = k) = 2k / (T (T + 1)).
inline double budget_prob(int k, int T) {
  return 2.0 * double(k) / (double(T) * double(T + 1));
}

inline int sample_budget(Rng& rng, int T) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int k = 1; k < T; ++k) {
    acc += budget_prob(k, T);
    if (u < acc) return k;
  }
  return T;
}

// Loss for one budget draw: the kept-token rate is scaled by T/K so every
// budget level sees the same rate pressure per transmitted token.
inline double flex_scale(int T, int K) { return double(T) / double(K); }
inline double flex_loss(double rate, double dist, double lambda, int T, int K) {
  return flex_scale(T, K) * rate + lambda * dist;
}

// Elementwise mask over repacked tokens [B*16, d_lat]: rows with block-local
// index < K are 1 (kept), the rest 0.
template <typename S>
Tensor<S> keep_mask(int B, int K, int d_lat) {
  const int T = tokens::kTokensPerBlock;
  Tensor<S> m({B * T, d_lat});
  for (int r = 0; r < B * T; ++r) {
    const S v = S((r % T) < K ? 1 : 0);
    for (int j = 0; j < d_lat; ++j) m.at(r, j) = v;
  }
  return m;
}

template <typename S>
Tensor<S> drop_mask(int B, int K, int d_lat) {
  Tensor<S> m = keep_mask<S>(B, K, d_lat);
  for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = S(1) - m[i];
  return m;
}

// Replace every token at or past the budget with the learned mask vector.
// Differentiable in both the kept tokens and the mask parameter.
template <class Ctx>
typename Ctx::V apply_budget(Ctx& c, typename Ctx::V y_rep, int B, int K, int d_lat) {
  using S = float;
  if (K >= tokens::kTokensPerBlock) return y_rep;
  auto kept = c.mul_mask(y_rep, keep_mask<S>(B, K, d_lat));
  auto fill = c.mul_mask(c.tile_rows(c.param("flex.mask"), B * tokens::kTokensPerBlock),
                         drop_mask<S>(B, K, d_lat));
  return c.add(kept, fill);
}

}  // namespace tec::flex

#endif  // TEC_FLEXRATE_HPP_
