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

#include <doctest.h>

#include "tec/ops.hpp"
#include "tec/tokens.hpp"

using namespace tec;

namespace {

Tensor<float> numbered(std::vector<int> shape) {
  Tensor<float> t(std::move(shape));
  for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = float(i);
  return t;
}

Tensor<float> apply_map(const Tensor<float>& x, std::vector<int> shape,
                        const std::vector<int64_t>& idx) {
  EvalCtx<float> c{nullptr};
  return c.gather(x, std::move(shape), idx);
}

}  // namespace

TEST_CASE("reflect_index mirrors without repeating the edge") {
  CHECK(tokens::reflect_index(0, 5) == 0);
  CHECK(tokens::reflect_index(4, 5) == 4);
  CHECK(tokens::reflect_index(-1, 5) == 1);
  CHECK(tokens::reflect_index(-2, 5) == 2);
  CHECK(tokens::reflect_index(5, 5) == 3);
  CHECK(tokens::reflect_index(6, 5) == 2);
  CHECK(tokens::reflect_index(-5, 4) == 1);  // multiple bounces
  CHECK(tokens::reflect_index(9, 4) == 3);
}

TEST_CASE("current tokens enumerate each block in raster order") {
  const int M = 3, hl = 4, wl = 8;  // two blocks side by side
  const Tensor<float> x = numbered({1, M, hl, wl});
  const Tensor<float> tok = apply_map(x, {2 * 16, M}, tokens::current_map(M, hl, wl));
  for (int b = 0; b < 2; ++b)
    for (int t = 0; t < 16; ++t)
      for (int c = 0; c < M; ++c) {
        const int h = t / 4, w = (b == 0 ? 0 : 4) + t % 4;
        CHECK(tok.at(b * 16 + t, c) == x.at(0, c, h, w));
      }

  const Tensor<float> back = apply_map(tok, {1, M, hl, wl}, tokens::current_inverse_map(M, hl, wl));
  for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(back[i] == x[i]);
}

TEST_CASE("past windows cover the reflected 8x8 neighborhood") {
  const int M = 2, hl = 4, wl = 4;
  const Tensor<float> x = numbered({1, M, hl, wl});
  const Tensor<float> win = apply_map(x, {64, M}, tokens::past_map(M, hl, wl));
  for (int t = 0; t < 64; ++t) {
    const int h = tokens::reflect_index(-2 + t / 8, hl);
    const int w = tokens::reflect_index(-2 + t % 8, wl);
    for (int c = 0; c < M; ++c) CHECK(win.at(t, c) == x.at(0, c, h, w));
  }
}

TEST_CASE("repacked tokens slice channels and invert exactly") {
  const int M = 32, hl = 8, wl = 4;  // two stacked blocks
  const int k = M / 16;
  const Tensor<float> x = numbered({1, M, hl, wl});
  const Tensor<float> rep = apply_map(x, {2 * 16, M}, tokens::repack_map(M, hl, wl));

  // Token u of block b carries channels [u*k, (u+1)*k): dim j = p*k + cc maps
  // to channel u*k+cc at block position p.
  for (int b = 0; b < 2; ++b)
    for (int u = 0; u < 16; ++u)
      for (int p = 0; p < 16; ++p)
        for (int cc = 0; cc < k; ++cc) {
          const int h = (b == 0 ? 0 : 4) + p / 4, w = p % 4;
          CHECK(rep.at(b * 16 + u, p * k + cc) == x.at(0, u * k + cc, h, w));
        }

  const Tensor<float> back = apply_map(rep, {1, M, hl, wl}, tokens::repack_inverse_map(M, hl, wl));
  for (Eigen::Index i = 0; i < x.size(); ++i) CHECK(back[i] == x[i]);
}

TEST_CASE("keeping the first K repacked tokens keeps a channel slice") {
  const int M = 32, hl = 4, wl = 4, K = 5;
  const int k = M / 16;
  Rng rng(11);
  Tensor<float> x({1, M, hl, wl});
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = float(rng.uniform(-4, 4));

  Tensor<float> rep = apply_map(x, {16, M}, tokens::repack_map(M, hl, wl));
  for (int u = K; u < 16; ++u)
    for (int j = 0; j < M; ++j) rep.at(u, j) = 0;
  const Tensor<float> back = apply_map(rep, {1, M, hl, wl}, tokens::repack_inverse_map(M, hl, wl));

  for (int c = 0; c < M; ++c)
    for (int h = 0; h < hl; ++h)
      for (int w = 0; w < wl; ++w)
        CHECK(back.at(0, c, h, w) == (c < K * k ? x.at(0, c, h, w) : 0.0f));
}

TEST_CASE("shift map prepends the start row and drops each block's last row") {
  const int B = 2, T = 4, D = 3;
  const Tensor<float> cat = numbered({B * (T + 1), D});
  const Tensor<float> out = apply_map(cat, {B * T, D}, tokens::shift_map(B, T, D));
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < T; ++t)
      for (int d = 0; d < D; ++d) CHECK(out.at(b * T + t, d) == cat.at(b * (T + 1) + t, d));
}

TEST_CASE("channel slice map extracts a contiguous band range") {
  const int C = 6, h = 3, w = 5;
  const Tensor<float> x = numbered({1, C, h, w});
  const Tensor<float> s = apply_map(x, {1, 3, h, w}, tokens::channel_slice_map(C, h, w, 2, 5));
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) CHECK(s.at(0, c, i, j) == x.at(0, c + 2, i, j));
}

TEST_CASE("block_count enforces divisibility") {
  CHECK(tokens::block_count(4, 8) == 2);
  CHECK(tokens::block_count(8, 8) == 4);
  CHECK_THROWS_AS(tokens::block_count(6, 8), Error);
}
