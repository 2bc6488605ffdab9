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

#include "tec/tokens.hpp"

namespace tec::tokens {

int block_count(int hl, int wl) {
  TEC_CHECK(hl > 0 && wl > 0 && hl % kBlockSide == 0 && wl % kBlockSide == 0,
            "latent grid must split into 4x4 blocks");
  return (hl / kBlockSide) * (wl / kBlockSide);
}

int reflect_index(int i, int n) {
  TEC_CHECK(n > 1, "cannot reflect a length-1 axis");
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

namespace {
int64_t lat_idx(int c, int h, int w, int hl, int wl) {
  return (int64_t(c) * hl + h) * wl + w;
}
}  // namespace

std::vector<int64_t> current_map(int M, int hl, int wl) {
  const int B = block_count(hl, wl);
  const int bw = wl / kBlockSide;
  std::vector<int64_t> idx(size_t(B) * kTokensPerBlock * size_t(M));
  size_t o = 0;
  for (int b = 0; b < B; ++b) {
    const int bh0 = (b / bw) * kBlockSide, bw0 = (b % bw) * kBlockSide;
    for (int t = 0; t < kTokensPerBlock; ++t) {
      const int h = bh0 + t / kBlockSide, w = bw0 + t % kBlockSide;
      for (int c = 0; c < M; ++c) idx[o++] = lat_idx(c, h, w, hl, wl);
    }
  }
  return idx;
}

std::vector<int64_t> current_inverse_map(int M, int hl, int wl) {
  const std::vector<int64_t> fwd = current_map(M, hl, wl);
  std::vector<int64_t> inv(fwd.size());
  for (size_t i = 0; i < fwd.size(); ++i) inv[size_t(fwd[i])] = int64_t(i);
  return inv;
}

std::vector<int64_t> past_map(int M, int hl, int wl) {
  const int B = block_count(hl, wl);
  const int bw = wl / kBlockSide;
  std::vector<int64_t> idx(size_t(B) * kPastTokens * size_t(M));
  size_t o = 0;
  for (int b = 0; b < B; ++b) {
    const int bh0 = (b / bw) * kBlockSide, bw0 = (b % bw) * kBlockSide;
    for (int t = 0; t < kPastTokens; ++t) {
      const int h = reflect_index(bh0 - 2 + t / kPastSide, hl);
      const int w = reflect_index(bw0 - 2 + t % kPastSide, wl);
      for (int c = 0; c < M; ++c) idx[o++] = lat_idx(c, h, w, hl, wl);
    }
  }
  return idx;
}

std::vector<int64_t> repack_map(int M, int hl, int wl) {
  TEC_CHECK(M % kTokensPerBlock == 0, "latent channels must divide into 16 tokens");
  const int k = M / kTokensPerBlock;
  const int B = block_count(hl, wl);
  const int bw = wl / kBlockSide;
  std::vector<int64_t> idx(size_t(B) * kTokensPerBlock * size_t(M));
  size_t o = 0;
  for (int b = 0; b < B; ++b) {
    const int bh0 = (b / bw) * kBlockSide, bw0 = (b % bw) * kBlockSide;
    for (int u = 0; u < kTokensPerBlock; ++u) {
      for (int p = 0; p < kTokensPerBlock; ++p) {
        const int h = bh0 + p / kBlockSide, w = bw0 + p % kBlockSide;
        for (int cc = 0; cc < k; ++cc) idx[o++] = lat_idx(u * k + cc, h, w, hl, wl);
      }
    }
  }
  return idx;
}

std::vector<int64_t> repack_inverse_map(int M, int hl, int wl) {
  const std::vector<int64_t> fwd = repack_map(M, hl, wl);
  std::vector<int64_t> inv(fwd.size());
  for (size_t i = 0; i < fwd.size(); ++i) inv[size_t(fwd[i])] = int64_t(i);
  return inv;
}

std::vector<int64_t> channel_slice_map(int C, int h, int w, int c0, int c1) {
  TEC_CHECK(0 <= c0 && c0 < c1 && c1 <= C, "bad channel slice");
  std::vector<int64_t> idx(size_t(c1 - c0) * size_t(h) * size_t(w));
  size_t o = 0;
  for (int c = c0; c < c1; ++c)
    for (int64_t p = 0; p < int64_t(h) * w; ++p) idx[o++] = int64_t(c) * h * w + p;
  return idx;
}

std::vector<int64_t> shift_map(int B, int T, int D) {
  std::vector<int64_t> idx(size_t(B) * size_t(T) * size_t(D));
  size_t o = 0;
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < T; ++t)
      for (int d = 0; d < D; ++d) idx[o++] = (int64_t(b) * (T + 1) + t) * D + d;
  return idx;
}

}  // namespace tec::tokens
