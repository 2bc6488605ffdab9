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

#ifndef TEC_TOKENS_HPP_
#define TEC_TOKENS_HPP_

#include <cstdint>
#include <vector>

#include "tec/common.hpp"

// Index maps turning latent grids into transformer token rows and back.
// Every rearrangement is a gather over flat indices, so the same maps drive
// the autodiff path and the codec path.
//
// Block geometry: the latent grid splits into non-overlapping 4x4 blocks
// (16 tokens of d_lat channels each, row-major within the block). The past
// context of a block is the 8x8 window centered on it, reflect-padded at
// the borders (64 tokens). Repacked tokens slice channels instead: token u
// carries channels [u*k, (u+1)*k) over all 16 positions, k = d_lat/16.
namespace tec::tokens {

inline constexpr int kBlockSide = 4;
inline constexpr int kTokensPerBlock = 16;
inline constexpr int kPastSide = 8;
inline constexpr int kPastTokens = 64;

int block_count(int hl, int wl);

// Mirror an out-of-range coordinate back into [0, n) without repeating the
// edge sample, matching the conv padding convention.
int reflect_index(int i, int n);

// [1,M,Hl,Wl] -> [B*16, M]
std::vector<int64_t> current_map(int M, int hl, int wl);
// [B*16, M] -> [1,M,Hl,Wl]
std::vector<int64_t> current_inverse_map(int M, int hl, int wl);
// [1,M,Hl,Wl] -> [B*64, M] (overlapping windows; sources repeat)
std::vector<int64_t> past_map(int M, int hl, int wl);
// [1,M,Hl,Wl] -> [B*16, M] channel-sliced tokens, dim order (pos, channel)
std::vector<int64_t> repack_map(int M, int hl, int wl);
// [B*16, M] -> [1,M,Hl,Wl]
std::vector<int64_t> repack_inverse_map(int M, int hl, int wl);

// [1,C,H,W] -> [1,c1-c0,H,W]
std::vector<int64_t> channel_slice_map(int C, int h, int w, int c0, int c1);

// Teacher-forcing shift: [B*(T+1), D] rows (start token + T embedded
// tokens) -> [B*T, D], dropping each block's last row.
std::vector<int64_t> shift_map(int B, int T, int D);

}  // namespace tec::tokens

#endif  // TEC_TOKENS_HPP_
