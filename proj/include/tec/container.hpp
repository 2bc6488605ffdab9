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

#ifndef TEC_CONTAINER_HPP_
#define TEC_CONTAINER_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "tec/common.hpp"

namespace tec {

enum class Family : uint8_t {
  kFactorized = 0,  // per-frame, factorized prior
  kElic = 1,        // per-frame, hyperprior + space-channel context
  kTemporal = 2,    // temporal transformer prior
  kFlex = 3,        // temporal with latent repacking (budgeted)
};

const char* family_name(Family f);
Family family_from_name(const std::string& s);

// Compressed stream container, little-endian, 24-byte header:
//   magic "TECB" | version u8 (=1) | family u8 | flags u8 (bits 0-1:
//   context frame cap, bit 2: budgeted tokens fill with the mask vector
//   instead of the prior mean) | budget u8 (kept tokens; 255 = all) |
//   H u16 | W u16 | C u8 | T u8 | d_lat u16 | lambda preset u8 |
//   reserved u8[7], then per frame: payload length u32 + payload bytes.
struct TecbHeader {
  Family family = Family::kFactorized;
  uint8_t context = 0;       // temporal context frame cap (0..2)
  bool mask_fill = false;    // how the decoder fills dropped tokens
  uint8_t budget = 255;      // kept tokens per block; 255 = all
  uint16_t H = 0, W = 0;
  uint8_t C = 0, T = 0;
  uint16_t d_lat = 0;
  uint8_t lambda_preset = 255;  // index into the family's preset table; 255 = custom
};

struct TecbFile {
  TecbHeader header;
  std::vector<std::vector<uint8_t>> frames;

  size_t payload_bytes() const {
    size_t n = 0;
    for (const auto& f : frames) n += f.size();
    return n;
  }
};

std::vector<uint8_t> serialize_tecb(const TecbFile& file);
TecbFile parse_tecb(const uint8_t* data, size_t n);

void save_tecb(const std::string& path, const TecbFile& file);
TecbFile load_tecb(const std::string& path);

}  // namespace tec

#endif  // TEC_CONTAINER_HPP_
