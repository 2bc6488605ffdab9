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

#include "tec/container.hpp"

#include <cstring>

namespace tec {

namespace {
constexpr uint8_t kVersion = 1;
}

const char* family_name(Family f) {
  switch (f) {
    case Family::kFactorized: return "fp";
    case Family::kElic: return "elic";
    case Family::kTemporal: return "tt";
    case Family::kFlex: return "flex";
  }
  return "?";
}

Family family_from_name(const std::string& s) {
  if (s == "fp") return Family::kFactorized;
  if (s == "elic") return Family::kElic;
  if (s == "tt") return Family::kTemporal;
  if (s == "flex") return Family::kFlex;
  fail_usage("unknown codec family: " + s + " (expected fp, elic, tt or flex)");
}

std::vector<uint8_t> serialize_tecb(const TecbFile& file) {
  const TecbHeader& h = file.header;
  if (file.frames.size() != size_t(h.T)) fail_invariant("frame payload count differs from T");
  std::vector<uint8_t> buf;
  buf.reserve(24 + 4 * file.frames.size() + file.payload_bytes());
  buf.insert(buf.end(), {'T', 'E', 'C', 'B'});
  put_u8(buf, kVersion);
  put_u8(buf, uint8_t(h.family));
  if (h.context > 2) fail_invariant("context count out of range");
  put_u8(buf, uint8_t(h.context | (h.mask_fill ? 4 : 0)));
  put_u8(buf, h.budget);
  put_u16(buf, h.H);
  put_u16(buf, h.W);
  put_u8(buf, h.C);
  put_u8(buf, h.T);
  put_u16(buf, h.d_lat);
  put_u8(buf, h.lambda_preset);
  for (int i = 0; i < 7; ++i) put_u8(buf, 0);
  TEC_CHECK(buf.size() == 24, "stream header must be 24 bytes");
  for (const auto& frame : file.frames) {
    put_u32(buf, uint32_t(frame.size()));
    buf.insert(buf.end(), frame.begin(), frame.end());
  }
  return buf;
}

TecbFile parse_tecb(const uint8_t* data, size_t n) {
  ByteReader r(data, n);
  const uint8_t* magic = r.bytes(4);
  if (memcmp(magic, "TECB", 4) != 0) fail_data("not a compressed stream (bad magic)");
  if (r.u8() != kVersion) fail_data("unsupported stream version");
  TecbFile file;
  TecbHeader& h = file.header;
  const uint8_t fam = r.u8();
  if (fam > 3) fail_data("unknown family id " + std::to_string(fam));
  h.family = Family(fam);
  const uint8_t flags = r.u8();
  h.context = flags & 3;
  h.mask_fill = (flags & 4) != 0;
  if (flags > 7) fail_data("unknown flag bits set");
  h.budget = r.u8();
  h.H = r.u16();
  h.W = r.u16();
  h.C = r.u8();
  h.T = r.u8();
  h.d_lat = r.u16();
  h.lambda_preset = r.u8();
  r.bytes(7);
  if (h.context > 2) fail_data("context count out of range");
  for (int t = 0; t < h.T; ++t) {
    const uint32_t len = r.u32();
    const uint8_t* p = r.bytes(len);
    file.frames.emplace_back(p, p + len);
  }
  if (r.remaining() != 0) fail_data("trailing bytes after last frame payload");
  return file;
}

void save_tecb(const std::string& path, const TecbFile& file) {
  write_file(path, serialize_tecb(file));
}

TecbFile load_tecb(const std::string& path) {
  std::vector<uint8_t> buf = read_file(path);
  return parse_tecb(buf.data(), buf.size());
}

}  // namespace tec
