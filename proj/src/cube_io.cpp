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

#include "tec/cube_io.hpp"

#include <cstring>

#include <json.hpp>

#include "tec/common.hpp"

namespace tec {

namespace {
constexpr uint8_t kVersion = 1;
constexpr uint8_t kDtypeU16 = 0;
}  // namespace

void save_cube(const std::string& path, const ImageCube& cube) {
  cube.validate();
  if (cube.T > 255 || cube.C > 255 || cube.H > 65535 || cube.W > 65535)
    fail_data("cube axis exceeds raw container limits");
  std::vector<uint8_t> buf;
  buf.reserve(16 + cube.v.size() * 2);
  buf.insert(buf.end(), {'T', 'E', 'C', 'R'});
  put_u8(buf, kVersion);
  put_u8(buf, kDtypeU16);
  put_u8(buf, uint8_t(cube.T));
  put_u8(buf, uint8_t(cube.C));
  put_u16(buf, uint16_t(cube.H));
  put_u16(buf, uint16_t(cube.W));
  for (int i = 0; i < 4; ++i) put_u8(buf, 0);
  TEC_CHECK(buf.size() == 16, "raw cube header must be 16 bytes");
  for (uint16_t s : cube.v) put_u16(buf, s);
  write_file(path, buf);
}

ImageCube load_cube(const std::string& path) {
  std::vector<uint8_t> buf = read_file(path);
  ByteReader r(buf.data(), buf.size());
  const uint8_t* magic = r.bytes(4);
  if (memcmp(magic, "TECR", 4) != 0) fail_data(path + ": not a raw cube (bad magic)");
  if (r.u8() != kVersion) fail_data(path + ": unsupported raw cube version");
  if (r.u8() != kDtypeU16) fail_data(path + ": unsupported sample dtype");
  const int T = r.u8();
  const int C = r.u8();
  const int H = r.u16();
  const int W = r.u16();
  ImageCube cube(T, C, H, W);
  r.bytes(4);  // reserved
  const size_t n = cube.v.size();
  if (r.remaining() != n * 2)
    fail_data(path + ": payload is " + std::to_string(r.remaining()) + " bytes, expected " +
              std::to_string(n * 2));
  const uint8_t* p = r.bytes(n * 2);
  for (size_t i = 0; i < n; ++i) cube.v[i] = uint16_t(p[2 * i]) | uint16_t(p[2 * i + 1]) << 8;
  cube.validate();
  return cube;
}

void save_band_stats(const std::string& path, const BandStats& stats) {
  nlohmann::json j;
  j["mean"] = stats.mean;
  j["std"] = stats.stdev;
  const std::string s = j.dump(2) + "\n";
  write_file(path, s.data(), s.size());
}

BandStats load_band_stats(const std::string& path) {
  std::vector<uint8_t> buf = read_file(path);
  nlohmann::json j = nlohmann::json::parse(buf.begin(), buf.end(), nullptr, false);
  if (j.is_discarded() || !j.contains("mean") || !j.contains("std"))
    fail_data(path + ": malformed band stats JSON");
  BandStats st;
  st.mean = j["mean"].get<std::vector<double>>();
  st.stdev = j["std"].get<std::vector<double>>();
  if (st.mean.size() != st.stdev.size() || st.mean.empty())
    fail_data(path + ": mean/std length mismatch");
  for (double& s : st.stdev) s = std::max(s, BandStats::kMinStd);
  return st;
}

std::string stats_sidecar_path(const std::string& cube_path) { return cube_path + ".stats.json"; }

}  // namespace tec
