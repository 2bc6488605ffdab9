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

#ifndef TEC_CUBE_IO_HPP_
#define TEC_CUBE_IO_HPP_

#include <string>

#include "tec/image.hpp"

namespace tec {

// Raw cube container, little-endian. 16-byte header:
//   magic "TECR" | version u8 (=1) | dtype u8 (0 = u16) | T u8 | C u8 |
//   H u16 | W u16 | reserved u8[4]
// followed by T*C*H*W u16 samples, frame-major then band-major.
void save_cube(const std::string& path, const ImageCube& cube);
ImageCube load_cube(const std::string& path);

// Band statistics as JSON {"mean": [...], "std": [...]}. The conventional
// location for a cube at P is P + ".stats.json".
void save_band_stats(const std::string& path, const BandStats& stats);
BandStats load_band_stats(const std::string& path);
std::string stats_sidecar_path(const std::string& cube_path);

}  // namespace tec

#endif  // TEC_CUBE_IO_HPP_
