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

#ifndef TEC_CHECKPOINT_HPP_
#define TEC_CHECKPOINT_HPP_

#include <string>

#include "tec/model.hpp"

// Model serialization: "TECK" magic, version byte, a JSON manifest
// (configuration, band statistics, the sigma quantization grid, and a
// fingerprint of the parameter payload), then the raw float32 parameters in
// registration order, then optimizer slots when training state is saved.
// Loading rebuilds the model from the manifest and verifies both the
// fingerprint and that this build reproduces the stored sigma grid.
namespace tec {

struct TrainerState {
  int64_t step = 0;
  std::string rng;      // serialized optimizer-side RNG
  bool has_adam = false;
};

void save_checkpoint(const std::string& path, const Model& m,
                     const TrainerState* ts = nullptr);
Model load_checkpoint(const std::string& path, TrainerState* ts = nullptr);

}  // namespace tec

#endif  // TEC_CHECKPOINT_HPP_
