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

// Golden bitstream fixtures. `write` regenerates the checked-in streams from
// seeded models and synthetic input; `check` rebuilds the same models,
// verifies that re-encoding reproduces every stream byte for byte and that
// decoding yields the recorded cube fingerprint. Any change to transforms,
// priors, token order or the range coder shows up here as a byte diff.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tec/codec.hpp"
#include "tec/cube_io.hpp"
#include "tec/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tec;

namespace {

struct GoldenCase {
  std::string name;
  Family family;
  uint64_t model_seed;
  EncodeOptions opt;
};

std::vector<GoldenCase> golden_cases() {
  std::vector<GoldenCase> cases;
  cases.push_back({"fp", Family::kFactorized, 1001, {}});
  cases.push_back({"elic", Family::kElic, 1002, {}});
  cases.push_back({"tt", Family::kTemporal, 1003, {}});
  GoldenCase flex_mean{"flex_mean_k7", Family::kFlex, 1004, {}};
  flex_mean.opt.budget = 7;
  cases.push_back(flex_mean);
  GoldenCase flex_mask{"flex_mask_k3", Family::kFlex, 1005, {}};
  flex_mask.opt.budget = 3;
  flex_mask.opt.mask_fill = true;
  flex_mask.opt.context_cap = 1;
  cases.push_back(flex_mask);
  return cases;
}

Model golden_model(Family f, uint64_t seed) {
  CodecConfig cfg = desk_codec_config(f);
  cfg.in_channels = 4;
  cfg.N = 8;
  cfg.M = 16;
  TTConfig tt = desk_tt_config(cfg.M);
  tt.d_tt = 32;
  tt.heads = 2;
  tt.sep_layers = tt.joint_layers = tt.dec_layers = 1;
  Model m = build_model(cfg, tt, seed);
  // Fixed statistics, not corpus-derived, so the fixture has no hidden
  // dependency on the synthesizer.
  m.stats.mean = {1500.0, 1800.0, 2100.0, 2400.0};
  m.stats.stdev = {500.0, 520.0, 540.0, 560.0};
  return m;
}

ImageCube golden_cube() {
  SynthConfig sc;
  sc.T = 3;
  sc.C = 4;
  sc.H = 64;
  sc.W = 64;
  sc.seed = 777;
  return synth_sequence(sc).cube;
}

uint64_t hash_cube(const ImageCube& c) {
  return fnv1a64(c.v.data(), c.v.size() * sizeof(uint16_t));
}

uint64_t hash_bytes(const std::vector<uint8_t>& b) { return fnv1a64(b.data(), b.size()); }

std::string hex(uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

int write_goldens(const std::string& dir) {
  fs::create_directories(dir);
  const ImageCube cube = golden_cube();
  json manifest;
  manifest["input"] = {{"T", cube.T}, {"C", cube.C}, {"H", cube.H}, {"W", cube.W},
                       {"synth_seed", 777}, {"hash", hex(hash_cube(cube))}};
  json streams = json::array();
  for (const GoldenCase& gc : golden_cases()) {
    const Model m = golden_model(gc.family, gc.model_seed);
    const TecbFile file = encode_cube(m, cube, gc.opt);
    const std::vector<uint8_t> bytes = serialize_tecb(file);
    const ImageCube rec = decode_cube(m, file);

    const std::string path = (fs::path(dir) / (gc.name + ".tecb")).string();
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    out.close();

    json j;
    j["name"] = gc.name;
    j["family"] = family_name(gc.family);
    j["model_seed"] = gc.model_seed;
    j["budget"] = gc.opt.budget;
    j["mask_fill"] = gc.opt.mask_fill;
    j["context_cap"] = gc.opt.context_cap;
    j["stream_bytes"] = bytes.size();
    j["stream_hash"] = hex(hash_bytes(bytes));
    j["decoded_hash"] = hex(hash_cube(rec));
    streams.push_back(j);
    std::cout << "wrote " << path << " (" << bytes.size() << " bytes)\n";
  }
  manifest["streams"] = streams;
  std::ofstream mf(fs::path(dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";
  std::cout << "wrote " << (fs::path(dir) / "manifest.json").string() << "\n";
  return 0;
}

int check_goldens(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) {
    std::cerr << "missing manifest: " << dir << "/manifest.json\n";
    return 1;
  }
  json manifest;
  mf >> manifest;

  const ImageCube cube = golden_cube();
  if (hex(hash_cube(cube)) != manifest["input"]["hash"].get<std::string>()) {
    std::cerr << "FAIL synthetic input drifted from the recorded fingerprint\n";
    return 1;
  }

  int failures = 0;
  for (const GoldenCase& gc : golden_cases()) {
    const json* entry = nullptr;
    for (const auto& j : manifest["streams"])
      if (j["name"] == gc.name) entry = &j;
    if (!entry) {
      std::cerr << "FAIL " << gc.name << ": missing from manifest\n";
      ++failures;
      continue;
    }

    std::ifstream in(fs::path(dir) / (gc.name + ".tecb"), std::ios::binary);
    if (!in) {
      std::cerr << "FAIL " << gc.name << ": stream file missing\n";
      ++failures;
      continue;
    }
    std::vector<uint8_t> stored((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());

    const Model m = golden_model(gc.family, gc.model_seed);
    const TecbFile file = parse_tecb(stored.data(), stored.size());
    const ImageCube rec = decode_cube(m, file);
    const bool decode_ok = hex(hash_cube(rec)) == (*entry)["decoded_hash"].get<std::string>();

    const std::vector<uint8_t> fresh = serialize_tecb(encode_cube(m, cube, gc.opt));
    const bool encode_ok = fresh == stored;

    if (decode_ok && encode_ok) {
      std::cout << "ok   " << gc.name << " (" << stored.size() << " bytes)\n";
    } else {
      std::cerr << "FAIL " << gc.name << (decode_ok ? "" : " [decode drift]")
                << (encode_ok ? "" : " [encode drift]") << "\n";
      ++failures;
    }
  }
  std::cout << (failures == 0 ? "goldens match\n" : "goldens FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3 || (std::string(argv[1]) != "write" && std::string(argv[1]) != "check")) {
    std::cerr << "usage: tec_goldens write|check <dir>\n";
    return int(Fault::kUsage);
  }
  try {
    return std::string(argv[1]) == "write" ? write_goldens(argv[2]) : check_goldens(argv[2]);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return int(e.fault());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return int(Fault::kInvariant);
  }
}
