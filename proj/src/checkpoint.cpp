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

#include "tec/checkpoint.hpp"

#include <cstring>

#include "json.hpp"

namespace tec {

namespace {

constexpr uint8_t kVersion = 1;

using json = nlohmann::json;

std::string hex64(uint64_t v) {
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void append_tensor(std::vector<uint8_t>& out, const Tensor<float>& t) {
  const size_t n = size_t(t.size()) * sizeof(float);
  const size_t o = out.size();
  out.resize(o + n);
  std::memcpy(out.data() + o, t.data(), n);
}

void read_tensor(ByteReader& r, Tensor<float>& t) {
  const size_t n = size_t(t.size()) * sizeof(float);
  std::memcpy(t.data(), r.bytes(n), n);
}

json config_json(const Model& m) {
  json j;
  j["family"] = family_name(m.cfg.family);
  j["in_channels"] = m.cfg.in_channels;
  j["N"] = m.cfg.N;
  j["M"] = m.cfg.M;
  if (m.cfg.temporal()) {
    j["tt"] = {{"d_tt", m.tt.d_tt},
               {"heads", m.tt.heads},
               {"sep_layers", m.tt.sep_layers},
               {"joint_layers", m.tt.joint_layers},
               {"dec_layers", m.tt.dec_layers}};
  }
  return j;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& m, const TrainerState* ts) {
  std::vector<uint8_t> params;
  params.reserve(size_t(m.ps.total_size()) * sizeof(float));
  for (int i = 0; i < m.ps.count(); ++i) append_tensor(params, m.ps.entry(i).value);

  const bool adam = ts && ts->has_adam;
  json man;
  man["format"] = "teck";
  man["seed"] = m.seed;
  man["config"] = config_json(m);
  man["tensors"] = m.ps.count();
  man["scalars"] = int64_t(m.ps.total_size());
  man["param_hash"] = hex64(fnv1a64(params.data(), params.size()));
  const auto& grid = sigma_table();
  man["sigma_grid"] = std::vector<double>(grid.begin(), grid.end());
  if (m.has_stats()) {
    man["stats"] = {{"mean", m.stats.mean}, {"stdev", m.stats.stdev}};
  }
  man["adam"] = adam;
  if (ts) {
    man["step"] = ts->step;
    man["rng"] = ts->rng;
  }
  const std::string text = man.dump();

  std::vector<uint8_t> buf;
  buf.insert(buf.end(), {'T', 'E', 'C', 'K'});
  put_u8(buf, kVersion);
  put_u32(buf, uint32_t(text.size()));
  buf.insert(buf.end(), text.begin(), text.end());
  buf.insert(buf.end(), params.begin(), params.end());
  if (adam) {
    for (int i = 0; i < m.ps.count(); ++i) {
      const auto& e = m.ps.entry(i);
      TEC_CHECK(e.adam_m.size() == e.value.size() && e.adam_v.size() == e.value.size(),
                "optimizer slots not initialized for " + e.name);
      append_tensor(buf, e.adam_m);
    }
    for (int i = 0; i < m.ps.count(); ++i) append_tensor(buf, m.ps.entry(i).adam_v);
  }
  write_file(path, buf);
}

Model load_checkpoint(const std::string& path, TrainerState* ts) {
  const std::vector<uint8_t> buf = read_file(path);
  ByteReader r(buf.data(), buf.size());
  if (std::memcmp(r.bytes(4), "TECK", 4) != 0) fail_data("not a checkpoint (bad magic)");
  if (r.u8() != kVersion) fail_data("unsupported checkpoint version");
  const uint32_t mlen = r.u32();
  const char* mtext = reinterpret_cast<const char*>(r.bytes(mlen));
  json man = json::parse(mtext, mtext + mlen, nullptr, false);
  if (man.is_discarded() || man.value("format", "") != "teck")
    fail_data("checkpoint manifest is not valid");

  const json& cj = man.at("config");
  CodecConfig cfg;
  cfg.family = family_from_name(cj.at("family").get<std::string>());
  cfg.in_channels = cj.at("in_channels").get<int>();
  cfg.N = cj.at("N").get<int>();
  cfg.M = cj.at("M").get<int>();
  TTConfig tt = desk_tt_config(cfg.M);
  if (cj.contains("tt")) {
    const json& tj = cj.at("tt");
    tt.d_tt = tj.at("d_tt").get<int>();
    tt.heads = tj.at("heads").get<int>();
    tt.sep_layers = tj.at("sep_layers").get<int>();
    tt.joint_layers = tj.at("joint_layers").get<int>();
    tt.dec_layers = tj.at("dec_layers").get<int>();
  }

  Model m = build_model(cfg, tt, man.at("seed").get<uint64_t>());
  if (man.at("tensors").get<int>() != m.ps.count() ||
      man.at("scalars").get<int64_t>() != int64_t(m.ps.total_size()))
    fail_data("checkpoint parameter layout differs from this build");

  const std::vector<double> grid = man.at("sigma_grid").get<std::vector<double>>();
  const auto& live = sigma_table();
  if (grid.size() != live.size()) fail_data("checkpoint sigma grid size differs");
  for (size_t i = 0; i < grid.size(); ++i)
    if (grid[i] != live[i]) fail_data("this build does not reproduce the checkpoint sigma grid");

  const size_t nbytes = size_t(m.ps.total_size()) * sizeof(float);
  const uint8_t* pdata = r.bytes(nbytes);
  const std::string want = man.at("param_hash").get<std::string>();
  if (hex64(fnv1a64(pdata, nbytes)) != want) fail_data("checkpoint parameter hash mismatch");
  {
    ByteReader pr(pdata, nbytes);
    for (int i = 0; i < m.ps.count(); ++i) read_tensor(pr, m.ps.entry(i).value);
  }

  if (man.contains("stats")) {
    m.stats.mean = man.at("stats").at("mean").get<std::vector<double>>();
    m.stats.stdev = man.at("stats").at("stdev").get<std::vector<double>>();
    if (m.stats.bands() != cfg.in_channels) fail_data("checkpoint band stats are malformed");
  }

  const bool adam = man.value("adam", false);
  if (adam) {
    for (int i = 0; i < m.ps.count(); ++i) {
      auto& e = m.ps.entry(i);
      e.adam_m = Tensor<float>(e.value.shape());
      read_tensor(r, e.adam_m);
    }
    for (int i = 0; i < m.ps.count(); ++i) {
      auto& e = m.ps.entry(i);
      e.adam_v = Tensor<float>(e.value.shape());
      read_tensor(r, e.adam_v);
    }
  }
  if (r.remaining() != 0) fail_data("trailing bytes after checkpoint payload");
  if (ts) {
    ts->step = man.value("step", int64_t(0));
    ts->rng = man.value("rng", std::string());
    ts->has_adam = adam;
  }
  return m;
}

}  // namespace tec
