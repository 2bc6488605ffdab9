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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tec/checkpoint.hpp"
#include "tec/cube_io.hpp"
#include "tec/inpaint.hpp"
#include "tec/metrics.hpp"
#include "tec/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tec;

namespace {

// ---- shared helpers --------------------------------------------------------

std::vector<std::string> expand_corpus(const std::vector<std::string>& inputs) {
  std::vector<std::string> paths;
  for (const std::string& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::directory_iterator(in)) {
        const std::string p = e.path().string();
        // Cloud masks are single-band and never part of an image corpus.
        if (e.path().extension() == ".cube" && p.find("_mask.cube") == std::string::npos)
          paths.push_back(p);
      }
    } else {
      paths.push_back(in);
    }
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) fail_usage("no .cube files found in the given inputs");
  return paths;
}

CloudMaskCube mask_from_cube(const ImageCube& c) {
  TEC_CHECK(c.C == 1, "mask cubes must have a single band");
  CloudMaskCube m;
  m.T = c.T;
  m.H = c.H;
  m.W = c.W;
  m.v.resize(c.v.size());
  for (size_t i = 0; i < c.v.size(); ++i) m.v[i] = c.v[i] ? 1 : 0;
  return m;
}

ImageCube mask_to_cube(const CloudMaskCube& m) {
  ImageCube c(m.T, 1, m.H, m.W);
  for (size_t i = 0; i < m.v.size(); ++i) c.v[i] = m.v[i];
  return c;
}

RdRecord eval_record(const Model& m, const ImageCube& cube, const EncodeOptions& opt,
                     PsnrPeak peak) {
  const TecbFile file = encode_cube(m, cube, opt);
  const ImageCube rec = decode_cube(m, file);
  RdRecord r;
  r.family = family_name(m.cfg.family);
  r.budget = opt.budget;
  r.bppbf = bppbf(file);
  r.psnr = psnr(cube, rec, peak);
  r.ssim = ssim(cube, rec);
  r.msssim = ms_ssim(cube, rec);
  r.bytes = file.payload_bytes();
  return r;
}

// ---- train configuration ----------------------------------------------------

struct TrainSpec {
  std::string family = "fp";
  CodecConfig cfg;
  TTConfig tt;
  TrainConfig tc;
};

json spec_to_json(const TrainSpec& s) {
  json j;
  j["family"] = s.family;
  j["model"] = {{"in_channels", s.cfg.in_channels}, {"N", s.cfg.N}, {"M", s.cfg.M}};
  j["tt"] = {{"d_tt", s.tt.d_tt},
             {"heads", s.tt.heads},
             {"sep_layers", s.tt.sep_layers},
             {"joint_layers", s.tt.joint_layers},
             {"dec_layers", s.tt.dec_layers}};
  j["train"] = {{"steps", s.tc.steps},
                {"frames_per_step", s.tc.frames_per_step},
                {"lr", s.tc.lr},
                {"aux_lr", s.tc.aux_lr},
                {"weight_decay", s.tc.weight_decay},
                {"lambda", s.tc.lambda},
                {"clip", s.tc.clip},
                {"seed", s.tc.seed},
                {"sample_budgets", s.tc.sample_budgets}};
  return j;
}

void spec_from_json(TrainSpec& s, const json& j) {
  if (j.contains("family")) s.family = j["family"].get<std::string>();
  if (j.contains("model")) {
    const json& m = j["model"];
    if (m.contains("in_channels")) s.cfg.in_channels = m["in_channels"].get<int>();
    if (m.contains("N")) s.cfg.N = m["N"].get<int>();
    if (m.contains("M")) s.cfg.M = m["M"].get<int>();
  }
  if (j.contains("tt")) {
    const json& t = j["tt"];
    if (t.contains("d_tt")) s.tt.d_tt = t["d_tt"].get<int>();
    if (t.contains("heads")) s.tt.heads = t["heads"].get<int>();
    if (t.contains("sep_layers")) s.tt.sep_layers = t["sep_layers"].get<int>();
    if (t.contains("joint_layers")) s.tt.joint_layers = t["joint_layers"].get<int>();
    if (t.contains("dec_layers")) s.tt.dec_layers = t["dec_layers"].get<int>();
  }
  if (j.contains("train")) {
    const json& t = j["train"];
    if (t.contains("steps")) s.tc.steps = t["steps"].get<int>();
    if (t.contains("frames_per_step")) s.tc.frames_per_step = t["frames_per_step"].get<int>();
    if (t.contains("lr")) s.tc.lr = t["lr"].get<double>();
    if (t.contains("aux_lr")) s.tc.aux_lr = t["aux_lr"].get<double>();
    if (t.contains("weight_decay")) s.tc.weight_decay = t["weight_decay"].get<double>();
    if (t.contains("lambda")) s.tc.lambda = t["lambda"].get<double>();
    if (t.contains("clip")) s.tc.clip = t["clip"].get<double>();
    if (t.contains("seed")) s.tc.seed = t["seed"].get<uint64_t>();
    if (t.contains("sample_budgets")) s.tc.sample_budgets = t["sample_budgets"].get<bool>();
  }
}

// ---- subcommands -------------------------------------------------------------

int run_synth(const std::string& out_dir, int count, SynthConfig sc, bool clean, bool masks) {
  fs::create_directories(out_dir);
  for (int i = 0; i < count; ++i) {
    SynthConfig one = sc;
    one.seed = sc.seed + uint64_t(i);
    const SynthResult r = synth_sequence(one);
    char name[32];
    std::snprintf(name, sizeof name, "seq_%03d", i);
    const std::string base = (fs::path(out_dir) / name).string();
    save_cube(base + ".cube", r.cube);
    if (clean) save_cube(base + "_clean.cube", r.clean);
    if (masks) save_cube(base + "_mask.cube", mask_to_cube(r.masks));
    std::cout << base << ".cube T=" << r.cube.T << " C=" << r.cube.C << " H=" << r.cube.H
              << " W=" << r.cube.W;
    if (masks) {
      std::cout << " cloud=[";
      for (int t = 0; t < r.masks.T; ++t)
        std::cout << (t ? "," : "") << int(100 * r.masks.frame_fraction(t)) << "%";
      std::cout << "]";
    }
    std::cout << "\n";
  }
  return 0;
}

int run_stats(const std::vector<std::string>& inputs) {
  json out = json::array();
  for (const std::string& p : expand_corpus(inputs)) {
    const ImageCube c = load_cube(p);
    const BandStats bs = compute_band_stats({&c});
    json j;
    j["path"] = p;
    j["T"] = c.T;
    j["C"] = c.C;
    j["H"] = c.H;
    j["W"] = c.W;
    j["mean"] = bs.mean;
    j["std"] = bs.stdev;
    out.push_back(j);
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_train(const TrainSpec& spec, const std::vector<std::string>& inputs,
              const std::string& out_path, const std::string& resume_path) {
  std::vector<ImageCube> corpus;
  for (const std::string& p : expand_corpus(inputs)) corpus.push_back(load_cube(p));

  Model m;
  TrainerState ts;
  bool resumed = false;
  if (!resume_path.empty()) {
    m = load_checkpoint(resume_path, &ts);
    resumed = ts.step > 0;
  } else {
    CodecConfig cfg = spec.cfg;
    cfg.family = family_from_name(spec.family);
    TTConfig tt = spec.tt;
    tt.d_lat = cfg.M;
    m = build_model(cfg, tt, spec.tc.seed);
  }

  if (!m.has_stats()) {
    std::vector<const ImageCube*> ptrs;
    for (const auto& c : corpus) ptrs.push_back(&c);
    m.stats = compute_band_stats(ptrs);
  }

  Trainer tr(m, spec.tc);
  if (resumed) tr.restore(ts);
  std::ofstream csv;
  if (!spec.tc.csv_path.empty()) {
    csv.open(spec.tc.csv_path, resumed ? std::ios::app : std::ios::trunc);
    if (!resumed) csv << "step,rate_bpp,dist,lambda_eff,lr,loss\n";
  }
  while (tr.step() < spec.tc.steps) {
    const StepStats s = tr.train_step(corpus);
    if (csv.is_open())
      csv << tr.step() - 1 << "," << s.rate_bpp << "," << s.dist << "," << s.lambda_eff << ","
          << s.lr << "," << s.loss << "\n";
    if (tr.step() % 100 == 0 || tr.step() == spec.tc.steps)
      std::cout << "step " << tr.step() << "/" << spec.tc.steps << " loss " << s.loss << " rate "
                << s.rate_bpp << " dist " << s.dist << "\n";
  }

  const TrainerState fin = tr.state();
  save_checkpoint(out_path, m, &fin);
  std::cout << "saved " << out_path << "\n";

  const ValPoint vp = validate_cube(m, corpus[0]);
  std::cout << "val bpp " << vp.bpp << " mse " << vp.mse_std << " bytes " << vp.bytes << "\n";
  return 0;
}

int run_encode(const std::string& model_path, const std::string& in_path,
               const std::string& out_path, const EncodeOptions& opt) {
  const Model m = load_checkpoint(model_path);
  const ImageCube cube = load_cube(in_path);
  EncodeStats stats;
  const TecbFile file = encode_cube(m, cube, opt, &stats);
  save_tecb(out_path, file);
  std::cout << out_path << " " << file.payload_bytes() << " payload bytes, " << bppbf(file)
            << " bits per sample (estimate " << stats.estimated_bits() << " bits)\n";
  return 0;
}

int run_decode(const std::string& model_path, const std::string& in_path,
               const std::string& out_path) {
  const Model m = load_checkpoint(model_path);
  const TecbFile file = load_tecb(in_path);
  const ImageCube cube = decode_cube(m, file);
  save_cube(out_path, cube);
  std::cout << out_path << " T=" << cube.T << " C=" << cube.C << " H=" << cube.H
            << " W=" << cube.W << "\n";
  return 0;
}

int run_eval(const std::string& model_path, const std::vector<std::string>& inputs,
             const EncodeOptions& opt, PsnrPeak peak, const std::string& format) {
  const Model m = load_checkpoint(model_path);
  std::vector<RdRecord> records;
  for (const std::string& p : expand_corpus(inputs))
    records.push_back(eval_record(m, load_cube(p), opt, peak));
  std::cout << (format == "json" ? rd_json(records) : rd_csv(records));
  return 0;
}

int run_curve(const std::string& model_path, const std::string& in_path,
              std::vector<int> budgets, PsnrPeak peak, const std::string& format) {
  const Model m = load_checkpoint(model_path);
  if (m.cfg.family != Family::kFlex)
    fail_usage("budget sweeps need a flex-family model");
  const ImageCube cube = load_cube(in_path);
  std::vector<RdRecord> records;
  for (int k : budgets) {
    EncodeOptions opt;
    opt.budget = k;
    records.push_back(eval_record(m, cube, opt, peak));
  }
  std::cout << (format == "json" ? rd_json(records) : rd_csv(records));
  return 0;
}

int run_inpaint(const std::string& model_path, const std::string& in_path,
                const std::string& mask_path, int target, const InpaintOptions& opt,
                const std::string& out_path, const std::string& clean_path, bool baseline) {
  const Model m = load_checkpoint(model_path);
  const ImageCube cube = load_cube(in_path);
  const CloudMaskCube masks = mask_from_cube(load_cube(mask_path));

  const ImageCube out =
      baseline ? copy_least_cloudy(cube, masks, target) : inpaint_frame(m, cube, masks, target, opt);
  if (!out_path.empty()) save_cube(out_path, out);

  if (!clean_path.empty()) {
    const ImageCube clean = load_cube(clean_path);
    ImageCube ref(1, clean.C, clean.H, clean.W);
    for (int c = 0; c < clean.C; ++c)
      for (int h = 0; h < clean.H; ++h)
        for (int w = 0; w < clean.W; ++w) ref.at(0, c, h, w) = clean.at(target, c, h, w);
    RegionMask region{1, masks.H, masks.W, {}};
    region.v.resize(size_t(masks.H) * size_t(masks.W));
    for (int h = 0; h < masks.H; ++h)
      for (int w = 0; w < masks.W; ++w)
        region.v[size_t(h) * size_t(masks.W) + size_t(w)] = masks.at(target, h, w);
    std::cout << "masked-region psnr " << format_metric(psnr_region(ref, out, region)) << "\n";
    std::cout << "full-frame psnr " << format_metric(psnr(ref, out)) << "\n";
  } else {
    std::cout << "inpainted frame " << target << (baseline ? " (baseline copy)" : "") << "\n";
  }
  return 0;
}

int run_selftest() {
  int failures = 0;
  const auto report = [&](const char* name, bool ok) {
    std::cout << (ok ? "ok   " : "FAIL ") << name << "\n";
    failures += ok ? 0 : 1;
  };

  {
    RangeEncoder enc;
    GaussianCoder gc;
    Rng rng(1);
    std::vector<int> vals;
    std::vector<std::pair<double, double>> priors;
    for (int i = 0; i < 4096; ++i) {
      const double mu = rng.uniform(-8, 8), sg = 0.2 + 8 * rng.uniform();
      priors.push_back({mu, sg});
      vals.push_back(sample_gaussian_symbol(mu, sg, rng) + ent::kAlphabetMin);
      gc.encode(enc, vals.back(), mu, sg);
    }
    const std::vector<uint8_t> bytes = enc.finish();
    RangeDecoder dec(bytes.data(), bytes.size());
    GaussianCoder gd;
    bool ok = true;
    for (int i = 0; i < 4096; ++i)
      ok = ok && gd.decode(dec, priors[size_t(i)].first, priors[size_t(i)].second) ==
                     vals[size_t(i)];
    report("gaussian range coder identity", ok);
  }

  {
    CodecConfig cfg = desk_codec_config(Family::kFactorized);
    cfg.in_channels = 3;
    cfg.N = 8;
    cfg.M = 16;
    Model m = build_model(cfg, 2);
    Rng rng(3);
    Tensor<float> y({1, 16, 4, 4});
    for (Eigen::Index i = 0; i < y.size(); ++i)
      y[i] = float(int(std::lround(rng.uniform(-9, 9))));
    const std::vector<uint8_t> payload = fp_encode_latent(m, y);
    const Tensor<float> back = fp_decode_latent(m, 4, 4, payload);
    bool ok = true;
    for (Eigen::Index i = 0; i < y.size(); ++i) ok = ok && y[i] == back[i];
    report("factorized latent round trip", ok);
  }

  {
    EvalCtx<float> c{nullptr};
    Rng rng(4);
    Tensor<float> x({1, 16, 8, 8});
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = float(rng.uniform(-1, 1));
    const Tensor<float> tok = c.gather(x, {4 * 16, 16}, tokens::repack_map(16, 8, 8));
    const Tensor<float> back = c.gather(tok, {1, 16, 8, 8}, tokens::repack_inverse_map(16, 8, 8));
    bool ok = true;
    for (Eigen::Index i = 0; i < x.size(); ++i) ok = ok && x[i] == back[i];
    report("token repacking inverse", ok);
  }

  {
    const auto& grid = sigma_table();
    const bool ok = std::abs(grid.front() - ent::kSigmaMin) < 1e-12 &&
                    std::abs(grid.back() - ent::kSigmaMax) < 1e-9 &&
                    std::is_sorted(grid.begin(), grid.end());
    report("sigma grid shape", ok);
  }

  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TerraCodec: learned compression for multispectral image sequences"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic sequences");
  std::string synth_out = "data";
  int synth_count = 1;
  SynthConfig sc;
  bool synth_clean = false, synth_masks = false;
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--count", synth_count, "number of sequences");
  synth->add_option("--frames", sc.T, "frames per sequence");
  synth->add_option("--bands", sc.C, "spectral bands");
  synth->add_option("--height", sc.H, "frame height");
  synth->add_option("--width", sc.W, "frame width");
  synth->add_option("--seed", sc.seed, "base seed; sequence i uses seed+i");
  synth->add_option("--cloud-prob", sc.cloud_prob, "per-frame cloud probability");
  synth->add_option("--cloud-min", sc.cloud_min_frac, "min cloud cover when cloudy");
  synth->add_option("--cloud-max", sc.cloud_max_frac, "max cloud cover when cloudy");
  synth->add_flag("--clean", synth_clean, "also write the cloud-free cube");
  synth->add_flag("--masks", synth_masks, "also write the cloud mask cube");

  // stats
  auto* stats = app.add_subcommand("stats", "print cube dimensions and band statistics");
  std::vector<std::string> stats_in;
  stats->add_option("inputs", stats_in, "cube files or directories")->required();

  // train
  auto* train = app.add_subcommand("train", "train a codec on a cube corpus");
  TrainSpec spec;
  spec.cfg.in_channels = 12;
  std::vector<std::string> train_in;
  std::string train_out = "model.teck", train_resume, train_config;
  bool show_config = false;
  train->add_option("--family", spec.family, "fp, elic, tt or flex");
  train->add_option("--corpus", train_in, "cube files or directories");
  train->add_option("--out", train_out, "checkpoint path");
  train->add_option("--resume", train_resume, "checkpoint to continue from");
  train->add_option("--config", train_config, "JSON config file (flags override)");
  train->add_flag("--show-config", show_config, "print the effective config and exit");
  auto* o_steps = train->add_option("--steps", spec.tc.steps, "training steps");
  auto* o_fps = train->add_option("--frames-per-step", spec.tc.frames_per_step, "frames per step");
  auto* o_lr = train->add_option("--lr", spec.tc.lr, "peak learning rate");
  auto* o_aux = train->add_option("--aux-lr", spec.tc.aux_lr, "density learning rate");
  auto* o_wd = train->add_option("--weight-decay", spec.tc.weight_decay, "transformer decay");
  auto* o_lam = train->add_option("--lambda", spec.tc.lambda, "distortion weight");
  auto* o_clip = train->add_option("--clip", spec.tc.clip, "gradient norm clip");
  auto* o_seed = train->add_option("--seed", spec.tc.seed, "training seed");
  auto* o_full = train->add_flag("--full-blocks", [&spec](int64_t) { spec.tc.sample_budgets = false; },
                                 "train without token budget sampling (flex ablation)");
  auto* o_csv = train->add_option("--csv", spec.tc.csv_path, "per-step log path");
  auto* o_ch = train->add_option("--bands", spec.cfg.in_channels, "input bands");
  auto* o_n = train->add_option("--backbone-width", spec.cfg.N, "conv backbone width");
  auto* o_m = train->add_option("--latent-channels", spec.cfg.M, "latent channels");
  auto* o_dtt = train->add_option("--tt-width", spec.tt.d_tt, "transformer width");
  auto* o_heads = train->add_option("--tt-heads", spec.tt.heads, "attention heads");
  auto* o_sep = train->add_option("--tt-sep", spec.tt.sep_layers, "per-frame encoder layers");
  auto* o_joint = train->add_option("--tt-joint", spec.tt.joint_layers, "joint context layers");
  auto* o_dec = train->add_option("--tt-dec", spec.tt.dec_layers, "decoder layers");

  // encode / decode
  auto* enc = app.add_subcommand("encode", "compress a cube");
  std::string enc_model, enc_in, enc_out = "out.tecb";
  EncodeOptions eopt;
  int enc_context = 2;
  enc->add_option("--model", enc_model, "checkpoint")->required();
  enc->add_option("--in", enc_in, "input cube")->required();
  enc->add_option("--out", enc_out, "output stream");
  enc->add_option("--budget", eopt.budget, "kept tokens per block, 1-16 (flex)");
  enc->add_option("--context", enc_context, "max past frames, 0-2 (temporal)");
  enc->add_flag("--mask-fill", eopt.mask_fill, "fill dropped tokens with the mask vector");

  auto* dec = app.add_subcommand("decode", "decompress a stream");
  std::string dec_model, dec_in, dec_out = "out.cube";
  dec->add_option("--model", dec_model, "checkpoint")->required();
  dec->add_option("--in", dec_in, "input stream")->required();
  dec->add_option("--out", dec_out, "output cube");

  // eval / curve
  auto* eval = app.add_subcommand("eval", "encode, decode and score cubes");
  std::string eval_model, eval_format = "csv", eval_peak = "65535";
  std::vector<std::string> eval_in;
  EncodeOptions eval_opt;
  eval->add_option("--model", eval_model, "checkpoint")->required();
  eval->add_option("--in", eval_in, "cube files or directories")->required();
  eval->add_option("--budget", eval_opt.budget, "kept tokens per block (flex)");
  eval->add_option("--format", eval_format, "csv or json");
  eval->add_option("--peak", eval_peak, "psnr peak: 65535, 10000 or auto");

  auto* curve = app.add_subcommand("curve", "sweep token budgets on one cube");
  std::string curve_model, curve_in, curve_format = "csv", curve_peak = "65535";
  std::vector<int> curve_budgets = {1, 2, 4, 8, 16};
  curve->add_option("--model", curve_model, "flex checkpoint")->required();
  curve->add_option("--in", curve_in, "input cube")->required();
  curve->add_option("--budgets", curve_budgets, "budgets to sweep")->delimiter(',');
  curve->add_option("--format", curve_format, "csv or json");
  curve->add_option("--peak", curve_peak, "psnr peak: 65535, 10000 or auto");

  // inpaint
  auto* inp = app.add_subcommand("inpaint", "replace cloudy tokens in one frame");
  std::string inp_model, inp_in, inp_mask, inp_out, inp_clean, inp_mode = "interleave";
  int inp_target = 0;
  InpaintOptions iopt;
  bool inp_baseline = false;
  inp->add_option("--model", inp_model, "temporal checkpoint")->required();
  inp->add_option("--in", inp_in, "input cube")->required();
  inp->add_option("--mask", inp_mask, "single-band cloud mask cube")->required();
  inp->add_option("--target", inp_target, "frame to inpaint");
  inp->add_option("--mode", inp_mode, "interleave, propagate or forecast");
  inp->add_option("--tau", iopt.tau, "cloud fraction threshold per token");
  inp->add_flag("--sample", iopt.sample, "sample the predictive distribution");
  inp->add_option("--seed", iopt.seed, "sampling seed");
  inp->add_option("--out", inp_out, "output cube (single frame)");
  inp->add_option("--clean", inp_clean, "cloud-free reference for scoring");
  inp->add_flag("--baseline", inp_baseline, "copy from the least-cloudy frame instead");

  // selftest
  app.add_subcommand("selftest", "run quick internal consistency checks");

  try {
    app.parse(argc, argv);

    if (app.got_subcommand("synth"))
      return run_synth(synth_out, synth_count, sc, synth_clean, synth_masks);
    if (app.got_subcommand("stats")) return run_stats(stats_in);
    if (app.got_subcommand("train")) {
      if (!train_config.empty()) {
        std::ifstream f(train_config);
        if (!f) fail_usage("cannot open config file: " + train_config);
        json j;
        f >> j;
        TrainSpec file_spec;
        file_spec.cfg.in_channels = 12;
        spec_from_json(file_spec, j);
        // Command-line flags override file values.
        if (!*o_steps) spec.tc.steps = file_spec.tc.steps;
        if (!*o_fps) spec.tc.frames_per_step = file_spec.tc.frames_per_step;
        if (!*o_lr) spec.tc.lr = file_spec.tc.lr;
        if (!*o_aux) spec.tc.aux_lr = file_spec.tc.aux_lr;
        if (!*o_wd) spec.tc.weight_decay = file_spec.tc.weight_decay;
        if (!*o_lam) spec.tc.lambda = file_spec.tc.lambda;
        if (!*o_clip) spec.tc.clip = file_spec.tc.clip;
        if (!*o_seed) spec.tc.seed = file_spec.tc.seed;
        if (!*o_full) spec.tc.sample_budgets = file_spec.tc.sample_budgets;
        if (!*o_csv) spec.tc.csv_path = file_spec.tc.csv_path;
        if (!*o_ch) spec.cfg.in_channels = file_spec.cfg.in_channels;
        if (!*o_n) spec.cfg.N = file_spec.cfg.N;
        if (!*o_m) spec.cfg.M = file_spec.cfg.M;
        if (!*o_dtt) spec.tt.d_tt = file_spec.tt.d_tt;
        if (!*o_heads) spec.tt.heads = file_spec.tt.heads;
        if (!*o_sep) spec.tt.sep_layers = file_spec.tt.sep_layers;
        if (!*o_joint) spec.tt.joint_layers = file_spec.tt.joint_layers;
        if (!*o_dec) spec.tt.dec_layers = file_spec.tt.dec_layers;
        if (!train->get_option("--family")->count()) spec.family = file_spec.family;
      }
      if (show_config) {
        std::cout << spec_to_json(spec).dump(2) << "\n";
        return 0;
      }
      if (train_in.empty()) fail_usage("train needs --corpus");
      return run_train(spec, train_in, train_out, train_resume);
    }
    if (app.got_subcommand("encode")) {
      if (enc_context < 0 || enc_context > 2) fail_usage("--context must be 0, 1 or 2");
      if (eopt.budget < 1 || eopt.budget > 16) fail_usage("--budget must be in 1..16");
      eopt.context_cap = enc_context;
      return run_encode(enc_model, enc_in, enc_out, eopt);
    }
    if (app.got_subcommand("decode")) return run_decode(dec_model, dec_in, dec_out);
    if (app.got_subcommand("eval"))
      return run_eval(eval_model, eval_in, eval_opt, psnr_peak_from_name(eval_peak), eval_format);
    if (app.got_subcommand("curve"))
      return run_curve(curve_model, curve_in, curve_budgets, psnr_peak_from_name(curve_peak),
                       curve_format);
    if (app.got_subcommand("inpaint")) {
      if (inp_mode == "interleave")
        iopt.mode = InpaintMode::kInterleave;
      else if (inp_mode == "propagate")
        iopt.mode = InpaintMode::kPropagate;
      else if (inp_mode == "forecast")
        iopt.mode = InpaintMode::kForecast;
      else
        fail_usage("unknown inpaint mode: " + inp_mode);
      return run_inpaint(inp_model, inp_in, inp_mask, inp_target, iopt, inp_out, inp_clean,
                         inp_baseline);
    }
    if (app.got_subcommand("selftest")) return run_selftest();
    fail_usage("no subcommand given");
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : int(Fault::kUsage);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return int(e.fault());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return int(Fault::kInvariant);
  }
}
