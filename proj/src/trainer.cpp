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

#include "tec/trainer.hpp"

#include <cmath>
#include <fstream>

namespace tec {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kAdamB1 = 0.9;
constexpr double kAdamB2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Mixed context sampling for the temporal stacks: mostly the full two-frame
// context, with enough no-context and one-frame draws that the bootstrap
// paths stay trained.
constexpr double kDummyFrac = 0.1;
constexpr double kDupFrac = 0.1;

Tensor<float> noise_like(Rng& rng, const Tensor<float>& v) {
  Tensor<float> n(v.shape());
  for (Eigen::Index i = 0; i < n.size(); ++i) n[i] = float(rng.uniform() - 0.5);
  return n;
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

bool starts_with(const std::string& s, const std::string& head) {
  return s.compare(0, head.size(), head) == 0;
}

struct Built {
  Var<float> loss;
  double rate_bpp = 0;
  double dist = 0;
};

double scalar(const Tape<float>& t, Var<float> v) { return double(t.val(v)[0]); }

}  // namespace

double warmup_fraction(Family f) {
  return (f == Family::kTemporal || f == Family::kFlex) ? 0.15 : 0.05;
}

// Rate pressure starts ten times higher and anneals to the target between
// 15% and 30% of the schedule; large targets skip the boost.
double lambda_schedule(double lambda, int64_t step, int64_t total) {
  if (lambda > 5.0) return lambda;
  const double f = double(step) / double(total);
  if (f < 0.15) return 10.0 * lambda;
  if (f < 0.30) {
    const double a = (f - 0.15) / 0.15;
    return (10.0 - 9.0 * a) * lambda;
  }
  return lambda;
}

double lr_schedule(double peak, int64_t step, int64_t total, double warmup_frac) {
  const double w = std::max(1.0, warmup_frac * double(total));
  if (double(step) < w) return peak * (double(step) + 1.0) / w;
  const double f = (double(step) - w) / std::max(1.0, double(total) - w);
  return peak * 0.5 * (1.0 + std::cos(kPi * f));
}

Trainer::Trainer(Model& m, const TrainConfig& tc) : m_(&m), tc_(tc), rng_(tc.seed) {
  TEC_CHECK(tc.steps > 0, "training needs at least one step");
  TEC_CHECK(m.has_stats(), "set band statistics before training");
}

TrainerState Trainer::state() const {
  TrainerState ts;
  ts.step = step_;
  ts.rng = rng_.save_state();
  ts.has_adam = m_->ps.count() > 0 && m_->ps.entry(0).adam_m.size() > 0;
  return ts;
}

void Trainer::restore(const TrainerState& ts) {
  step_ = ts.step;
  if (!ts.rng.empty()) rng_.load_state(ts.rng);
}

void Trainer::apply_grads(Binding<float>& bind, double lr) {
  ParamStore<float>& ps = m_->ps;
  std::vector<Tensor<float>> gs(size_t(ps.count()));
  double sq = 0;
  for (int i = 0; i < ps.count(); ++i) {
    gs[size_t(i)] = bind.grad(i);
    const Tensor<float>& g = gs[size_t(i)];
    for (Eigen::Index k = 0; k < g.size(); ++k) sq += double(g[k]) * double(g[k]);
  }
  double cs = 1.0;
  if (tc_.clip > 0) {
    const double norm = std::sqrt(sq);
    if (norm > tc_.clip) cs = tc_.clip / norm;
  }
  const double t = double(step_ + 1);
  const double bc1 = 1.0 - std::pow(kAdamB1, t);
  const double bc2 = 1.0 - std::pow(kAdamB2, t);
  for (int i = 0; i < ps.count(); ++i) {
    const Tensor<float>& g = gs[size_t(i)];
    if (g.size() == 0) continue;
    auto& e = ps.entry(i);
    if (e.adam_m.size() == 0) {
      e.adam_m = Tensor<float>(e.value.shape());
      e.adam_v = Tensor<float>(e.value.shape());
    }
    const double lri = e.group == 1 ? tc_.aux_lr : lr;
    const bool decay = starts_with(e.name, "tt.") && ends_with(e.name, ".w");
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      const double gk = double(g[k]) * cs;
      const double mm = kAdamB1 * double(e.adam_m[k]) + (1.0 - kAdamB1) * gk;
      const double vv = kAdamB2 * double(e.adam_v[k]) + (1.0 - kAdamB2) * gk * gk;
      e.adam_m[k] = float(mm);
      e.adam_v[k] = float(vv);
      double val = double(e.value[k]);
      if (decay) val -= lri * tc_.weight_decay * val;
      val -= lri * (mm / bc1) / (std::sqrt(vv / bc2) + kAdamEps);
      e.value[k] = float(val);
    }
  }
}

template <typename LossFn>
StepStats Trainer::optimize(LossFn&& build) {
  Tape<float> tape;
  Binding<float> bind(tape, m_->ps);
  TapeCtx<float> c{&tape, &bind, true};
  const double lam = lambda_schedule(tc_.lambda, step_, tc_.steps);
  const double lr = lr_schedule(tc_.lr, step_, tc_.steps, warmup_fraction(m_->cfg.family));

  const Built b = build(c, tape, bind, lam);
  StepStats st;
  st.loss = scalar(tape, b.loss);
  st.rate_bpp = b.rate_bpp;
  st.dist = b.dist;
  st.lambda_eff = lam;
  st.lr = lr;
  if (!std::isfinite(st.loss)) fail_invariant("training loss is not finite");
  tape.backward(b.loss);
  apply_grads(bind, lr);
  ++step_;
  return st;
}

StepStats Trainer::step_image(const std::vector<ImageCube>& corpus) {
  const Model& m = *m_;
  std::vector<Tensor<float>> xs;
  for (int k = 0; k < tc_.frames_per_step; ++k) {
    const ImageCube& cube = corpus[size_t(rng_.uniform_int(int64_t(corpus.size())))];
    const int t = int(rng_.uniform_int(cube.T));
    xs.push_back(standardize_frame(cube, t, m.stats));
  }
  return optimize([&](TapeCtx<float>& c, Tape<float>& tape, Binding<float>& bind,
                      double lam) -> Built {
    Built out;
    Var<float> total{};
    for (size_t k = 0; k < xs.size(); ++k) {
      const Tensor<float>& x = xs[k];
      const double hwc = double(x.dim(1)) * double(x.dim(2)) * double(x.dim(3));
      auto x_v = c.constant(x);
      auto y = transforms::analysis(c, x_v, m.cfg);
      auto yt = c.add(y, c.constant(noise_like(rng_, c.value(y))));
      Var<float> rate{};
      if (m.cfg.family == Family::kFactorized) {
        rate = factorized_rate_bits(tape, yt, m.yd, bind);
      } else {
        auto z = transforms::hyper_analysis(c, y, m.cfg);
        auto zt = c.add(z, c.constant(noise_like(rng_, c.value(z))));
        rate = factorized_rate_bits(tape, zt, m.zd, bind);
        auto hyp = transforms::hyper_synthesis(c, zt, m.cfg);
        const int hl = c.value(y).dim(2), wl = c.value(y).dim(3);
        std::vector<Var<float>> prevs;
        for (int g = 0; g < m.groups.count(); ++g) {
          const int size = m.groups.sizes[size_t(g)];
          auto yg = elic::slice_group(c, yt, m.groups, g, m.cfg.M, hl, wl);
          auto pr = elic::group_priors(c, g, hyp, prevs, yg, size, hl, wl);
          auto sigma = c.add_scalar(c.softplus(pr.second), float(ent::kSigmaMin));
          rate = ops::add(tape, rate, gaussian_rate_bits(tape, yg, pr.first, sigma));
          prevs.push_back(yg);
        }
      }
      auto rate_n = ops::scale(tape, rate, float(1.0 / hwc));
      auto xh = transforms::synthesis(c, yt, m.cfg);
      auto dist = ops::mse(tape, xh, x_v);
      auto term = ops::add(tape, rate_n, ops::scale(tape, dist, float(lam)));
      out.rate_bpp += scalar(tape, rate_n);
      out.dist += scalar(tape, dist);
      total = k == 0 ? term : ops::add(tape, total, term);
    }
    out.loss = ops::scale(tape, total, float(1.0 / double(xs.size())));
    out.rate_bpp /= double(xs.size());
    out.dist /= double(xs.size());
    return out;
  });
}

StepStats Trainer::step_temporal(const std::vector<ImageCube>& corpus) {
  const Model& m = *m_;
  const ImageCube& cube = corpus[size_t(rng_.uniform_int(int64_t(corpus.size())))];
  const int t = int(rng_.uniform_int(cube.T));
  const double mu = rng_.uniform();
  int want = mu < kDummyFrac ? 0 : (mu < kDummyFrac + kDupFrac ? 1 : 2);
  const int n_ctx = std::min(want, t);
  const int K = m.cfg.family == Family::kFlex && tc_.sample_budgets
                    ? flex::sample_budget(rng_, tokens::kTokensPerBlock)
                    : tokens::kTokensPerBlock;

  // The decoder sees losslessly coded past latents, so teacher forcing uses
  // the hard-quantized ones; no gradient flows through the context frames.
  Tensor<float> w_old, w_new;
  if (n_ctx >= 1) {
    const Tensor<float> p1 =
        quantize_latent(analysis_frame(m, standardize_frame(cube, t - 1, m.stats)));
    w_new = past_windows(p1);
    w_old = n_ctx == 2
                ? past_windows(
                      quantize_latent(analysis_frame(m, standardize_frame(cube, t - 2, m.stats))))
                : w_new;
  }
  const Tensor<float> x = standardize_frame(cube, t, m.stats);

  return optimize([&](TapeCtx<float>& c, Tape<float>& tape, Binding<float>&,
                      double lam) -> Built {
    Built out;
    const double hwc = double(x.dim(1)) * double(x.dim(2)) * double(x.dim(3));
    auto x_v = c.constant(x);
    auto y = transforms::analysis(c, x_v, m.cfg);
    const int hl = c.value(y).dim(2), wl = c.value(y).dim(3);
    const int B = tokens::block_count(hl, wl);
    auto yt = c.add(y, c.constant(noise_like(rng_, c.value(y))));

    auto ctx = n_ctx == 0 ? temporal::tt_dummy_context(c, B)
                          : temporal::tt_context(c, m.tt, c.constant(w_old), c.constant(w_new), B);
    const int ctx_len = m.tt.ctx_len(n_ctx);

    Var<float> rate{};
    Var<float> recon_in{};
    double rate_scale = 1.0 / hwc;
    if (m.cfg.family == Family::kFlex) {
      auto yrep = c.gather(yt, {B * tokens::kTokensPerBlock, m.cfg.M},
                           tokens::repack_map(m.cfg.M, hl, wl));
      auto masked = flex::apply_budget(c, yrep, B, K, m.cfg.M);
      auto pr = temporal::tt_priors(c, m.tt, masked, ctx, ctx_len, B);
      auto sigma = c.add_scalar(c.softplus(pr.second), float(ent::kSigmaMin));
      rate = gaussian_rate_bits(tape, masked, pr.first, sigma,
                                flex::keep_mask<float>(B, K, m.cfg.M));
      rate_scale *= flex::flex_scale(tokens::kTokensPerBlock, K);
      recon_in = c.gather(masked, {1, m.cfg.M, hl, wl}, tokens::repack_inverse_map(m.cfg.M, hl, wl));
    } else {
      auto ytok = c.gather(yt, {B * tokens::kTokensPerBlock, m.cfg.M},
                           tokens::current_map(m.cfg.M, hl, wl));
      auto pr = temporal::tt_priors(c, m.tt, ytok, ctx, ctx_len, B);
      auto sigma = c.add_scalar(c.softplus(pr.second), float(ent::kSigmaMin));
      rate = gaussian_rate_bits(tape, ytok, pr.first, sigma);
      recon_in = yt;
    }
    auto rate_n = ops::scale(tape, rate, float(rate_scale));
    auto xh = transforms::synthesis(c, recon_in, m.cfg);
    auto dist = ops::mse(tape, xh, x_v);
    out.loss = ops::add(tape, rate_n, ops::scale(tape, dist, float(lam)));
    out.rate_bpp = scalar(tape, rate_n);
    out.dist = scalar(tape, dist);
    return out;
  });
}

StepStats Trainer::train_step(const std::vector<ImageCube>& corpus) {
  TEC_CHECK(!corpus.empty(), "training corpus is empty");
  return m_->cfg.temporal() ? step_temporal(corpus) : step_image(corpus);
}

void Trainer::run(const std::vector<ImageCube>& corpus) {
  std::ofstream csv;
  if (!tc_.csv_path.empty()) {
    csv.open(tc_.csv_path);
    TEC_CHECK(csv.good(), "cannot open training log " + tc_.csv_path);
    csv << "step,rate_bpp,dist,lambda_eff,lr,loss\n";
  }
  while (step_ < tc_.steps) {
    const StepStats st = train_step(corpus);
    if (csv.is_open()) {
      csv << (step_ - 1) << ',' << st.rate_bpp << ',' << st.dist << ',' << st.lambda_eff << ','
          << st.lr << ',' << st.loss << '\n';
    }
  }
}

void train_model(Model& m, const std::vector<ImageCube>& corpus, const TrainConfig& tc) {
  TEC_CHECK(!corpus.empty(), "training corpus is empty");
  std::vector<const ImageCube*> ptrs;
  for (const auto& c : corpus) ptrs.push_back(&c);
  m.stats = compute_band_stats(ptrs);
  Trainer tr(m, tc);
  tr.run(corpus);
}

ValPoint validate_cube(const Model& m, const ImageCube& cube, const EncodeOptions& opt) {
  EncodeStats es;
  const TecbFile f = encode_cube(m, cube, opt, &es);
  const ImageCube recon = decode_cube(m, f);
  const Tensor<float> a = standardize(cube, m.stats);
  const Tensor<float> b = standardize(recon, m.stats);
  double sq = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double d = double(a[i]) - double(b[i]);
    sq += d * d;
  }
  ValPoint v;
  v.bytes = f.payload_bytes();
  v.bpp = double(v.bytes) * 8.0 / double(a.size());
  v.mse_std = sq / double(a.size());
  return v;
}

}  // namespace tec
