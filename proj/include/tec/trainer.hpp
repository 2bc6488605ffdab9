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

#ifndef TEC_TRAINER_HPP_
#define TEC_TRAINER_HPP_

#include <string>
#include <vector>

#include "tec/checkpoint.hpp"
#include "tec/codec.hpp"

// Rate-distortion training on the additive-noise quantization proxy. One
// optimizer drives three parameter regimes: the main nets on a scheduled
// learning rate, the factorized densities on a constant auxiliary rate, and
// the transformer stacks with decoupled weight decay on matrix weights.
namespace tec {

struct TrainConfig {
  int steps = 2000;
  int frames_per_step = 2;  // frames averaged per step (image families)
  double lr = 1e-3;         // peak main learning rate, cosine decay
  double aux_lr = 5e-3;     // density parameters, constant
  double weight_decay = 1e-2;
  double lambda = 0.01;
  double clip = 1.0;  // global gradient norm; <= 0 disables
  uint64_t seed = 7;
  // Budgeted family only: draw a random token budget each step. Off trains
  // on full blocks, which leaves the model unable to fill dropped tokens.
  bool sample_budgets = true;
  std::string csv_path;  // per-step log, empty = off
};

struct StepStats {
  double rate_bpp = 0;  // bits per pixel and band, noise proxy
  double dist = 0;      // mean squared error, standardized space
  double loss = 0;
  double lambda_eff = 0;
  double lr = 0;
};

// Warmup fraction of the cosine schedule; temporal stacks ramp up longer.
double warmup_fraction(Family f);
double lambda_schedule(double lambda, int64_t step, int64_t total);
double lr_schedule(double peak, int64_t step, int64_t total, double warmup_frac);

class Trainer {
 public:
  // The model keeps ownership of parameters; band statistics must already
  // be set (train_model handles that).
  Trainer(Model& m, const TrainConfig& tc);

  StepStats train_step(const std::vector<ImageCube>& corpus);
  void run(const std::vector<ImageCube>& corpus);

  int64_t step() const { return step_; }
  TrainerState state() const;
  void restore(const TrainerState& ts);

 private:
  template <typename LossFn>
  StepStats optimize(LossFn&& build);
  StepStats step_image(const std::vector<ImageCube>& corpus);
  StepStats step_temporal(const std::vector<ImageCube>& corpus);
  void apply_grads(Binding<float>& bind, double lr);

  Model* m_;
  TrainConfig tc_;
  Rng rng_;
  int64_t step_ = 0;
};

// Fits band statistics on the corpus and runs the full schedule.
void train_model(Model& m, const std::vector<ImageCube>& corpus, const TrainConfig& tc);

// Deterministic held-out evaluation through the real coder: actual payload
// bytes and reconstruction error in standardized space.
struct ValPoint {
  double bpp = 0;      // payload bits per pixel, band and frame
  double mse_std = 0;  // standardized-space reconstruction MSE
  size_t bytes = 0;

  double loss(double lambda) const { return bpp + lambda * mse_std; }
};

ValPoint validate_cube(const Model& m, const ImageCube& cube, const EncodeOptions& opt = {});

}  // namespace tec

#endif  // TEC_TRAINER_HPP_
