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

#ifndef TEC_GRADCHECK_HPP_
#define TEC_GRADCHECK_HPP_

#include <string>
#include <vector>

#include "tec/nets.hpp"

namespace tec {

enum class LayerKind {
  kConv2d,
  kTconv2d,
  kLinear,
  kGdn,
  kIgdn,
  kGelu,
  kLayerNorm,
  kAttention,
  kSoftmax,
  kResidualAdd,
};

const char* layer_kind_name(LayerKind k);

struct LayerSpec {
  LayerKind kind;
  int out = 0;      // conv/tconv/linear output width
  int kernel = 3;   // conv/tconv
  int stride = 1;   // conv/tconv
  int pad = 0;      // conv/tconv (tconv also uses outpad)
  int outpad = 0;
  kern::PadMode pad_mode = kern::PadMode::kZero;
  int heads = 1;       // attention
  bool causal = false; // attention
};

// A small composable stack used to exercise every differentiable layer kind
// against finite differences. Residual-add wraps the immediately preceding
// layer (y = f(x) + x), so it needs shape-preserving f.
template <typename S>
class SequentialNet {
 public:
  SequentialNet(std::vector<int> in_shape, std::vector<LayerSpec> layers, uint64_t seed);

  ParamStore<S>& params() { return params_; }
  const ParamStore<S>& params() const { return params_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<int>& in_shape() const { return in_shape_; }

  template <class Ctx>
  typename Ctx::V forward(Ctx& c, typename Ctx::V x) const;

 private:
  std::vector<int> in_shape_;
  std::vector<LayerSpec> layers_;
  ParamStore<S> params_;
};

struct GradCheckEntry {
  std::string kind;
  double max_rel_err = 0.0;
  int entries_checked = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> per_kind;
  double input_max_rel_err = 0.0;
  double worst() const;
  bool pass(double tol) const { return worst() < tol; }
};

// Central finite differences of loss = mean(f(x)^2) against the tape
// gradients, for every parameter tensor and the input. Parameters are
// perturbed in place and restored. Large tensors are strided so at most
// max_entries_per_tensor scalars are probed.
GradCheckReport check_gradients(SequentialNet<double>& net, const Tensor<double>& input, double h,
                                int max_entries_per_tensor = 200);

}  // namespace tec

#endif  // TEC_GRADCHECK_HPP_
