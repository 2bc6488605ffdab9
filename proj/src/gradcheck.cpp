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

#include "tec/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace tec {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kTconv2d: return "tconv2d";
    case LayerKind::kLinear: return "linear";
    case LayerKind::kGdn: return "gdn";
    case LayerKind::kIgdn: return "igdn";
    case LayerKind::kGelu: return "gelu";
    case LayerKind::kLayerNorm: return "layernorm";
    case LayerKind::kAttention: return "attention";
    case LayerKind::kSoftmax: return "softmax";
    case LayerKind::kResidualAdd: return "residual_add";
  }
  return "?";
}

namespace {

std::string lname(int i) { return "l" + std::to_string(i); }

// Walks layer specs computing activation shapes, so construction can size
// parameters before any forward runs.
std::vector<int> next_shape(const std::vector<int>& s, const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::kConv2d: {
      const int H = s[2] + 2 * l.pad, W = s[3] + 2 * l.pad;
      return {s[0], l.out, (H - l.kernel) / l.stride + 1, (W - l.kernel) / l.stride + 1};
    }
    case LayerKind::kTconv2d:
      return {s[0], l.out, l.stride * (s[2] - 1) + l.kernel - 2 * l.pad + l.outpad,
              l.stride * (s[3] - 1) + l.kernel - 2 * l.pad + l.outpad};
    case LayerKind::kLinear:
      return {s[0], l.out};
    default:
      return s;
  }
}

}  // namespace

template <typename S>
SequentialNet<S>::SequentialNet(std::vector<int> in_shape, std::vector<LayerSpec> layers,
                                uint64_t seed)
    : in_shape_(std::move(in_shape)), layers_(std::move(layers)) {
  Rng rng(seed);
  std::vector<int> s = in_shape_;
  for (size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    switch (l.kind) {
      case LayerKind::kConv2d:
        nets::add_conv(params_, rng, lname(int(i)), l.out, s[1], l.kernel);
        break;
      case LayerKind::kTconv2d:
        nets::add_tconv(params_, rng, lname(int(i)), s[1], l.out, l.kernel);
        break;
      case LayerKind::kLinear:
        TEC_CHECK(s.size() == 2, "linear layer expects rank-2 input");
        nets::add_dense(params_, rng, lname(int(i)), l.out, s[1]);
        break;
      case LayerKind::kGdn:
      case LayerKind::kIgdn:
        nets::add_gdn(params_, lname(int(i)), s[1]);
        break;
      case LayerKind::kLayerNorm:
        nets::add_lnorm(params_, lname(int(i)), s.back());
        break;
      case LayerKind::kAttention:
        nets::add_mha(params_, rng, lname(int(i)), s.back());
        break;
      case LayerKind::kGelu:
      case LayerKind::kSoftmax:
      case LayerKind::kResidualAdd:
        break;
    }
    s = next_shape(s, l);
  }
}

template <typename S>
template <class Ctx>
typename Ctx::V SequentialNet<S>::forward(Ctx& c, typename Ctx::V x) const {
  using V = typename Ctx::V;
  V prev_in = x;  // input of the preceding layer, for residual-add
  std::vector<int> s = in_shape_;
  for (size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    V in = x;
    switch (l.kind) {
      case LayerKind::kConv2d:
        x = nets::conv(c, x, lname(int(i)), l.stride, l.pad, l.pad_mode);
        break;
      case LayerKind::kTconv2d:
        x = nets::tconv(c, x, lname(int(i)), l.stride, l.pad, l.outpad);
        break;
      case LayerKind::kLinear:
        x = nets::dense(c, x, lname(int(i)));
        break;
      case LayerKind::kGdn:
        x = nets::gdn(c, x, lname(int(i)), false);
        break;
      case LayerKind::kIgdn:
        x = nets::gdn(c, x, lname(int(i)), true);
        break;
      case LayerKind::kGelu:
        x = c.gelu(x);
        break;
      case LayerKind::kLayerNorm:
        x = nets::lnorm(c, x, lname(int(i)));
        break;
      case LayerKind::kAttention:
        x = nets::mha(c, x, x, lname(int(i)), 1, s[0], s[0], l.heads, l.causal);
        break;
      case LayerKind::kSoftmax:
        x = c.attn_softmax(x, 1, 1, s[0], s[1], false);
        break;
      case LayerKind::kResidualAdd:
        x = c.add(x, prev_in);
        break;
    }
    prev_in = in;
    s = next_shape(s, l);
  }
  return x;
}

// The forward is instantiated for both contexts at both scalar widths.
template class SequentialNet<float>;
template class SequentialNet<double>;
template Var<float> SequentialNet<float>::forward<TapeCtx<float>>(TapeCtx<float>&,
                                                                  Var<float>) const;
template Var<double> SequentialNet<double>::forward<TapeCtx<double>>(TapeCtx<double>&,
                                                                     Var<double>) const;
template Tensor<float> SequentialNet<float>::forward<EvalCtx<float>>(EvalCtx<float>&,
                                                                     Tensor<float>) const;
template Tensor<double> SequentialNet<double>::forward<EvalCtx<double>>(EvalCtx<double>&,
                                                                        Tensor<double>) const;

double GradCheckReport::worst() const {
  double w = input_max_rel_err;
  for (const auto& e : per_kind) w = std::max(w, e.max_rel_err);
  return w;
}

namespace {

double rel_err(double a, double b) {
  const double scale = std::max({std::fabs(a), std::fabs(b), 1e-8});
  return std::fabs(a - b) / scale;
}

double loss_of(const SequentialNet<double>& net, const Tensor<double>& input) {
  EvalCtx<double> c{&net.params(), false};
  Tensor<double> y = net.forward(c, input);
  return y.array().square().mean();
}

}  // namespace

GradCheckReport check_gradients(SequentialNet<double>& net, const Tensor<double>& input, double h,
                                int max_entries_per_tensor) {
  // Analytic pass.
  Tape<double> tape;
  ParamStore<double>& ps = net.params();
  Binding<double> bind(tape, ps);
  TapeCtx<double> ctx{&tape, &bind, true};
  Var<double> x = ops::input(tape, input, true);
  Var<double> y = net.forward(ctx, x);
  Var<double> loss = ops::mean(tape, ops::square(tape, y));
  tape.backward(loss);

  // Map each parameter to the kind of the layer owning it ("lN.*").
  auto kind_of = [&](const std::string& name) -> std::string {
    const size_t dot = name.find('.');
    const int li = std::stoi(name.substr(1, dot - 1));
    return layer_kind_name(net.layers()[size_t(li)].kind);
  };

  GradCheckReport report;
  for (const LayerSpec& l : net.layers()) {
    const std::string k = layer_kind_name(l.kind);
    bool seen = false;
    for (auto& e : report.per_kind) seen = seen || e.kind == k;
    if (!seen) report.per_kind.push_back({k, 0.0, 0});
  }
  auto slot = [&](const std::string& k) -> GradCheckEntry& {
    for (auto& e : report.per_kind)
      if (e.kind == k) return e;
    report.per_kind.push_back({k, 0.0, 0});
    return report.per_kind.back();
  };

  for (int pi = 0; pi < ps.count(); ++pi) {
    auto& entry = ps.entry(pi);
    Tensor<double> g = bind.grad(pi);
    if (g.empty()) g = Tensor<double>(entry.value.shape());
    GradCheckEntry& out = slot(kind_of(entry.name));
    const Eigen::Index n = entry.value.size();
    const Eigen::Index stride = std::max<Eigen::Index>(1, n / max_entries_per_tensor);
    for (Eigen::Index i = 0; i < n; i += stride) {
      const double keep = entry.value[i];
      entry.value[i] = keep + h;
      const double lp = loss_of(net, input);
      entry.value[i] = keep - h;
      const double lm = loss_of(net, input);
      entry.value[i] = keep;
      const double fd = (lp - lm) / (2 * h);
      out.max_rel_err = std::max(out.max_rel_err, rel_err(g[i], fd));
      ++out.entries_checked;
    }
  }

  // Input gradient.
  {
    Tensor<double> gx = tape.grad(x);
    Tensor<double> probe = input;
    const Eigen::Index n = probe.size();
    const Eigen::Index stride = std::max<Eigen::Index>(1, n / max_entries_per_tensor);
    for (Eigen::Index i = 0; i < n; i += stride) {
      const double keep = probe[i];
      probe[i] = keep + h;
      const double lp = loss_of(net, probe);
      probe[i] = keep - h;
      const double lm = loss_of(net, probe);
      probe[i] = keep;
      const double fd = (lp - lm) / (2 * h);
      report.input_max_rel_err = std::max(report.input_max_rel_err, rel_err(gx[i], fd));
    }
  }
  return report;
}

}  // namespace tec
