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

#include <doctest.h>

#include "tec/gradcheck.hpp"

using namespace tec;

namespace {

Tensor<double> random_input(std::vector<int> shape, uint64_t seed, double lo = -2, double hi = 2) {
  Rng rng(seed);
  Tensor<double> t(std::move(shape));
  for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Direct nested-loop convolution, the oracle for the GEMM path.
Tensor<float> conv_oracle(const Tensor<float>& x, const Tensor<float>& w, const Tensor<float>& b,
                          int stride, int pad) {
  const int N = x.dim(0), Ci = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int Co = w.dim(0), k = w.dim(2);
  const int Ho = (H + 2 * pad - k) / stride + 1;
  const int Wo = (W + 2 * pad - k) / stride + 1;
  Tensor<float> y({N, Co, Ho, Wo});
  for (int n = 0; n < N; ++n)
    for (int co = 0; co < Co; ++co)
      for (int oh = 0; oh < Ho; ++oh)
        for (int ow = 0; ow < Wo; ++ow) {
          double acc = b[co];
          for (int ci = 0; ci < Ci; ++ci)
            for (int u = 0; u < k; ++u)
              for (int v = 0; v < k; ++v) {
                const int ih = oh * stride + u - pad;
                const int iw = ow * stride + v - pad;
                if (ih < 0 || ih >= H || iw < 0 || iw >= W) continue;
                acc += double(x.at(n, ci, ih, iw)) * double(w.at(co, ci, u, v));
              }
          y.at(n, co, oh, ow) = float(acc);
        }
  return y;
}

}  // namespace

TEST_CASE("conv2d matches nested-loop oracle") {
  Rng rng(7);
  Tensor<float> x({2, 3, 6, 7});
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = float(rng.uniform(-1, 1));
  Tensor<float> w({4, 3, 3, 3});
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = float(rng.uniform(-1, 1));
  Tensor<float> b({4});
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = float(rng.uniform(-1, 1));

  for (int stride : {1, 2}) {
    for (int pad : {0, 1}) {
      Tensor<float> xp = kern::pad2d(x, pad, kern::PadMode::kZero);
      Tensor<float> got = kern::conv2d(xp, w, b, stride);
      Tensor<float> want = conv_oracle(x, w, b, stride, pad);
      REQUIRE(got.shape() == want.shape());
      for (Eigen::Index i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-4));
    }
  }
}

TEST_CASE("conv2d 3x3 stride 2 pad 1 on 4x4 ones-kernel gives windowed sums") {
  Tensor<float> x({1, 1, 4, 4});
  for (int i = 0; i < 16; ++i) x[i] = float(i + 1);
  Tensor<float> w = Tensor<float>::full({1, 1, 3, 3}, 1.0f);
  Tensor<float> b({1});
  Tensor<float> y = kern::conv2d(kern::pad2d(x, 1, kern::PadMode::kZero), w, b, 2);
  REQUIRE(y.shape() == std::vector<int>{1, 1, 2, 2});
  // Sums of the 3x3 windows centered at (0,0),(0,2),(2,0),(2,2).
  CHECK(y[0] == doctest::Approx(1 + 2 + 5 + 6));
  CHECK(y[1] == doctest::Approx(2 + 3 + 4 + 6 + 7 + 8));
  CHECK(y[2] == doctest::Approx(5 + 6 + 9 + 10 + 13 + 14));
  CHECK(y[3] == doctest::Approx(6 + 7 + 8 + 10 + 11 + 12 + 14 + 15 + 16));
}

TEST_CASE("tconv2d inverts conv geometry and matches scatter oracle") {
  Rng rng(9);
  Tensor<float> x({1, 2, 3, 3});
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = float(rng.uniform(-1, 1));
  Tensor<float> w({2, 3, 5, 5});
  for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = float(rng.uniform(-1, 1));
  Tensor<float> b({3});
  const int s = 2, p = 2, op = 1;
  Tensor<float> y = kern::tconv2d(x, w, b, s, p, op);
  REQUIRE(y.shape() == std::vector<int>{1, 3, 6, 6});

  // Scatter oracle.
  Tensor<float> want({1, 3, 6, 6});
  for (int ci = 0; ci < 2; ++ci)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int co = 0; co < 3; ++co)
          for (int u = 0; u < 5; ++u)
            for (int v = 0; v < 5; ++v) {
              const int oh = i * s - p + u, ow = j * s - p + v;
              if (oh < 0 || oh >= 6 || ow < 0 || ow >= 6) continue;
              want.at(0, co, oh, ow) += x.at(0, ci, i, j) * w.at(ci, co, u, v);
            }
  for (Eigen::Index i = 0; i < y.size(); ++i)
    CHECK(y[i] == doctest::Approx(want[i]).epsilon(1e-4));
}

TEST_CASE("reflect pad mirrors without repeating the edge") {
  Tensor<float> x({1, 1, 3, 4});
  for (int h = 0; h < 3; ++h)
    for (int w = 0; w < 4; ++w) x.at(0, 0, h, w) = float(w);
  Tensor<float> y = kern::pad2d(x, 2, kern::PadMode::kReflect);
  REQUIRE(y.shape() == std::vector<int>{1, 1, 7, 8});
  std::vector<float> want = {2, 1, 0, 1, 2, 3, 2, 1};
  for (int i = 0; i < 8; ++i) CHECK(y.at(0, 0, 2, i) == want[size_t(i)]);
  // Vertical mirroring: padded row 0 is input row 2.
  CHECK(y.at(0, 0, 0, 2) == x.at(0, 0, 2, 0));
}

TEST_CASE("finite differences validate every layer kind") {
  const double tol = 1e-4, h = 1e-4;

  SUBCASE("conv stack with gdn/igdn") {
    SequentialNet<double> net({2, 3, 8, 8},
                              {
                                  {.kind = LayerKind::kConv2d, .out = 4, .kernel = 5, .stride = 2, .pad = 2},
                                  {.kind = LayerKind::kGdn},
                                  {.kind = LayerKind::kConv2d, .out = 4, .kernel = 3, .stride = 1, .pad = 1},
                                  {.kind = LayerKind::kResidualAdd},
                                  {.kind = LayerKind::kGelu},
                                  {.kind = LayerKind::kTconv2d, .out = 3, .kernel = 5, .stride = 2, .pad = 2, .outpad = 1},
                                  {.kind = LayerKind::kIgdn},
                              },
                              11);
    auto report = check_gradients(net, random_input({2, 3, 8, 8}, 21), h);
    INFO("worst rel err ", report.worst());
    CHECK(report.pass(tol));
  }

  SUBCASE("token stack with attention, layernorm and softmax") {
    SequentialNet<double> net({6, 8},
                              {
                                  {.kind = LayerKind::kLinear, .out = 8},
                                  {.kind = LayerKind::kLayerNorm},
                                  {.kind = LayerKind::kAttention, .heads = 2, .causal = true},
                                  {.kind = LayerKind::kResidualAdd},
                                  {.kind = LayerKind::kLinear, .out = 8},
                                  {.kind = LayerKind::kSoftmax},
                              },
                              13);
    auto report = check_gradients(net, random_input({6, 8}, 22), h);
    INFO("worst rel err ", report.worst());
    CHECK(report.pass(tol));
    // Every kind present in the net must appear in the report.
    CHECK(report.per_kind.size() == 5);
  }

  SUBCASE("reflect-padded conv") {
    SequentialNet<double> net({1, 2, 6, 6},
                              {
                                  {.kind = LayerKind::kConv2d, .out = 3, .kernel = 3, .stride = 1, .pad = 1, .pad_mode = kern::PadMode::kReflect},
                                  {.kind = LayerKind::kGelu},
                              },
                              17);
    auto report = check_gradients(net, random_input({1, 2, 6, 6}, 23), h);
    CHECK(report.pass(tol));
  }
}

TEST_CASE("causal attention passes no gradient from future tokens") {
  // Loss reads only token i of the output; earlier tokens may receive
  // gradient, later ones must not.
  const int T = 5, D = 4;
  SequentialNet<double> net({T, D}, {{.kind = LayerKind::kAttention, .heads = 2, .causal = true}},
                            3);
  Tape<double> tape;
  Binding<double> bind(tape, net.params());
  TapeCtx<double> ctx{&tape, &bind, true};
  Var<double> x = ops::input(tape, random_input({T, D}, 31), true);
  Var<double> y = net.forward(ctx, x);
  const int probe = 2;
  Var<double> row = ops::gather(tape, y, {1, D}, [&] {
    std::vector<int64_t> idx;
    for (int dI = 0; dI < D; ++dI) idx.push_back(probe * D + dI);
    return idx;
  }());
  tape.backward(ops::mean(tape, ops::square(tape, row)));

  const Tensor<double>& gx = tape.grad(x);
  REQUIRE(!gx.empty());
  double future = 0, past = 0;
  for (int tI = 0; tI < T; ++tI)
    for (int dI = 0; dI < D; ++dI) {
      const double g = std::fabs(gx.at(tI, dI));
      if (tI > probe) future = std::max(future, g);
      else past = std::max(past, g);
    }
  CHECK(future == 0.0);
  CHECK(past > 0.0);
}

TEST_CASE("gather differentiates through duplicated sources") {
  Tape<double> tape;
  Var<double> x = ops::input(tape, Tensor<double>::from({3}, {1.0, 2.0, 3.0}), true);
  // y = [x0, x0, x2]; loss = sum(y^2) => dx0 = 4*x0, dx1 = 0, dx2 = 2*x2.
  Var<double> y = ops::gather(tape, x, {3}, {0, 0, 2});
  tape.backward(ops::sum(tape, ops::square(tape, y)));
  const Tensor<double>& g = tape.grad(x);
  CHECK(g[0] == doctest::Approx(4.0));
  CHECK(g[1] == doctest::Approx(0.0));
  CHECK(g[2] == doctest::Approx(6.0));
}
