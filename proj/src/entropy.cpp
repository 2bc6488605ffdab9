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

#include "tec/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "tec/nets.hpp"

namespace tec {

namespace detmath {

namespace {
constexpr double kLn2 = 0.69314718055994530941723212145818;
constexpr double kInvLn2 = 1.44269504088896340735992468100189;
constexpr double kTwoOverSqrtPi = 1.12837916709551257389615890312155;
constexpr double kInvSqrtPi = 0.56418958354775628694807945156077;
constexpr double kSqrtHalf = 0.70710678118654752440084436210485;
}  // namespace

double det_exp(double x) {
  if (x > 709.0) return std::numeric_limits<double>::infinity();
  if (x < -745.0) return 0.0;
  double kd = x * kInvLn2;
  kd = kd >= 0 ? std::floor(kd + 0.5) : std::ceil(kd - 0.5);
  const double r = x - kd * kLn2;
  double term = 1.0, sum = 1.0;
  for (int n = 1; n <= 17; ++n) {
    term *= r / n;
    sum += term;
  }
  return std::ldexp(sum, int(kd));
}

double det_log(double x) {
  TEC_CHECK(x > 0.0, "det_log domain error");
  int e = 0;
  double m = std::frexp(x, &e);
  if (m < kSqrtHalf) {
    m *= 2.0;
    e -= 1;
  }
  const double t = (m - 1.0) / (m + 1.0);
  const double t2 = t * t;
  double term = t, sum = 0.0;
  for (int n = 0; n < 13; ++n) {
    sum += term / (2 * n + 1);
    term *= t2;
  }
  return 2.0 * sum + double(e) * kLn2;
}

double det_log1p(double x) {
  if (x > 0.375 || x < -0.3) return det_log(1.0 + x);
  const double t = x / (2.0 + x);
  const double t2 = t * t;
  double term = t, sum = 0.0;
  for (int n = 0; n < 13; ++n) {
    sum += term / (2 * n + 1);
    term *= t2;
  }
  return 2.0 * sum;
}

double det_tanh(double x) {
  const double a = std::fabs(x);
  if (a > 20.0) return x > 0 ? 1.0 : -1.0;
  const double e = det_exp(-2.0 * a);
  const double r = (1.0 - e) / (1.0 + e);
  return x >= 0 ? r : -r;
}

double det_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + det_exp(-x));
  const double e = det_exp(x);
  return e / (1.0 + e);
}

double det_softplus(double x) {
  if (x > 30.0) return x;
  if (x < -37.0) return det_exp(x);
  return det_log1p(det_exp(x));
}

double det_erf(double x) {
  const double a = std::fabs(x);
  if (a >= 6.5) return x > 0 ? 1.0 : -1.0;
  double r;
  if (a <= 2.0) {
    // erf(a) = 2/sqrt(pi) * sum (-1)^n a^(2n+1) / (n! (2n+1))
    const double a2 = a * a;
    double t = a, sum = a;  // n = 0 term
    for (int n = 1; n < 64; ++n) {
      t *= -a2 / n;
      const double c = t / (2 * n + 1);
      sum += c;
      if (std::fabs(c) < 1e-20 * std::fabs(sum)) break;
    }
    r = kTwoOverSqrtPi * sum;
  } else {
    // erfc(a) = exp(-a^2)/sqrt(pi) * 1/(a + (1/2)/(a + (2/2)/(a + ...)))
    double f = a;
    for (int k = 48; k >= 1; --k) f = a + (0.5 * k) / f;
    const double erfc = det_exp(-a * a) * kInvSqrtPi / f;
    r = 1.0 - erfc;
  }
  return x >= 0 ? r : -r;
}

}  // namespace detmath

using detmath::det_erf;
using detmath::det_exp;
using detmath::det_log;
using detmath::det_phi;
using detmath::det_sigmoid;
using detmath::det_softplus;
using detmath::det_tanh;

namespace {
constexpr double kInvLn2 = 1.44269504088896340735992468100189;

double bits_from_mass(double p) {
  return -det_log(std::max(p, ent::kTailMass)) * kInvLn2;
}
}  // namespace

const std::array<double, ent::kSigmaLevels>& sigma_table() {
  static const std::array<double, ent::kSigmaLevels> table = [] {
    std::array<double, ent::kSigmaLevels> t{};
    const double lo = det_log(ent::kSigmaMin);
    const double hi = det_log(ent::kSigmaMax);
    for (int i = 0; i < ent::kSigmaLevels; ++i)
      t[size_t(i)] = det_exp(lo + (hi - lo) * double(i) / double(ent::kSigmaLevels - 1));
    return t;
  }();
  return table;
}

int sigma_index(double sigma) {
  if (!(sigma > ent::kSigmaMin)) return 0;
  if (sigma >= ent::kSigmaMax) return ent::kSigmaLevels - 1;
  const double lo = det_log(ent::kSigmaMin);
  const double hi = det_log(ent::kSigmaMax);
  const double step = (hi - lo) / double(ent::kSigmaLevels - 1);
  const double pos = (det_log(sigma) - lo) / step;
  const int idx = int(std::floor(pos + 0.5));
  return std::clamp(idx, 0, ent::kSigmaLevels - 1);
}

int32_t mu_quantize(double mu) {
  const double clamped = std::clamp(mu, -20000.0, 20000.0);
  return int32_t(std::round(clamped * ent::kMuGrid));
}

double gaussian_bits(double yhat, double mu, double sigma) {
  const double s = std::max(sigma, ent::kSigmaMin);
  const double p = det_phi((yhat + 0.5 - mu) / s) - det_phi((yhat - 0.5 - mu) / s);
  return bits_from_mass(p);
}

double gaussian_alphabet_entropy(double mu, double sigma) {
  const double s = std::max(sigma, ent::kSigmaMin);
  double H = 0.0, total = 0.0;
  double lo = det_phi((ent::kAlphabetMin - 0.5 - mu) / s);
  for (int v = ent::kAlphabetMin; v <= ent::kAlphabetMax; ++v) {
    const double hi = det_phi((v + 0.5 - mu) / s);
    const double p = hi - lo;
    lo = hi;
    total += p;
    if (p > 0) H -= p * det_log(p) * kInvLn2;
  }
  TEC_CHECK(total > 0.5, "gaussian mass escaped the alphabet");
  // Renormalize to the alphabet-restricted distribution.
  return H / total + det_log(total) * kInvLn2;
}

int sample_gaussian_symbol(double mu, double sigma, Rng& rng) {
  const double s = std::max(sigma, ent::kSigmaMin);
  const double mass_lo = det_phi((ent::kAlphabetMin - 0.5 - mu) / s);
  const double mass_hi = det_phi((ent::kAlphabetMax + 0.5 - mu) / s);
  const double u = mass_lo + rng.uniform() * (mass_hi - mass_lo);
  double lo = mass_lo;
  for (int v = ent::kAlphabetMin; v < ent::kAlphabetMax; ++v) {
    const double hi = det_phi((v + 0.5 - mu) / s);
    if (u < hi) return v - ent::kAlphabetMin;
    lo = hi;
  }
  (void)lo;
  return ent::kNumSymbols - 1;
}

CdfTable build_gaussian_cdf(int32_t mu_q, int sigma_idx) {
  const double mu = double(mu_q) / ent::kMuGrid;
  const double sigma = sigma_table()[size_t(std::clamp(sigma_idx, 0, ent::kSigmaLevels - 1))];
  const double extra = double(rc::kTotal - uint32_t(ent::kNumSymbols));

  std::vector<uint32_t> f(size_t(ent::kNumSymbols), 1);
  int64_t assigned = 0;
  double lo = det_phi((ent::kAlphabetMin - 0.5 - mu) / sigma);
  for (int i = 0; i < ent::kNumSymbols; ++i) {
    const double hi = det_phi((symbol_to_value(i) + 0.5 - mu) / sigma);
    const double p = hi - lo;
    lo = hi;
    const uint32_t r = uint32_t(std::floor(p * extra + 0.5));
    f[size_t(i)] += r;
    assigned += r;
  }
  if (assigned == 0) {
    // All mass collapsed outside or between bins; pin it on the nearest
    // symbol so the table stays usable.
    const int v = std::clamp(int(std::round(mu)), ent::kAlphabetMin, ent::kAlphabetMax);
    f[size_t(value_to_symbol(v))] += uint32_t(extra);
    assigned = int64_t(extra);
  }

  int64_t diff = int64_t(rc::kTotal) - (int64_t(ent::kNumSymbols) + assigned);
  while (diff != 0) {
    size_t imax = 0;
    for (size_t i = 1; i < f.size(); ++i)
      if (f[i] > f[imax]) imax = i;
    if (diff > 0) {
      f[imax] += uint32_t(diff);
      diff = 0;
    } else {
      const int64_t take = std::min(-diff, int64_t(f[imax]) - 1);
      f[imax] -= uint32_t(take);
      diff += take;
      TEC_CHECK(take > 0, "cannot balance cdf table");
    }
  }
  return CdfTable(f);
}

// ---- snapped-prior symbol coding -------------------------------------------

GaussianCoder::Snapped GaussianCoder::snap(double mu, double sigma) const {
  const int32_t mu_q = mu_quantize(mu);
  int mu_int = int(mu_q / ent::kMuGrid);
  int mu_frac = int(mu_q - int32_t(mu_int) * ent::kMuGrid);
  if (mu_frac < 0) {
    mu_frac += ent::kMuGrid;
    mu_int -= 1;
  }
  return Snapped{mu_int, mu_frac, sigma_index(sigma)};
}

const CdfTable& GaussianCoder::table(int mu_frac, int sigma_idx) {
  const auto key = std::make_pair(mu_frac, sigma_idx);
  auto it = cache_.find(key);
  if (it == cache_.end())
    it = cache_.emplace(key, build_gaussian_cdf(mu_frac, sigma_idx)).first;
  return it->second;
}

void GaussianCoder::encode(RangeEncoder& enc, int value, double mu, double sigma) {
  const Snapped s = snap(mu, sigma);
  enc.encode_symbol(table(s.mu_frac, s.sigma_idx), value_to_symbol(value - s.mu_int));
}

int GaussianCoder::decode(RangeDecoder& dec, double mu, double sigma) {
  const Snapped s = snap(mu, sigma);
  return symbol_to_value(dec.decode_symbol(table(s.mu_frac, s.sigma_idx))) + s.mu_int;
}

double GaussianCoder::estimate_bits(int value, double mu, double sigma) {
  const Snapped s = snap(mu, sigma);
  return gaussian_bits(double(value - s.mu_int), double(s.mu_frac) / ent::kMuGrid,
                       sigma_table()[size_t(s.sigma_idx)]);
}

// ---- factorized density ---------------------------------------------------

namespace {

// Raw per-channel parameters pulled out as doubles.
struct FdParams {
  double w1[3], b1[3], a1[3];
  double w2[9], b2[3], a2[3];
  double w3[9], b3[3], a3[3];
  double w4[3], b4;
};

struct FdGrads {
  double w1[3]{}, b1[3]{}, a1[3]{};
  double w2[9]{}, b2[3]{}, a2[3]{};
  double w3[9]{}, b3[3]{}, a3[3]{};
  double w4[3]{}, b4{};
};

// Forward scratch kept for the analytic backward.
struct FdTrace {
  double x;
  double spw1[3], spw2[9], spw3[9], spw4[3];
  double u1[3], h1[3], u2[3], h2[3], u3[3], h3[3];
  double z, cdf;
};

template <typename Getter>
FdParams load_fd(Getter&& get) {
  FdParams p;
  get("w1", p.w1, 3);
  get("b1", p.b1, 3);
  get("a1", p.a1, 3);
  get("w2", p.w2, 9);
  get("b2", p.b2, 3);
  get("a2", p.a2, 3);
  get("w3", p.w3, 9);
  get("b3", p.b3, 3);
  get("a3", p.a3, 3);
  get("w4", p.w4, 3);
  get("b4", &p.b4, 1);
  return p;
}

double fd_forward(const FdParams& p, double x, FdTrace* tr) {
  FdTrace local;
  FdTrace& t = tr ? *tr : local;
  t.x = x;
  for (int i = 0; i < 3; ++i) t.spw1[i] = det_softplus(p.w1[i]);
  for (int i = 0; i < 9; ++i) t.spw2[i] = det_softplus(p.w2[i]);
  for (int i = 0; i < 9; ++i) t.spw3[i] = det_softplus(p.w3[i]);
  for (int i = 0; i < 3; ++i) t.spw4[i] = det_softplus(p.w4[i]);

  for (int i = 0; i < 3; ++i) {
    t.u1[i] = t.spw1[i] * x + p.b1[i];
    t.h1[i] = t.u1[i] + det_tanh(p.a1[i]) * det_tanh(t.u1[i]);
  }
  for (int i = 0; i < 3; ++i) {
    double u = p.b2[i];
    for (int j = 0; j < 3; ++j) u += t.spw2[i * 3 + j] * t.h1[j];
    t.u2[i] = u;
    t.h2[i] = u + det_tanh(p.a2[i]) * det_tanh(u);
  }
  for (int i = 0; i < 3; ++i) {
    double u = p.b3[i];
    for (int j = 0; j < 3; ++j) u += t.spw3[i * 3 + j] * t.h2[j];
    t.u3[i] = u;
    t.h3[i] = u + det_tanh(p.a3[i]) * det_tanh(u);
  }
  double z = p.b4;
  for (int i = 0; i < 3; ++i) z += t.spw4[i] * t.h3[i];
  t.z = z;
  t.cdf = det_sigmoid(z);
  return t.cdf;
}

// Routes dL/dcdf to the parameters and returns dL/dx.
double fd_backward(const FdParams& p, const FdTrace& t, double dcdf, FdGrads& g) {
  const double gz = dcdf * t.cdf * (1.0 - t.cdf);
  g.b4 += gz;
  double gh3[3];
  for (int i = 0; i < 3; ++i) {
    gh3[i] = gz * t.spw4[i];
    g.w4[i] += gz * t.h3[i] * det_sigmoid(p.w4[i]);
  }

  // Stage 3.
  double gh2[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    const double tu = det_tanh(t.u3[i]);
    const double ta = det_tanh(p.a3[i]);
    const double du = gh3[i] * (1.0 + ta * (1.0 - tu * tu));
    g.a3[i] += gh3[i] * tu * (1.0 - ta * ta);
    g.b3[i] += du;
    for (int j = 0; j < 3; ++j) {
      g.w3[i * 3 + j] += du * t.h2[j] * det_sigmoid(p.w3[i * 3 + j]);
      gh2[j] += du * t.spw3[i * 3 + j];
    }
  }
  // Stage 2.
  double gh1[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    const double tu = det_tanh(t.u2[i]);
    const double ta = det_tanh(p.a2[i]);
    const double du = gh2[i] * (1.0 + ta * (1.0 - tu * tu));
    g.a2[i] += gh2[i] * tu * (1.0 - ta * ta);
    g.b2[i] += du;
    for (int j = 0; j < 3; ++j) {
      g.w2[i * 3 + j] += du * t.h1[j] * det_sigmoid(p.w2[i * 3 + j]);
      gh1[j] += du * t.spw2[i * 3 + j];
    }
  }
  // Stage 1.
  double gx = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double tu = det_tanh(t.u1[i]);
    const double ta = det_tanh(p.a1[i]);
    const double du = gh1[i] * (1.0 + ta * (1.0 - tu * tu));
    g.a1[i] += gh1[i] * tu * (1.0 - ta * ta);
    g.b1[i] += du;
    g.w1[i] += du * t.x * det_sigmoid(p.w1[i]);
    gx += du * t.spw1[i];
  }
  return gx;
}

}  // namespace

template <typename S>
void FactorizedDensity::add_params(ParamStore<S>& ps, Rng& rng, int group) const {
  const int C = channels;
  auto uni = [&](std::vector<int> shape, double lo, double hi) {
    Tensor<S> t(std::move(shape));
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = S(rng.uniform(lo, hi));
    return t;
  };
  // Raw weights start near inv_softplus(0.37), which makes the composed CDF
  // slope roughly logistic at the origin.
  auto w_init = [&](std::vector<int> shape) {
    Tensor<S> t(std::move(shape));
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = S(-0.806 + rng.uniform(-0.05, 0.05));
    return t;
  };
  ps.add(prefix + ".w1", w_init({C, 3}), group);
  ps.add(prefix + ".b1", uni({C, 3}, -0.5, 0.5), group);
  ps.add(prefix + ".a1", Tensor<S>({C, 3}), group);
  ps.add(prefix + ".w2", w_init({C, 9}), group);
  ps.add(prefix + ".b2", uni({C, 3}, -0.5, 0.5), group);
  ps.add(prefix + ".a2", Tensor<S>({C, 3}), group);
  ps.add(prefix + ".w3", w_init({C, 9}), group);
  ps.add(prefix + ".b3", uni({C, 3}, -0.5, 0.5), group);
  ps.add(prefix + ".a3", Tensor<S>({C, 3}), group);
  ps.add(prefix + ".w4", w_init({C, 3}), group);
  ps.add(prefix + ".b4", Tensor<S>({C, 1}), group);
}

template void FactorizedDensity::add_params<float>(ParamStore<float>&, Rng&, int) const;
template void FactorizedDensity::add_params<double>(ParamStore<double>&, Rng&, int) const;

namespace {

FdParams fd_from_store(const ParamStore<float>& ps, const std::string& prefix, int channel) {
  return load_fd([&](const char* nm, double* dst, int n) {
    const Tensor<float>& t = ps.value(prefix + "." + nm);
    for (int i = 0; i < n; ++i) dst[i] = double(t[Eigen::Index(channel) * n + i]);
  });
}

}  // namespace

double FactorizedDensity::cdf(const ParamStore<float>& ps, int channel, double x) const {
  const FdParams p = fd_from_store(ps, prefix, channel);
  return fd_forward(p, x, nullptr);
}

double FactorizedDensity::bits(const ParamStore<float>& ps, int channel, double yhat) const {
  const FdParams p = fd_from_store(ps, prefix, channel);
  const double m = fd_forward(p, yhat + 0.5, nullptr) - fd_forward(p, yhat - 0.5, nullptr);
  return bits_from_mass(m);
}

CdfTable FactorizedDensity::build_cdf(const ParamStore<float>& ps, int channel) const {
  const FdParams p = fd_from_store(ps, prefix, channel);
  const double extra = double(rc::kTotal - uint32_t(ent::kNumSymbols));
  std::vector<uint32_t> f(size_t(ent::kNumSymbols), 1);
  int64_t assigned = 0;
  double lo = fd_forward(p, ent::kAlphabetMin - 0.5, nullptr);
  for (int i = 0; i < ent::kNumSymbols; ++i) {
    const double hi = fd_forward(p, symbol_to_value(i) + 0.5, nullptr);
    const double mass = std::max(0.0, hi - lo);
    lo = hi;
    const uint32_t r = uint32_t(std::floor(mass * extra + 0.5));
    f[size_t(i)] += r;
    assigned += r;
  }
  if (assigned == 0) {
    f[size_t(value_to_symbol(0))] += uint32_t(extra);
    assigned = int64_t(extra);
  }
  int64_t diff = int64_t(rc::kTotal) - (int64_t(ent::kNumSymbols) + assigned);
  while (diff != 0) {
    size_t imax = 0;
    for (size_t i = 1; i < f.size(); ++i)
      if (f[i] > f[imax]) imax = i;
    if (diff > 0) {
      f[imax] += uint32_t(diff);
      diff = 0;
    } else {
      const int64_t take = std::min(-diff, int64_t(f[imax]) - 1);
      f[imax] -= uint32_t(take);
      diff += take;
      TEC_CHECK(take > 0, "cannot balance cdf table");
    }
  }
  return CdfTable(f);
}

// ---- tape rate ops ---------------------------------------------------------

template <typename S>
Var<S> factorized_rate_bits(Tape<S>& t, Var<S> y, const FactorizedDensity& density,
                            Binding<S>& bind, Tensor<S> weight) {
  const char* names[11] = {"w1", "b1", "a1", "w2", "b2", "a2", "w3", "b3", "a3", "w4", "b4"};
  std::array<Var<S>, 11> pv;
  for (int i = 0; i < 11; ++i) pv[size_t(i)] = bind(density.prefix + "." + names[i]);

  const Tensor<S>& yv = t.val(y);
  const int C = density.channels;
  TEC_CHECK(yv.rank() >= 2 && yv.dim(1) == C, "factorized rate: channel mismatch");
  Eigen::Index plane = 1;
  for (int d = 2; d < yv.rank(); ++d) plane *= yv.dim(d);

  double total = 0.0;
  std::vector<FdParams> per_channel;
  per_channel.reserve(size_t(C));
  for (int c = 0; c < C; ++c) {
    per_channel.push_back(load_fd([&](const char* nm, double* dst, int n) {
      int k = 0;
      while (strcmp(names[k], nm) != 0) ++k;
      const Tensor<S>& tv = t.val(pv[size_t(k)]);
      for (int i = 0; i < n; ++i) dst[i] = double(tv[Eigen::Index(c) * n + i]);
    }));
  }

  for (Eigen::Index i = 0; i < yv.size(); ++i) {
    const S w = weight.empty() ? S(1) : weight[i];
    if (w == S(0)) continue;
    const int c = int((i / plane) % C);
    const FdParams& p = per_channel[size_t(c)];
    const double x = double(yv[i]);
    const double mass = fd_forward(p, x + 0.5, nullptr) - fd_forward(p, x - 0.5, nullptr);
    total += double(w) * bits_from_mass(mass);
  }

  const bool rg = t.requires_grad(y) || t.requires_grad(pv[0]);
  return t.make(
      Tensor<S>::scalar(S(total)), rg,
      [y, pv, w = std::move(weight), plane, C](Tape<S>& tp, const Tensor<S>& gout) {
        const Tensor<S>& yv = tp.val(y);
        const double g0 = double(gout[0]);
        Tensor<S> gy(yv.shape());
        std::vector<FdParams> pc;
        std::vector<FdGrads> gc(static_cast<size_t>(C));
        const char* names[11] = {"w1", "b1", "a1", "w2", "b2", "a2",
                                 "w3", "b3", "a3", "w4", "b4"};
        const int sizes[11] = {3, 3, 3, 9, 3, 3, 9, 3, 3, 3, 1};
        for (int c = 0; c < C; ++c) {
          pc.push_back(load_fd([&](const char* nm, double* dst, int n) {
            int k = 0;
            while (strcmp(names[k], nm) != 0) ++k;
            const Tensor<S>& tv = tp.val(pv[size_t(k)]);
            for (int i = 0; i < n; ++i) dst[i] = double(tv[Eigen::Index(c) * n + i]);
          }));
        }
        for (Eigen::Index i = 0; i < yv.size(); ++i) {
          const S wi = w.empty() ? S(1) : w[i];
          if (wi == S(0)) continue;
          const int c = int((i / plane) % C);
          const FdParams& p = pc[size_t(c)];
          FdTrace thi, tlo;
          const double x = double(yv[i]);
          const double hi = fd_forward(p, x + 0.5, &thi);
          const double lo = fd_forward(p, x - 0.5, &tlo);
          const double mass = hi - lo;
          if (mass <= ent::kTailMass) continue;  // floored: zero gradient
          const double dmass = -g0 * double(wi) * kInvLn2 / mass;
          double gx = fd_backward(p, thi, dmass, gc[size_t(c)]);
          gx += fd_backward(p, tlo, -dmass, gc[size_t(c)]);
          gy[i] += S(gx);
        }
        tp.accum(y, std::move(gy));
        // Scatter per-channel parameter gradients back to the tensors.
        for (int k = 0; k < 11; ++k) {
          if (!tp.requires_grad(pv[size_t(k)])) continue;
          Tensor<S> gp(tp.val(pv[size_t(k)]).shape());
          for (int c = 0; c < C; ++c) {
            const FdGrads& g = gc[size_t(c)];
            const double* src = nullptr;
            switch (k) {
              case 0: src = g.w1; break;
              case 1: src = g.b1; break;
              case 2: src = g.a1; break;
              case 3: src = g.w2; break;
              case 4: src = g.b2; break;
              case 5: src = g.a2; break;
              case 6: src = g.w3; break;
              case 7: src = g.b3; break;
              case 8: src = g.a3; break;
              case 9: src = g.w4; break;
              case 10: src = &g.b4; break;
            }
            for (int i = 0; i < sizes[k]; ++i)
              gp[Eigen::Index(c) * sizes[k] + i] = S(src[i]);
          }
          tp.accum(pv[size_t(k)], std::move(gp));
        }
      });
}

template <typename S>
Var<S> gaussian_rate_bits(Tape<S>& t, Var<S> y, Var<S> mu, Var<S> sigma, Tensor<S> weight,
                          Tensor<S>* per_element_bits) {
  const Tensor<S>& yv = t.val(y);
  const Tensor<S>& mv = t.val(mu);
  const Tensor<S>& sv = t.val(sigma);
  TEC_CHECK(yv.size() == mv.size() && yv.size() == sv.size(), "gaussian rate: size mismatch");

  if (per_element_bits) *per_element_bits = Tensor<S>(yv.shape());
  double total = 0.0;
  for (Eigen::Index i = 0; i < yv.size(); ++i) {
    const S w = weight.empty() ? S(1) : weight[i];
    if (w == S(0)) continue;
    const double b = gaussian_bits(double(yv[i]), double(mv[i]), double(sv[i]));
    if (per_element_bits) (*per_element_bits)[i] = S(b);
    total += double(w) * b;
  }

  const bool rg = t.requires_grad(y) || t.requires_grad(mu) || t.requires_grad(sigma);
  return t.make(
      Tensor<S>::scalar(S(total)), rg,
      [y, mu, sigma, w = std::move(weight)](Tape<S>& tp, const Tensor<S>& gout) {
        const Tensor<S>& yv = tp.val(y);
        const Tensor<S>& mv = tp.val(mu);
        const Tensor<S>& sv = tp.val(sigma);
        const double g0 = double(gout[0]);
        Tensor<S> gy(yv.shape()), gm(yv.shape()), gs(yv.shape());
        constexpr double kInvSqrt2Pi = 0.39894228040143267793994605993438;
        for (Eigen::Index i = 0; i < yv.size(); ++i) {
          const S wi = w.empty() ? S(1) : w[i];
          if (wi == S(0)) continue;
          const double yd = double(yv[i]), md = double(mv[i]), sd = double(sv[i]);
          const double s = std::max(sd, ent::kSigmaMin);
          const double a = (yd + 0.5 - md) / s;
          const double b = (yd - 0.5 - md) / s;
          const double p = det_phi(a) - det_phi(b);
          if (p <= ent::kTailMass) continue;  // floored: zero gradient
          const double pa = kInvSqrt2Pi * det_exp(-0.5 * a * a);
          const double pb = kInvSqrt2Pi * det_exp(-0.5 * b * b);
          const double dp = -g0 * double(wi) * kInvLn2 / p;
          gy[i] = S(dp * (pa - pb) / s);
          gm[i] = S(dp * (pb - pa) / s);
          if (sd > ent::kSigmaMin) gs[i] = S(dp * (pb * b - pa * a) / s);
        }
        tp.accum(y, std::move(gy));
        tp.accum(mu, std::move(gm));
        tp.accum(sigma, std::move(gs));
      });
}

#define TEC_INSTANTIATE(S)                                                                       \
  template Var<S> factorized_rate_bits<S>(Tape<S>&, Var<S>, const FactorizedDensity&,           \
                                          Binding<S>&, Tensor<S>);                              \
  template Var<S> gaussian_rate_bits<S>(Tape<S>&, Var<S>, Var<S>, Var<S>, Tensor<S>,            \
                                        Tensor<S>*);

TEC_INSTANTIATE(float)
TEC_INSTANTIATE(double)
#undef TEC_INSTANTIATE

}  // namespace tec
