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

#include "tec/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace tec {

namespace {

constexpr int kWin = 11;
constexpr double kWinSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;
constexpr double kSsimL = 65535.0;
// Level weights from the original multi-scale formulation.
constexpr double kMsWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

void check_pair(const ImageCube& a, const ImageCube& b) {
  if (a.T != b.T || a.C != b.C || a.H != b.H || a.W != b.W)
    fail_usage("metric inputs have different shapes");
}

double to_psnr(double mse, double peak) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  if (peak <= 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

double band_peak(const ImageCube& ref, int c, PsnrPeak mode) {
  switch (mode) {
    case PsnrPeak::k65535: return 65535.0;
    case PsnrPeak::k10000: return 10000.0;
    case PsnrPeak::kAuto: break;
  }
  uint16_t lo = 65535, hi = 0;
  for (int t = 0; t < ref.T; ++t)
    for (int h = 0; h < ref.H; ++h)
      for (int w = 0; w < ref.W; ++w) {
        const uint16_t v = ref.at(t, c, h, w);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  return double(hi) - double(lo);
}

// One band of one frame as a double matrix.
Eigen::MatrixXd band_plane(const ImageCube& cube, int t, int c) {
  Eigen::MatrixXd m(cube.H, cube.W);
  for (int h = 0; h < cube.H; ++h)
    for (int w = 0; w < cube.W; ++w) m(h, w) = double(cube.at(t, c, h, w));
  return m;
}

Eigen::VectorXd gaussian_window() {
  Eigen::VectorXd g(kWin);
  const double c = (kWin - 1) / 2.0;
  double sum = 0;
  for (int i = 0; i < kWin; ++i) {
    g(i) = std::exp(-0.5 * (i - c) * (i - c) / (kWinSigma * kWinSigma));
    sum += g(i);
  }
  return g / sum;
}

// Valid-region separable filtering: output is (H-10) x (W-10).
Eigen::MatrixXd filter_valid(const Eigen::MatrixXd& x, const Eigen::VectorXd& g) {
  const Eigen::Index oh = x.rows() - kWin + 1, ow = x.cols() - kWin + 1;
  Eigen::MatrixXd rows(oh, x.cols());
  for (Eigen::Index i = 0; i < oh; ++i)
    rows.row(i) = g.transpose() * x.block(i, 0, kWin, x.cols());
  Eigen::MatrixXd out(oh, ow);
  for (Eigen::Index j = 0; j < ow; ++j) out.col(j) = rows.block(0, j, oh, kWin) * g;
  return out;
}

struct SsimParts {
  double mean_ssim = 0;
  double mean_cs = 0;
};

SsimParts ssim_plane(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                     const Eigen::VectorXd& g) {
  const double c1 = (kK1 * kSsimL) * (kK1 * kSsimL);
  const double c2 = (kK2 * kSsimL) * (kK2 * kSsimL);
  const Eigen::MatrixXd mu_a = filter_valid(a, g);
  const Eigen::MatrixXd mu_b = filter_valid(b, g);
  const Eigen::MatrixXd aa = filter_valid(a.cwiseProduct(a), g);
  const Eigen::MatrixXd bb = filter_valid(b.cwiseProduct(b), g);
  const Eigen::MatrixXd ab = filter_valid(a.cwiseProduct(b), g);
  double s_sum = 0, cs_sum = 0;
  for (Eigen::Index i = 0; i < mu_a.rows(); ++i)
    for (Eigen::Index j = 0; j < mu_a.cols(); ++j) {
      const double ma = mu_a(i, j), mb = mu_b(i, j);
      const double va = aa(i, j) - ma * ma;
      const double vb = bb(i, j) - mb * mb;
      const double cab = ab(i, j) - ma * mb;
      const double cs = (2.0 * cab + c2) / (va + vb + c2);
      const double lum = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
      s_sum += lum * cs;
      cs_sum += cs;
    }
  const double n = double(mu_a.rows() * mu_a.cols());
  return {s_sum / n, cs_sum / n};
}

Eigen::MatrixXd downsample2(const Eigen::MatrixXd& x) {
  const Eigen::Index oh = x.rows() / 2, ow = x.cols() / 2;
  Eigen::MatrixXd out(oh, ow);
  for (Eigen::Index i = 0; i < oh; ++i)
    for (Eigen::Index j = 0; j < ow; ++j)
      out(i, j) =
          0.25 * (x(2 * i, 2 * j) + x(2 * i + 1, 2 * j) + x(2 * i, 2 * j + 1) +
                  x(2 * i + 1, 2 * j + 1));
  return out;
}

}  // namespace

PsnrPeak psnr_peak_from_name(const std::string& s) {
  if (s == "65535") return PsnrPeak::k65535;
  if (s == "10000") return PsnrPeak::k10000;
  if (s == "auto") return PsnrPeak::kAuto;
  fail_usage("unknown psnr peak mode: " + s + " (expected 65535, 10000 or auto)");
}

const char* psnr_peak_name(PsnrPeak p) {
  switch (p) {
    case PsnrPeak::k65535: return "65535";
    case PsnrPeak::k10000: return "10000";
    case PsnrPeak::kAuto: return "auto";
  }
  return "?";
}

double psnr(const ImageCube& ref, const ImageCube& test, PsnrPeak mode) {
  check_pair(ref, test);
  double acc = 0;
  for (int c = 0; c < ref.C; ++c) {
    double sq = 0;
    for (int t = 0; t < ref.T; ++t)
      for (int h = 0; h < ref.H; ++h)
        for (int w = 0; w < ref.W; ++w) {
          const double d = double(ref.at(t, c, h, w)) - double(test.at(t, c, h, w));
          sq += d * d;
        }
    const double mse = sq / (double(ref.T) * ref.H * ref.W);
    acc += to_psnr(mse, band_peak(ref, c, mode));
  }
  return acc / double(ref.C);
}

double psnr_region(const ImageCube& ref, const ImageCube& test, const RegionMask& region,
                   PsnrPeak mode) {
  check_pair(ref, test);
  if (region.T != ref.T || region.H != ref.H || region.W != ref.W)
    fail_usage("region mask shape differs from cubes");
  double acc = 0;
  for (int c = 0; c < ref.C; ++c) {
    double sq = 0;
    int64_t n = 0;
    for (int t = 0; t < ref.T; ++t)
      for (int h = 0; h < ref.H; ++h)
        for (int w = 0; w < ref.W; ++w) {
          if (!region.at(t, h, w)) continue;
          const double d = double(ref.at(t, c, h, w)) - double(test.at(t, c, h, w));
          sq += d * d;
          ++n;
        }
    if (n == 0) fail_usage("region mask selects no pixels");
    acc += to_psnr(sq / double(n), band_peak(ref, c, mode));
  }
  return acc / double(ref.C);
}

double ssim(const ImageCube& ref, const ImageCube& test) {
  check_pair(ref, test);
  TEC_CHECK(ref.H >= kWin && ref.W >= kWin, "frames are smaller than the structural window");
  const Eigen::VectorXd g = gaussian_window();
  double acc = 0;
  for (int c = 0; c < ref.C; ++c) {
    double band = 0;
    for (int t = 0; t < ref.T; ++t)
      band += ssim_plane(band_plane(ref, t, c), band_plane(test, t, c), g).mean_ssim;
    acc += band / double(ref.T);
  }
  return acc / double(ref.C);
}

double ms_ssim(const ImageCube& ref, const ImageCube& test) {
  check_pair(ref, test);
  TEC_CHECK(ref.H >= kWin && ref.W >= kWin, "frames are smaller than the structural window");
  // Number of levels that keep the window valid after repeated halving.
  int levels = 1;
  int h = ref.H, w = ref.W;
  while (levels < 5 && h / 2 >= kWin && w / 2 >= kWin) {
    ++levels;
    h /= 2;
    w /= 2;
  }
  double wsum = 0;
  for (int l = 0; l < levels; ++l) wsum += kMsWeights[l];

  const Eigen::VectorXd g = gaussian_window();
  double acc = 0;
  for (int c = 0; c < ref.C; ++c) {
    double band = 0;
    for (int t = 0; t < ref.T; ++t) {
      Eigen::MatrixXd a = band_plane(ref, t, c);
      Eigen::MatrixXd b = band_plane(test, t, c);
      double prod = 1.0;
      for (int l = 0; l < levels; ++l) {
        const SsimParts parts = ssim_plane(a, b, g);
        const double wl = kMsWeights[l] / wsum;
        const double v = l + 1 == levels ? parts.mean_ssim : parts.mean_cs;
        prod *= std::pow(std::max(v, 0.0), wl);
        if (l + 1 < levels) {
          a = downsample2(a);
          b = downsample2(b);
        }
      }
      band += prod;
    }
    acc += band / double(ref.T);
  }
  return acc / double(ref.C);
}

double bppbf(const TecbFile& file) {
  const TecbHeader& h = file.header;
  const double denom = double(h.H) * double(h.W) * double(h.C) * double(h.T);
  TEC_CHECK(denom > 0, "stream header has empty dimensions");
  return double(file.payload_bytes()) * 8.0 / denom;
}

std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string rd_csv(const std::vector<RdRecord>& records) {
  std::ostringstream os;
  os << "family,budget,lambda,bppbf,psnr,ssim,msssim,bytes\n";
  for (const auto& r : records) {
    os << r.family << ',' << r.budget << ',' << r.lambda << ',' << format_metric(r.bppbf) << ','
       << format_metric(r.psnr) << ',' << format_metric(r.ssim) << ','
       << format_metric(r.msssim) << ',' << r.bytes << '\n';
  }
  return os.str();
}

std::string rd_json(const std::vector<RdRecord>& records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) {
    nlohmann::json j;
    j["family"] = r.family;
    j["budget"] = r.budget;
    j["lambda"] = r.lambda;
    j["bppbf"] = r.bppbf;
    j["psnr"] = std::isinf(r.psnr) ? nlohmann::json(format_metric(r.psnr)) : nlohmann::json(r.psnr);
    j["ssim"] = r.ssim;
    j["msssim"] = r.msssim;
    j["bytes"] = r.bytes;
    arr.push_back(j);
  }
  return arr.dump(2);
}

}  // namespace tec
