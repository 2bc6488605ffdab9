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

#ifndef TEC_COMMON_HPP_
#define TEC_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace tec {

// Process exit codes shared by the CLI and thrown errors.
enum class Fault : int {
  kUsage = 2,      // bad arguments or config
  kData = 3,       // malformed file, shape mismatch, value out of range
  kInvariant = 4,  // internal contract violated (a bug, not bad input)
};

class Error : public std::runtime_error {
 public:
  Error(Fault fault, const std::string& msg) : std::runtime_error(msg), fault_(fault) {}
  Fault fault() const { return fault_; }

 private:
  Fault fault_;
};

[[noreturn]] inline void fail_data(const std::string& msg) { throw Error(Fault::kData, msg); }
[[noreturn]] inline void fail_invariant(const std::string& msg) { throw Error(Fault::kInvariant, msg); }
[[noreturn]] inline void fail_usage(const std::string& msg) { throw Error(Fault::kUsage, msg); }

#define TEC_CHECK(cond, msg)            \
  do {                                  \
    if (!(cond)) ::tec::fail_invariant(msg); \
  } while (0)

// Deterministic RNG front-end. mt19937_64 output is pinned by the standard;
// the distribution shaping below is ours, so streams replay identically on
// any platform for a given seed. Never use std::*_distribution here.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0. Rejection-free modulo is fine at our
  // scales (bias < 2^-50 for n below a few million).
  int64_t uniform_int(int64_t n) { return int64_t(gen_() % uint64_t(n)); }

  // Standard normal via Box-Muller. One value per call; the spare is kept.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::string save_state() const;
  void load_state(const std::string& s);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// FNV-1a over a byte range; used to fingerprint checkpoint payloads.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const uint8_t*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

// Little-endian scalar append / read for file headers.
inline void put_u8(std::vector<uint8_t>& b, uint8_t v) { b.push_back(v); }
inline void put_u16(std::vector<uint8_t>& b, uint16_t v) {
  b.push_back(uint8_t(v & 0xff));
  b.push_back(uint8_t(v >> 8));
}
inline void put_u32(std::vector<uint8_t>& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(uint8_t((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::vector<uint8_t>& b, uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(uint8_t((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  ByteReader(const uint8_t* data, size_t n) : p_(data), n_(n) {}
  size_t remaining() const { return n_ - pos_; }
  size_t pos() const { return pos_; }
  uint8_t u8() { return need(1), p_[pos_++]; }
  uint16_t u16() {
    need(2);
    uint16_t v = uint16_t(p_[pos_]) | uint16_t(p_[pos_ + 1]) << 8;
    pos_ += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(p_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(p_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  const uint8_t* bytes(size_t n) {
    need(n);
    const uint8_t* q = p_ + pos_;
    pos_ += n;
    return q;
  }

 private:
  void need(size_t n) const {
    if (pos_ + n > n_) fail_data("truncated input: wanted " + std::to_string(n) + " bytes at offset " + std::to_string(pos_));
  }
  const uint8_t* p_;
  size_t n_;
  size_t pos_ = 0;
};

std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const void* data, size_t n);
inline void write_file(const std::string& path, const std::vector<uint8_t>& b) {
  write_file(path, b.data(), b.size());
}

}  // namespace tec

#endif  // TEC_COMMON_HPP_
