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

#ifndef TEC_RANGE_CODER_HPP_
#define TEC_RANGE_CODER_HPP_

#include <cstdint>
#include <vector>

#include "tec/common.hpp"

namespace tec {

// Carry-less 32-bit range coder (Subbotin style). Frequencies live on a
// fixed 16-bit scale; when low and low+range disagree in the top byte and
// the range is small, the range is truncated to the byte boundary instead
// of propagating carries. Integer-only, so encoder and decoder agree on
// every platform.
namespace rc {
constexpr uint32_t kTotalBits = 16;
constexpr uint32_t kTotal = 1u << kTotalBits;
constexpr uint32_t kTop = 1u << 24;
constexpr uint32_t kBottom = 1u << 16;
}  // namespace rc

// Cumulative frequency table over a dense symbol alphabet. Every frequency
// is at least 1 and the grand total is exactly 2^16, so any symbol stays
// decodable and table construction is pure integer bookkeeping.
class CdfTable {
 public:
  explicit CdfTable(const std::vector<uint32_t>& freqs) {
    TEC_CHECK(!freqs.empty(), "empty frequency table");
    cum_.resize(freqs.size() + 1);
    cum_[0] = 0;
    for (size_t i = 0; i < freqs.size(); ++i) {
      TEC_CHECK(freqs[i] >= 1, "zero frequency in cdf table");
      cum_[i + 1] = cum_[i] + freqs[i];
    }
    TEC_CHECK(cum_.back() == rc::kTotal, "cdf table total must be 2^16");
  }

  int count() const { return int(cum_.size()) - 1; }
  uint32_t cum(int s) const { return cum_[size_t(s)]; }
  uint32_t freq(int s) const { return cum_[size_t(s) + 1] - cum_[size_t(s)]; }
  bool deterministic() const { return count() == 1; }

  // Largest s with cum(s) <= f.
  int find(uint32_t f) const {
    int lo = 0, hi = count() - 1;
    while (lo < hi) {
      const int mid = (lo + hi + 1) / 2;
      if (cum_[size_t(mid)] <= f)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

 private:
  std::vector<uint32_t> cum_;
};

class RangeEncoder {
 public:
  void encode(uint32_t cum, uint32_t freq) {
    range_ >>= rc::kTotalBits;
    low_ += cum * range_;
    range_ *= freq;
    renorm();
  }

  void encode_symbol(const CdfTable& t, int s) {
    if (t.freq(s) == rc::kTotal) return;  // deterministic: zero bits
    encode(t.cum(s), t.freq(s));
  }

  // Terminates the stream; the encoder must not be reused afterwards.
  std::vector<uint8_t> finish() {
    for (int i = 0; i < 4; ++i) {
      out_.push_back(uint8_t(low_ >> 24));
      low_ <<= 8;
    }
    return std::move(out_);
  }

  size_t bytes_pending() const { return out_.size(); }

 private:
  void renorm() {
    while ((low_ ^ (low_ + range_)) < rc::kTop ||
           (range_ < rc::kBottom && ((range_ = (0u - low_) & (rc::kBottom - 1)), true))) {
      out_.push_back(uint8_t(low_ >> 24));
      low_ <<= 8;
      range_ <<= 8;
    }
  }

  uint32_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  RangeDecoder(const uint8_t* data, size_t n) : p_(data), n_(n) {
    for (int i = 0; i < 4; ++i) code_ = code_ << 8 | next_byte();
  }
  explicit RangeDecoder(const std::vector<uint8_t>& b) : RangeDecoder(b.data(), b.size()) {}

  int decode_symbol(const CdfTable& t) {
    if (t.deterministic()) return 0;
    const uint32_t f = peek_freq();
    const int s = t.find(f);
    consume(t.cum(s), t.freq(s));
    return s;
  }

 private:
  uint32_t peek_freq() {
    range_ >>= rc::kTotalBits;
    const uint32_t f = (code_ - low_) / range_;
    return f < rc::kTotal ? f : rc::kTotal - 1;
  }

  void consume(uint32_t cum, uint32_t freq) {
    low_ += cum * range_;
    range_ *= freq;
    while ((low_ ^ (low_ + range_)) < rc::kTop ||
           (range_ < rc::kBottom && ((range_ = (0u - low_) & (rc::kBottom - 1)), true))) {
      code_ = code_ << 8 | next_byte();
      low_ <<= 8;
      range_ <<= 8;
    }
  }

  uint8_t next_byte() {
    // Reading past the end pads with zeros: the final flush bytes make the
    // tail unambiguous, and padding keeps truncated reads detectable by the
    // caller's own checks rather than UB.
    return pos_ < n_ ? p_[pos_++] : 0;
  }

  const uint8_t* p_;
  size_t n_;
  size_t pos_ = 0;
  uint32_t low_ = 0;
  uint32_t range_ = 0xFFFFFFFFu;
  uint32_t code_ = 0;
};

}  // namespace tec

#endif  // TEC_RANGE_CODER_HPP_
