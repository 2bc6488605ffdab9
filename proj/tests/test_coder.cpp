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

#include "tec/entropy.hpp"
#include "tec/range_coder.hpp"

using namespace tec;

namespace {

int sample_from_table(const CdfTable& t, Rng& rng) {
  const uint32_t f = uint32_t(rng.uniform_int(int(rc::kTotal)));
  return t.find(f);
}

}  // namespace

TEST_CASE("cdf table exposes consistent cumulative ranges") {
  const CdfTable t({60000, 5000, 500, 35, 1});
  REQUIRE(t.count() == 5);
  CHECK(t.cum(0) == 0);
  CHECK(t.cum(4) + t.freq(4) == rc::kTotal);
  CHECK(t.freq(1) == 5000);
  CHECK(t.find(0) == 0);
  CHECK(t.find(59999) == 0);
  CHECK(t.find(60000) == 1);
  CHECK(t.find(65534) == 3);
  CHECK(t.find(65535) == 4);
  CHECK_FALSE(t.deterministic());
  CHECK(CdfTable({rc::kTotal}).deterministic());
}

TEST_CASE("skewed symbol stream round trips exactly") {
  const CdfTable t({60000, 5000, 500, 35, 1});
  Rng rng(404);
  std::vector<int> syms(200000);
  for (auto& s : syms) s = sample_from_table(t, rng);

  RangeEncoder enc;
  for (int s : syms) enc.encode_symbol(t, s);
  const std::vector<uint8_t> bytes = enc.finish();

  // Entropy of this table is ~0.66 bits/symbol; the coder should be close.
  double H = 0;
  for (int s = 0; s < t.count(); ++s) {
    const double p = double(t.freq(s)) / double(rc::kTotal);
    H -= p * std::log2(p);
  }
  CHECK(double(bytes.size()) * 8.0 < 1.02 * H * double(syms.size()) + 64.0 * 8.0);

  RangeDecoder dec(bytes);
  for (size_t i = 0; i < syms.size(); ++i) {
    REQUIRE(dec.decode_symbol(t) == syms[i]);
  }
}

TEST_CASE("interleaved per-position tables round trip") {
  const CdfTable a({60000, 5000, 500, 35, 1});
  const CdfTable b({100, 1000, 10000, 54436});
  const CdfTable c({32768, 32768});
  const CdfTable* tables[3] = {&a, &b, &c};

  Rng rng(7);
  std::vector<int> syms(30000);
  RangeEncoder enc;
  for (size_t i = 0; i < syms.size(); ++i) {
    const CdfTable& t = *tables[i % 3];
    syms[i] = sample_from_table(t, rng);
    enc.encode_symbol(t, syms[i]);
  }
  const std::vector<uint8_t> bytes = enc.finish();

  RangeDecoder dec(bytes);
  for (size_t i = 0; i < syms.size(); ++i) {
    REQUIRE(dec.decode_symbol(*tables[i % 3]) == syms[i]);
  }
}

TEST_CASE("deterministic tables cost zero bytes") {
  const CdfTable det({rc::kTotal});
  const CdfTable t({30000, 35536});
  Rng rng(11);
  std::vector<int> syms(5000);
  for (auto& s : syms) s = sample_from_table(t, rng);

  RangeEncoder plain;
  for (int s : syms) plain.encode_symbol(t, s);

  RangeEncoder mixed;
  for (int s : syms) {
    mixed.encode_symbol(det, 0);
    mixed.encode_symbol(t, s);
    mixed.encode_symbol(det, 0);
  }

  const std::vector<uint8_t> pb = plain.finish();
  const std::vector<uint8_t> mb = mixed.finish();
  CHECK(pb == mb);

  RangeDecoder dec(mb);
  for (int s : syms) {
    CHECK(dec.decode_symbol(det) == 0);
    REQUIRE(dec.decode_symbol(t) == s);
    CHECK(dec.decode_symbol(det) == 0);
  }
}

TEST_CASE("boundary symbols with frequency one survive long runs") {
  // Stresses the carry-less renormalization: symbol 2 occupies the single
  // topmost frequency slot, symbol 0 the single lowest.
  const CdfTable t({1, 65534, 1});
  std::vector<int> syms;
  for (int i = 0; i < 3000; ++i) syms.push_back(i % 7 == 0 ? 2 : (i % 11 == 0 ? 0 : 1));

  RangeEncoder enc;
  for (int s : syms) enc.encode_symbol(t, s);
  const std::vector<uint8_t> bytes = enc.finish();
  RangeDecoder dec(bytes);
  for (int s : syms) REQUIRE(dec.decode_symbol(t) == s);
}

TEST_CASE("empty payload decodes nothing and encoder flushes four bytes") {
  RangeEncoder enc;
  const std::vector<uint8_t> bytes = enc.finish();
  CHECK(bytes.size() == 4);
  RangeDecoder dec(bytes);  // must not read out of bounds
  (void)dec;
}
