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

#include "tec/common.hpp"

#include <fstream>
#include <sstream>

namespace tec {

std::string Rng::save_state() const {
  std::ostringstream os;
  os << gen_;
  os << " " << (have_spare_ ? 1 : 0);
  if (have_spare_) {
    os << " ";
    os.precision(17);
    os << spare_;
  }
  return os.str();
}

void Rng::load_state(const std::string& s) {
  std::istringstream is(s);
  is >> gen_;
  int spare = 0;
  is >> spare;
  have_spare_ = spare != 0;
  if (have_spare_) is >> spare_;
  if (is.fail()) fail_data("malformed RNG state string");
}

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail_data("cannot open file: " + path);
  f.seekg(0, std::ios::end);
  const auto n = f.tellg();
  f.seekg(0);
  std::vector<uint8_t> buf(static_cast<size_t>(n), 0);
  if (n > 0) f.read(reinterpret_cast<char*>(buf.data()), n);
  if (!f) fail_data("cannot read file: " + path);
  return buf;
}

void write_file(const std::string& path, const void* data, size_t n) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail_data("cannot open file for writing: " + path);
  f.write(static_cast<const char*>(data), std::streamsize(n));
  if (!f) fail_data("cannot write file: " + path);
}

}  // namespace tec
