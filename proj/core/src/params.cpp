// core/src/params.cpp

// Copyright 2026 The zintent Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "zintent/params.hpp"

#include <bit>
#include <charconv>
#include <cstdio>

#include "zintent/errors.hpp"

namespace zintent {

std::vector<Matrix*> trainable_values(std::span<const ParamRef> params) {
  std::vector<Matrix*> out;
  for (const auto& p : params) {
    if (p.trainable) out.push_back(p.value);
  }
  return out;
}

void Fingerprint::add_bytes(const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    hash_ ^= bytes[i];
    hash_ *= 0x100000001b3ULL;
  }
}

void Fingerprint::add(std::string_view s) {
  add(static_cast<std::uint64_t>(s.size()));
  add_bytes(s.data(), s.size());
}

void Fingerprint::add(std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  add_bytes(b, 8);
}

void Fingerprint::add(double v) { add(std::bit_cast<std::uint64_t>(v)); }

void Fingerprint::add(const Matrix& m) {
  add(static_cast<std::uint64_t>(m.rows()));
  add(static_cast<std::uint64_t>(m.cols()));
  for (double v : m.values()) add(v);
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t from_hex(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw FormatError("invalid hex value '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t fingerprint_params(std::span<const ConstParamRef> params) {
  Fingerprint fp;
  for (const auto& p : params) {
    fp.add(p.name);
    fp.add(*p.value);
  }
  return fp.value();
}

}  // namespace zintent
