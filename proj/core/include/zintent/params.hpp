// core/include/zintent/params.hpp

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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zintent/matrix.hpp"

namespace zintent {

/// Named view of one parameter tensor owned by a model.
struct ParamRef {
  std::string name;
  Matrix* value = nullptr;
  bool trainable = false;
};

struct ConstParamRef {
  std::string name;
  const Matrix* value = nullptr;
  bool trainable = false;
};

std::vector<Matrix*> trainable_values(std::span<const ParamRef> params);

/// FNV-1a 64 over bytes.
class Fingerprint {
 public:
  void add_bytes(const void* data, std::size_t n);
  void add(std::string_view s);
  void add(std::uint64_t v);
  void add(double v);
  void add(const Matrix& m);
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t v);
std::uint64_t from_hex(std::string_view s);

// Fingerprint over names, shapes and values of every parameter.
std::uint64_t fingerprint_params(std::span<const ConstParamRef> params);

}  // namespace zintent
