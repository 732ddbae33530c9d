// core/include/zintent/checkpoint.hpp

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
#include <iosfwd>
#include <string>
#include <vector>

#include "zintent/config.hpp"
#include "zintent/student.hpp"
#include "zintent/teacher.hpp"

namespace zintent {

enum class ModelKind { teacher, student };

std::string_view kind_name(ModelKind kind);

struct NamedTensor {
  std::string name;
  Matrix value;
  bool trainable = false;

  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

/// Everything needed to rebuild a trained model: tensors by name, the intent
/// space, and the run configuration it was trained with.
struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  std::uint32_t format_version = kFormatVersion;
  ModelKind kind = ModelKind::student;
  Variant variant = Variant::audio_only;
  RunConfig config;
  std::vector<IntentId> classes;
  std::vector<NamedTensor> tensors;
  // fingerprint_params over the tensors, checked on load.
  std::uint64_t fingerprint = 0;
};

Checkpoint make_checkpoint(const TeacherModel& model, Variant variant, const RunConfig& config);
Checkpoint make_checkpoint(const StudentModel& model, Variant variant, const RunConfig& config);

// Throw ConfigError on a kind mismatch and FormatError on missing, extra or misshapen tensors.
TeacherModel restore_teacher(const Checkpoint& ckpt);
StudentModel restore_student(const Checkpoint& ckpt);

/// Binary layout, all integers and floats little-endian:
///   "ZINTCKPT" u32 version u8 kind str variant str config
///   u64 n_classes u32[n] classes
///   u64 n_tensors { str name u8 trainable u64 rows u64 cols f64[rows*cols] }
///   u64 fingerprint
/// where str is u64 length followed by the bytes.
void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
// Throws FormatError on bad magic, unsupported version, truncation or fingerprint mismatch.
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace zintent
