// core/src/checkpoint.cpp

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

#include "zintent/checkpoint.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "binary_io.hpp"
#include "zintent/errors.hpp"

namespace zintent {

namespace {

constexpr char kMagic[8] = {'Z', 'I', 'N', 'T', 'C', 'K', 'P', 'T'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

template <typename Params>
std::vector<NamedTensor> collect(const Params& params) {
  std::vector<NamedTensor> out;
  for (const auto& p : params) out.push_back({p.name, *p.value, p.trainable});
  return out;
}

std::uint64_t tensors_fingerprint(const std::vector<NamedTensor>& tensors) {
  std::vector<ConstParamRef> refs;
  for (const auto& t : tensors) refs.push_back({t.name, &t.value, t.trainable});
  return fingerprint_params(refs);
}

void assign(std::vector<ParamRef> params, const Checkpoint& ckpt) {
  std::map<std::string, const NamedTensor*> by_name;
  for (const auto& t : ckpt.tensors) {
    if (!by_name.emplace(t.name, &t).second) throw FormatError("checkpoint: duplicate tensor '" + t.name + "'");
  }
  if (by_name.size() != params.size()) {
    throw FormatError("checkpoint: expected " + std::to_string(params.size()) + " tensors, found " +
                      std::to_string(by_name.size()));
  }
  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) throw FormatError("checkpoint: missing tensor '" + p.name + "'");
    const Matrix& src = it->second->value;
    if (src.rows() != p.value->rows() || src.cols() != p.value->cols()) {
      throw FormatError("checkpoint: tensor '" + p.name + "' has shape " + src.shape() + ", model expects " +
                        p.value->shape());
    }
    *p.value = src;
  }
}

bool layer2_trainable(const Checkpoint& ckpt) {
  for (const auto& t : ckpt.tensors) {
    if (t.name == "audio.layer2.w") return t.trainable;
  }
  throw FormatError("checkpoint: missing tensor 'audio.layer2.w'");
}

}  // namespace

std::string_view kind_name(ModelKind kind) { return kind == ModelKind::teacher ? "teacher" : "student"; }

Checkpoint make_checkpoint(const TeacherModel& model, Variant variant, const RunConfig& config) {
  Checkpoint c;
  c.kind = ModelKind::teacher;
  c.variant = variant;
  c.config = config;
  c.classes = model.classes;
  c.tensors = collect(model.parameters());
  c.fingerprint = tensors_fingerprint(c.tensors);
  return c;
}

Checkpoint make_checkpoint(const StudentModel& model, Variant variant, const RunConfig& config) {
  Checkpoint c;
  c.kind = ModelKind::student;
  c.variant = variant;
  c.config = config;
  c.classes = model.classes;
  c.tensors = collect(model.parameters());
  c.fingerprint = tensors_fingerprint(c.tensors);
  return c;
}

TeacherModel restore_teacher(const Checkpoint& ckpt) {
  if (ckpt.kind != ModelKind::teacher) throw ConfigError("checkpoint holds a student, a teacher was expected");
  const RunConfig& cfg = ckpt.config;
  TeacherOptions opts = cfg.teacher;
  opts.use_contrastive = ckpt.variant == Variant::mm_cl;
  TeacherModel m = TeacherModel::create(cfg.dims(), opts, cfg.audio_backbone_seed(), cfg.text_backbone_seed(),
                                        cfg.teacher_init_seed(), ckpt.classes, layer2_trainable(ckpt));
  assign(m.parameters(), ckpt);
  return m;
}

StudentModel restore_student(const Checkpoint& ckpt) {
  if (ckpt.kind != ModelKind::student) throw ConfigError("checkpoint holds a teacher, a student was expected");
  const RunConfig& cfg = ckpt.config;
  StudentOptions opts = cfg.student;
  opts.distill = ckpt.variant == Variant::stu_mm || ckpt.variant == Variant::stu_mm_cl;
  AudioBackbone backbone =
      AudioBackbone::create(cfg.synth.audio_dim, cfg.hidden_dim, cfg.audio_backbone_seed(), layer2_trainable(ckpt));
  StudentModel m = StudentModel::create(std::move(backbone), cfg.embedding_dim, opts, cfg.student_init_seed(),
                                        ckpt.classes);
  assign(m.parameters(), ckpt);
  return m;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  using namespace detail;
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, ckpt.format_version);
  put_u8(out, ckpt.kind == ModelKind::teacher ? 0 : 1);
  put_str(out, std::string(variant_name(ckpt.variant)));
  put_str(out, dump_config(ckpt.config));
  put_u64(out, ckpt.classes.size());
  for (IntentId c : ckpt.classes) put_u32(out, c);
  put_u64(out, ckpt.tensors.size());
  for (const auto& t : ckpt.tensors) {
    put_str(out, t.name);
    put_u8(out, t.trainable ? 1 : 0);
    put_u64(out, t.value.rows());
    put_u64(out, t.value.cols());
    for (double v : t.value.values()) put_f64(out, v);
  }
  put_u64(out, ckpt.fingerprint);
  if (!out) throw Error("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  detail::Reader r(in, "checkpoint");
  char magic[sizeof(kMagic)];
  r.bytes(magic, sizeof(magic));
  if (!std::equal(magic, magic + sizeof(magic), kMagic)) throw FormatError("checkpoint: not a zintent checkpoint");
  Checkpoint c;
  c.format_version = r.u32();
  if (c.format_version != Checkpoint::kFormatVersion) {
    throw FormatError("checkpoint: unsupported format version " + std::to_string(c.format_version) + " (expected " +
                      std::to_string(Checkpoint::kFormatVersion) + ")");
  }
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw FormatError("checkpoint: unknown model kind " + std::to_string(kind));
  c.kind = kind == 0 ? ModelKind::teacher : ModelKind::student;
  c.variant = parse_variant(r.str(64));
  std::istringstream cfg_text(r.str());
  c.config = parse_config(cfg_text);

  const std::uint64_t n_classes = r.u64();
  if (n_classes > kMaxElements) throw FormatError("checkpoint: implausible class count");
  for (std::uint64_t i = 0; i < n_classes; ++i) c.classes.push_back(r.u32());

  const std::uint64_t n_tensors = r.u64();
  if (n_tensors > 4096) throw FormatError("checkpoint: implausible tensor count");
  for (std::uint64_t i = 0; i < n_tensors; ++i) {
    NamedTensor t;
    t.name = r.str(256);
    t.trainable = r.u8() != 0;
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows > kMaxElements || cols > kMaxElements || rows * cols > kMaxElements) {
      throw FormatError("checkpoint: implausible shape for '" + t.name + "'");
    }
    t.value = Matrix(rows, cols);
    for (double& v : t.value.values()) v = r.f64();
    c.tensors.push_back(std::move(t));
  }
  c.fingerprint = r.u64();
  if (tensors_fingerprint(c.tensors) != c.fingerprint) {
    throw FormatError("checkpoint: fingerprint mismatch, file is corrupt");
  }
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint '" + path + "'");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace zintent
