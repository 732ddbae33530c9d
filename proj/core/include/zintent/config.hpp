// core/include/zintent/config.hpp

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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "zintent/student.hpp"
#include "zintent/teacher.hpp"
#include "zintent/training.hpp"
#include "zintent/zeroshot.hpp"

namespace zintent {

/// Shape of the synthetic intent corpus.
struct CorpusSpec {
  std::size_t n_intents_seen = 6;
  std::size_t n_intents_unseen = 12;
  std::size_t vocab_size = 200;
  std::size_t keywords_per_intent = 4;
  std::size_t sentences_per_intent = 300;
  std::size_t sentence_length_min = 6;
  std::size_t sentence_length_max = 10;
  double audio_noise_sigma = 0.1;
  // Per-utterance speaker offset, confined to a fixed low-rank subspace,
  // in units of audio_noise_sigma. Off by default.
  std::size_t speaker_rank = 4;
  double speaker_scale = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

enum class Variant { audio_only, mm, mm_cl, stu_mm, stu_mm_cl, frozen };

std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);
bool is_teacher_variant(Variant v);
const std::vector<Variant>& all_variants();

/// Every knob of a run. Defaults are the documented ones; a config file only overrides.
struct RunConfig {
  CorpusSpec corpus;
  SynthesizerConfig synth;

  std::size_t hidden_dim = 64;
  std::size_t embedding_dim = 128;
  bool audio_top_trainable = true;

  TeacherOptions teacher;
  StudentOptions student;
  bool init_from_teacher_backbone = false;

  TrainConfig train;

  ExtractionLayer layer = ExtractionLayer::pooled;
  std::size_t db_sentences_per_intent = 30;
  std::size_t top_k = 3;

  // Master seed; model, backbone and training seeds derive from it.
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> replicate_seeds = {1, 2, 3};
  std::vector<Variant> variants = all_variants();
  std::vector<std::size_t> sweep_sizes = {5, 10, 20, 40};
  std::size_t sweep_repeats = 10;
  std::vector<double> noise_levels = {0.0, 0.5, 2.0};

  std::string output_dir = "out";

  ModelDims dims() const { return {synth.audio_dim, hidden_dim, embedding_dim, corpus.vocab_size}; }

  std::uint64_t audio_backbone_seed() const;
  std::uint64_t text_backbone_seed() const;
  std::uint64_t teacher_init_seed() const;
  std::uint64_t student_init_seed() const;
  TrainConfig teacher_train_config() const;
  TrainConfig student_train_config() const;

  // Same configuration re-seeded for one replicate (corpus included).
  RunConfig with_seed(std::uint64_t s) const;

  void validate() const;
};

/// INI-style text: `[section]` headers and `key = value` lines, whole-line `;` or `#` comments.
/// Unknown sections or keys are rejected with ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);
// One `section.key` override with the same parsing as the file; does not re-validate.
void set_config_value(RunConfig& cfg, std::string_view dotted_key, const std::string& value);
// Fully resolved configuration in the same format; parse_config(dump) reproduces it.
std::string dump_config(const RunConfig& cfg);

}  // namespace zintent
