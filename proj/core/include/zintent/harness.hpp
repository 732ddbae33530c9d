// core/include/zintent/harness.hpp

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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zintent/config.hpp"
#include "zintent/corpus.hpp"
#include "zintent/student.hpp"
#include "zintent/teacher.hpp"
#include "zintent/zeroshot.hpp"

namespace zintent {

struct GeneratedCorpus {
  Corpus corpus;
  // Transcripts of every intent's train split; a developer's text-only sentence pool.
  BotDefinition bot;
};

/// Keyword-driven synthetic intents rendered through the pseudo synthesizer plus a noisy channel.
///
/// Intent i owns `keywords_per_intent` tokens; each sentence mixes a subset of
/// them with filler tokens in random order. Natural frames are the synthesized
/// frames plus per-frame Gaussian noise scaled by `audio_noise_sigma`, and an
/// optional per-utterance speaker offset (`speaker_scale`). Splits are 70/10/20 per intent.
GeneratedCorpus generate_corpus(const CorpusSpec& spec, const SynthesizerConfig& synth);

// The train-split transcripts of every intent, as generate_corpus builds its bot.
BotDefinition bot_from_corpus(const Corpus& corpus);

// Same utterances with natural frames rendered again under `spec` (for example another noise sigma).
Corpus rerender_natural_audio(const Corpus& corpus, const CorpusSpec& spec, const SynthesizerConfig& synth);

/// Models behind one grid cell.
struct VariantModels {
  Variant variant = Variant::frozen;
  std::optional<TeacherModel> teacher;
  std::optional<StudentModel> student;
  std::vector<TeacherEpochMetrics> teacher_history;
  std::vector<StudentEpochMetrics> student_history;

  // The audio path used for zero-shot retrieval; the teacher's for mm / mm-cl.
  const AudioBackbone& backbone() const;
  ExtractionHeads heads() const;
  EmbeddingPipeline pipeline(ExtractionLayer layer) const { return EmbeddingPipeline(backbone(), layer, heads()); }
  // Intent accuracy on the seen dev split (teacher variants use transcripts too).
  double supervised_accuracy(std::span<const Utterance* const> utterances) const;
};

// Teacher for mm / mm-cl with the matching contrastive setting.
TeacherModel make_teacher(Variant v, const Corpus& corpus, const RunConfig& config);
StudentModel make_student(const Corpus& corpus, const RunConfig& config, const TeacherModel* teacher,
                          bool distill);

/// Trains the models of `v`. Student variants stu-mm / stu-mm-cl need the matching
/// trained teacher and throw DependencyError without one; frozen trains nothing.
VariantModels train_variant(Variant v, const Corpus& corpus, const RunConfig& config,
                            const TeacherModel* teacher = nullptr);

struct SeedResult {
  std::uint64_t seed = 0;
  double supervised_dev_acc = 0.0;
  double zeroshot_unseen_acc = 0.0;
  double zeroshot_mix_acc = 0.0;
};

struct ExperimentReport {
  Variant variant = Variant::frozen;
  // Means over seeds.
  double supervised_dev_acc = 0.0;
  double zeroshot_unseen_acc = 0.0;
  double zeroshot_mix_acc = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<SeedResult> per_seed;
};

struct ZeroShotScores {
  double unseen = 0.0;
  double mix = 0.0;
};

// Unseen-only and seen+unseen databases of `db_sentences_per_intent` sentences, evaluated on test audio.
ZeroShotScores zero_shot_scores(const EmbeddingPipeline& pipeline, const Corpus& corpus, const BotDefinition& bot,
                                const RunConfig& config);

/// Every variant in `config.variants` for each replicate seed. The corpus stays fixed;
/// seeds drive model initialization, batching and dropout. Teachers are shared
/// between a teacher variant and its student.
std::vector<ExperimentReport> run_variant_grid(const Corpus& corpus, const BotDefinition& bot,
                                               const RunConfig& config);

struct LayerAccuracy {
  ExtractionLayer layer = ExtractionLayer::pooled;
  double accuracy = 0.0;
};

std::vector<LayerAccuracy> layer_ablation(const StudentModel& student, const BotDefinition& bot,
                                          std::span<const Utterance* const> test, const SynthesizerConfig& synth,
                                          std::span<const ExtractionLayer> layers);

struct SweepPoint {
  std::size_t sentences_per_intent = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> accuracies;
};

/// For each size K, `repeats` random K-per-intent subsets of the pool become databases
/// evaluated on `test`. Throws ConfigError when K exceeds the smallest per-intent pool.
std::vector<SweepPoint> sample_size_sweep(const EmbeddingPipeline& pipeline, const BotDefinition& pool,
                                          std::span<const Utterance* const> test, const SynthesizerConfig& synth,
                                          std::span<const std::size_t> sizes, std::size_t repeats,
                                          std::uint64_t seed);

/// Supervised audio-only classifier trained on synthesized audio of `bot` (90/10 split per intent)
/// and scored on the natural `test` audio.
double synth_trained_upper_bound(const BotDefinition& bot, std::span<const Utterance* const> test,
                                 const RunConfig& config);

struct NoisePoint {
  double sigma = 0.0;
  double accuracy = 0.0;
};

// Unseen-intent zero-shot accuracy with the test audio re-rendered at each noise level.
std::vector<NoisePoint> noise_sweep(const EmbeddingPipeline& pipeline, const Corpus& corpus, const BotDefinition& bot,
                                    const RunConfig& config, std::span<const double> sigmas);

void write_grid_csv(std::ostream& out, std::span<const ExperimentReport> reports);
void write_layer_csv(std::ostream& out, std::span<const LayerAccuracy> rows);
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);
void write_noise_csv(std::ostream& out, std::span<const NoisePoint> points);
std::string format_grid_table(std::span<const ExperimentReport> reports);

}  // namespace zintent
