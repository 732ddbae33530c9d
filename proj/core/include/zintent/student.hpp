// core/include/zintent/student.hpp

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
#include <functional>
#include <span>
#include <vector>

#include "zintent/corpus.hpp"
#include "zintent/encoders.hpp"
#include "zintent/layers.hpp"
#include "zintent/params.hpp"
#include "zintent/teacher.hpp"
#include "zintent/training.hpp"

namespace zintent {

struct StudentOptions {
  double gamma = 10.0;
  // Off: plain audio-only classifier; the embedding-matching term is dropped.
  bool distill = true;
  double projection_dropout = 0.2;
};

/// Audio-only intent classifier: backbone, projection, relu feed-forward (E_s), classifier.
struct StudentModel {
  AudioBackbone audio;
  ProjectionHead audio_head;
  Dense feedforward;  // emb -> emb
  Dense classifier;   // emb -> |seen|
  StudentOptions options;
  std::vector<IntentId> classes;

  // Takes ownership of a backbone copy; heads from `init_seed`.
  static StudentModel create(AudioBackbone backbone, std::size_t embedding_dim, const StudentOptions& options,
                             std::uint64_t init_seed, std::vector<IntentId> classes);

  std::size_t embedding_dim() const { return feedforward.out_dim(); }

  std::vector<ParamRef> parameters();
  std::vector<ConstParamRef> parameters() const;
};

struct StudentOutput {
  Matrix E_s;     // 1 x emb
  Matrix logits;  // 1 x |seen|
};

StudentOutput student_forward(const StudentModel& model, const Matrix& frames, Rng& rng, bool training);

struct EmbeddingLoss {
  double loss = 0.0;
  Matrix grad_E_s;
};
/// Batch mean of squared row distances |E_at[i] - E_s[i]|^2; gradient 2 (E_s - E_at) / N.
EmbeddingLoss loss_student(const Matrix& E_at, const Matrix& E_s);

double loss_total(double l_intent, double l_student, double gamma);

struct StudentInput {
  Matrix audio_lower;
  std::size_t label = 0;
  // Teacher E_at target (1 x emb); empty when not distilling.
  Matrix target;
};

struct StudentStep {
  double intent_loss = 0.0;
  double student_loss = 0.0;
  double total_loss = 0.0;
  Matrix E_s;
  Matrix logits;
  // Aligned with the trainable entries of parameters().
  std::vector<Matrix> grads;
};

/// Forward pass plus exact gradients of loss_total for one batch. The
/// embedding term is evaluated whenever targets are present and weighted by
/// `gamma` (0 when not distilling).
StudentStep student_step(const StudentModel& model, std::span<const StudentInput* const> batch, Rng& rng,
                         bool training, bool compute_grads = true);

struct StudentEpochMetrics {
  std::size_t epoch = 0;
  double intent_loss = 0.0;
  double student_loss = 0.0;
  double total_loss = 0.0;
  double dev_accuracy = 0.0;
  // Eval-mode mean |E_at - E_s|^2 over the train split; NaN without a teacher.
  double mean_embed_distance = 0.0;
  double lr = 0.0;
};

using StudentEpochCallback = std::function<void(const StudentEpochMetrics&)>;

/// Trains the student on the seen train split. `teacher` may be null for the
/// audio-only baseline; it is only read, in eval mode.
std::vector<StudentEpochMetrics> student_train(StudentModel& student, const TeacherModel* teacher,
                                               const Corpus& corpus, const TrainConfig& config,
                                               const StudentEpochCallback& on_epoch = {});

double student_accuracy(const StudentModel& model, std::span<const Utterance* const> utterances);

}  // namespace zintent
