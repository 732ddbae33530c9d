// core/include/zintent/teacher.hpp

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
#include "zintent/training.hpp"

namespace zintent {

struct ModelDims {
  std::size_t raw_audio = 16;
  std::size_t hidden = 64;
  std::size_t embedding = 128;
  std::size_t vocab = 200;
};

struct TeacherOptions {
  double tau = 0.007;
  bool use_contrastive = true;
  // Unit-normalize E_a and E_t rows before the similarity matrix.
  bool normalize_before_sim = true;
  // Scale similarities by tau instead of 1/tau.
  bool tau_literal_multiply = false;
  double projection_dropout = 0.2;
  double fusion_dropout = 0.3;
};

/// Audio+text model: projections, fusion, intent classifier and contrastive alignment.
struct TeacherModel {
  AudioBackbone audio;
  TextBackbone text;
  ProjectionHead audio_head;
  ProjectionHead text_head;
  Dense fusion;      // 2*emb -> emb
  Dense classifier;  // emb -> |seen|
  TeacherOptions options;
  // Class index -> intent id.
  std::vector<IntentId> classes;

  // Backbones are built from their own seeds; heads/fusion/classifier from `init_seed`.
  static TeacherModel create(const ModelDims& dims, const TeacherOptions& options,
                             std::uint64_t audio_seed, std::uint64_t text_seed, std::uint64_t init_seed,
                             std::vector<IntentId> classes, bool audio_top_trainable = true);

  std::size_t embedding_dim() const { return fusion.out_dim(); }

  std::vector<ParamRef> parameters();
  std::vector<ConstParamRef> parameters() const;
};

struct TeacherBatchOutput {
  Matrix E_a;
  Matrix E_t;
  Matrix E_at;
  Matrix logits;
  Matrix C;
};

// relu(fusion([E_a | E_t])) followed by fusion dropout.
Matrix fuse(const TeacherModel& model, const Matrix& E_a, const Matrix& E_t, Rng& rng, bool training);
// Pre-softmax intent logits.
Matrix classify(const TeacherModel& model, const Matrix& E_at);
CrossEntropyResult loss_ic(const Matrix& logits, std::span<const std::size_t> labels);

// Multiplier applied to raw dot products: 1/tau by default, tau when `literal_multiply`.
double similarity_scale(double tau, bool literal_multiply);
// C[i][j] = similarity_scale(tau) * dot(E_a[i], E_t[j]).
Matrix similarity_matrix(const Matrix& E_a, const Matrix& E_t, double tau, bool literal_multiply = false);

struct ContrastiveResult {
  double loss = 0.0;
  Matrix grad_C;
};
/// Symmetric cross-entropy of C along both axes with diagonal targets:
/// 0.5 * (CE(rows of C) + CE(rows of C^T)).
ContrastiveResult loss_cl(const Matrix& C);

double loss_mm(double l_ic, double l_cl, bool use_contrastive);

TeacherBatchOutput teacher_forward(const TeacherModel& model, std::span<const Utterance* const> batch,
                                   Rng& rng, bool training);

/// Precomputed per-utterance inputs; the frozen parts of both backbones.
struct TeacherInput {
  Matrix audio_lower;  // relu(layer1) per frame
  Matrix text_pooled;  // 1 x hidden
  std::size_t label = 0;
};
TeacherInput make_teacher_input(const TeacherModel& model, const Utterance& u);

struct TeacherStep {
  double loss = 0.0;
  double ic_loss = 0.0;
  double cl_loss = 0.0;
  TeacherBatchOutput output;
  // Aligned with the trainable entries of parameters().
  std::vector<Matrix> grads;
};

/// Forward pass plus exact gradients of loss_mm for one batch.
TeacherStep teacher_step(const TeacherModel& model, std::span<const TeacherInput* const> batch, Rng& rng,
                         bool training, bool compute_grads = true);

struct TeacherEpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double ic_loss = 0.0;
  double cl_loss = 0.0;
  double dev_accuracy = 0.0;
  double lr = 0.0;
  // Mean cosine between paired E_a and E_t rows over the train split (eval mode).
  double mean_pair_cosine = 0.0;
};

// Epoch 0 is an eval-mode measurement of the untrained model.
using TeacherEpochCallback = std::function<void(const TeacherEpochMetrics&)>;

std::vector<TeacherEpochMetrics> teacher_train(TeacherModel& model, const Corpus& corpus,
                                               const TrainConfig& config,
                                               const TeacherEpochCallback& on_epoch = {});

// Dev/test accuracy with audio and transcript available.
double teacher_accuracy(const TeacherModel& model, std::span<const Utterance* const> utterances);

// Eval-mode E_at per utterance (N x emb).
Matrix teacher_joint_embeddings(const TeacherModel& model, std::span<const Utterance* const> utterances);

}  // namespace zintent
