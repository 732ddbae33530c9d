// tests/unit/student_test.cpp

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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "support/fixtures.hpp"
#include "support/testing.hpp"
#include "zintent/errors.hpp"
#include "zintent/student.hpp"

namespace zintent {
namespace {

using testing::max_abs_diff;
using testing::max_gradient_error;
using testing::naive_matmul;
using testing::random_matrix;

StudentModel small_student(std::uint64_t seed, StudentOptions opts = {}) {
  return StudentModel::create(AudioBackbone::create(4, 5, seed, true), 6, opts, seed + 1, {0, 1, 2});
}

Matrix dense_relu(const Matrix& x, const Dense& d) {
  Matrix y = naive_matmul(x, d.w);
  for (std::size_t j = 0; j < y.cols(); ++j) y(0, j) = std::max(0.0, y(0, j) + d.b(0, j));
  return y;
}

TEST(StudentForward, ZeroWeightsGiveZeroEmbedding) {
  StudentModel m = small_student(1);
  m.feedforward.w = Matrix(6, 6);
  m.feedforward.b = Matrix(1, 6);
  Rng rng(1);
  const StudentOutput out = student_forward(m, random_matrix(5, 4, rng), rng, false);
  for (double v : out.E_s.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(out.logits, m.classifier.b);
}

TEST(StudentForward, MatchesManualComposition) {
  StudentModel m = small_student(2);
  Rng rng(2);
  m.classifier.b = random_matrix(1, 3, rng);
  const Matrix frames = random_matrix(6, 4, rng);
  const Matrix pooled = encode_audio(m.audio, frames);
  const Matrix proj = add(naive_matmul(pooled, m.audio_head.linear.w), m.audio_head.linear.b);
  const Matrix es = dense_relu(proj, m.feedforward);
  const Matrix logits = add(naive_matmul(es, m.classifier.w), m.classifier.b);
  const StudentOutput out = student_forward(m, frames, rng, false);
  EXPECT_LT(max_abs_diff(out.E_s, es), 1e-12);
  EXPECT_LT(max_abs_diff(out.logits, logits), 1e-12);
}

TEST(LossStudent, ZeroWhenEqual) {
  Rng rng(3);
  const Matrix e = random_matrix(4, 6, rng);
  EXPECT_EQ(loss_student(e, e).loss, 0.0);
}

TEST(LossStudent, UnitDifferenceGivesOne) {
  const Matrix a(1, 6);
  Matrix b(1, 6);
  b(0, 2) = 1.0;
  EXPECT_DOUBLE_EQ(loss_student(a, b).loss, 1.0);
  EXPECT_THROW(loss_student(Matrix(1, 6), Matrix(1, 5)), DimensionError);
}

TEST(LossStudent, GradientMatchesFiniteDifferences) {
  Rng rng(4);
  const Matrix target = random_matrix(3, 5, rng);
  Matrix es = random_matrix(3, 5, rng);
  const EmbeddingLoss r = loss_student(target, es);
  EXPECT_LT(max_gradient_error([&] { return loss_student(target, es).loss; }, es, r.grad_E_s), 1e-5);
}

TEST(LossTotal, Arithmetic) {
  EXPECT_EQ(loss_total(1.0, 0.5, 10.0), 6.0);
  EXPECT_EQ(loss_total(1.0, 0.5, 0.0), 1.0);
}

std::vector<StudentInput> random_inputs(const StudentModel& m, std::size_t n, bool targets, Rng& rng) {
  std::vector<StudentInput> out;
  for (std::size_t i = 0; i < n; ++i) {
    Matrix lower = random_matrix(2 + i % 3, m.audio.hidden_dim(), rng);
    for (double& v : lower.values()) v = std::abs(v);
    out.push_back({lower, i % m.classes.size(), targets ? random_matrix(1, 6, rng) : Matrix{}});
  }
  return out;
}

void expect_step_gradients(StudentModel& m, const std::vector<StudentInput>& inputs) {
  std::vector<const StudentInput*> batch;
  for (const auto& x : inputs) batch.push_back(&x);
  Rng r0(7);
  const StudentStep step = student_step(m, batch, r0, true, true);
  std::size_t k = 0;
  for (auto& p : m.parameters()) {
    if (!p.trainable) continue;
    auto loss = [&] {
      Rng r(7);
      return student_step(m, batch, r, true, false).total_loss;
    };
    EXPECT_LT(max_gradient_error(loss, *p.value, step.grads[k]), 1e-4) << p.name;
    ++k;
  }
  EXPECT_EQ(k, step.grads.size());
}

TEST(StudentStep, GradientsMatchFiniteDifferences) {
  StudentModel m = small_student(5);
  Rng rng(5);
  expect_step_gradients(m, random_inputs(m, 4, true, rng));
}

TEST(StudentStep, SingleUtteranceBatchGradients) {
  StudentModel m = small_student(6);
  Rng rng(6);
  expect_step_gradients(m, random_inputs(m, 1, true, rng));
}

TEST(StudentStep, WithoutTargetsOnlyIntentLoss) {
  StudentModel m = small_student(7);
  Rng rng(7);
  const auto inputs = random_inputs(m, 3, false, rng);
  std::vector<const StudentInput*> batch;
  for (const auto& x : inputs) batch.push_back(&x);
  const StudentStep s = student_step(m, batch, rng, false, false);
  EXPECT_EQ(s.student_loss, 0.0);
  EXPECT_EQ(s.total_loss, s.intent_loss);
  expect_step_gradients(m, inputs);
}

struct Trained {
  RunConfig cfg;
  GeneratedCorpus g;
  TeacherModel teacher;
};

Trained trained_teacher() {
  RunConfig cfg = testing::tiny_config();
  GeneratedCorpus g = testing::tiny_corpus(cfg);
  TeacherModel t = make_teacher(Variant::mm_cl, g.corpus, cfg);
  teacher_train(t, g.corpus, cfg.teacher_train_config());
  return {cfg, std::move(g), std::move(t)};
}

TEST(StudentTrain, ZeroGammaMatchesNoTeacher) {
  Trained tr = trained_teacher();
  RunConfig cfg = tr.cfg;
  cfg.student.gamma = 0.0;
  StudentModel a = make_student(tr.g.corpus, cfg, &tr.teacher, true);
  StudentModel b = make_student(tr.g.corpus, cfg, &tr.teacher, true);
  const auto ha = student_train(a, &tr.teacher, tr.g.corpus, cfg.student_train_config());
  const auto hb = student_train(b, nullptr, tr.g.corpus, cfg.student_train_config());
  ASSERT_EQ(ha.size(), hb.size());
  for (std::size_t i = 0; i < ha.size(); ++i) {
    EXPECT_EQ(ha[i].intent_loss, hb[i].intent_loss);
    EXPECT_EQ(ha[i].total_loss, hb[i].total_loss);
    EXPECT_EQ(ha[i].dev_accuracy, hb[i].dev_accuracy);
    EXPECT_EQ(ha[i].lr, hb[i].lr);
    EXPECT_TRUE(std::isnan(hb[i].mean_embed_distance));
  }
  const StudentModel& ca = a;
  const StudentModel& cb = b;
  EXPECT_EQ(fingerprint_params(ca.parameters()), fingerprint_params(cb.parameters()));
}

TEST(StudentTrain, TeacherIsNotModified) {
  Trained tr = trained_teacher();
  const TeacherModel before = tr.teacher;
  StudentModel s = make_student(tr.g.corpus, tr.cfg, &tr.teacher, true);
  student_train(s, &tr.teacher, tr.g.corpus, tr.cfg.student_train_config());
  const TeacherModel& after = tr.teacher;
  EXPECT_EQ(fingerprint_params(after.parameters()), fingerprint_params(before.parameters()));
}

TEST(StudentTrain, IntentSpaceMismatch) {
  Trained tr = trained_teacher();
  StudentModel s = make_student(tr.g.corpus, tr.cfg, &tr.teacher, true);
  s.classes = {0, 1, 7};
  EXPECT_THROW(student_train(s, &tr.teacher, tr.g.corpus, tr.cfg.student_train_config()), ConfigError);
}

TEST(StudentTrain, DistillationShrinksEmbeddingDistance) {
  Trained tr = trained_teacher();
  RunConfig cfg = tr.cfg;
  cfg.train.epochs = 15;
  StudentModel s = make_student(tr.g.corpus, cfg, &tr.teacher, true);
  const auto h = student_train(s, &tr.teacher, tr.g.corpus, cfg.student_train_config());
  EXPECT_LT(h.back().mean_embed_distance, h.front().mean_embed_distance);
}

}  // namespace
}  // namespace zintent
