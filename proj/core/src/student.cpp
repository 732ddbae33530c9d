// core/src/student.cpp

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

#include "zintent/student.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "zintent/errors.hpp"

namespace zintent {

namespace {

constexpr std::size_t kEvalBatch = 64;

std::vector<const StudentInput*> pointers(const std::vector<StudentInput>& inputs,
                                          const std::vector<std::size_t>& idx) {
  std::vector<const StudentInput*> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(&inputs[i]);
  return out;
}

struct EvalSummary {
  double intent_loss = 0.0;
  double student_loss = 0.0;
  double total_loss = 0.0;
  double accuracy = 0.0;
};

EvalSummary evaluate_inputs(const StudentModel& model, const std::vector<StudentInput>& inputs) {
  EvalSummary s;
  if (inputs.empty()) return s;
  Rng unused(0);
  std::size_t correct = 0;
  for (const auto& idx : ordered_batches(inputs.size(), kEvalBatch)) {
    auto batch = pointers(inputs, idx);
    StudentStep step = student_step(model, batch, unused, false, false);
    const double w = static_cast<double>(idx.size());
    s.intent_loss += w * step.intent_loss;
    s.student_loss += w * step.student_loss;
    s.total_loss += w * step.total_loss;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (argmax(step.logits.row(i)) == batch[i]->label) ++correct;
    }
  }
  const double n = static_cast<double>(inputs.size());
  s.intent_loss /= n;
  s.student_loss /= n;
  s.total_loss /= n;
  s.accuracy = static_cast<double>(correct) / n;
  return s;
}

double effective_gamma(const StudentOptions& o) { return o.distill ? o.gamma : 0.0; }

}  // namespace

StudentModel StudentModel::create(AudioBackbone backbone, std::size_t embedding_dim,
                                  const StudentOptions& options, std::uint64_t init_seed,
                                  std::vector<IntentId> classes) {
  if (classes.empty()) throw ConfigError("student needs at least one intent class");
  if (!(options.gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  StudentModel m;
  m.audio = std::move(backbone);
  Rng rng(init_seed);
  m.audio_head = ProjectionHead::create(m.audio.hidden_dim(), embedding_dim, options.projection_dropout, rng);
  m.feedforward = Dense::random(embedding_dim, embedding_dim,
                                std::sqrt(2.0 / static_cast<double>(embedding_dim)), rng);
  m.classifier = Dense::random(embedding_dim, classes.size(),
                               1.0 / std::sqrt(static_cast<double>(embedding_dim)), rng);
  m.options = options;
  m.classes = std::move(classes);
  return m;
}

std::vector<ParamRef> StudentModel::parameters() {
  std::vector<ParamRef> p;
  audio.append_params(p, "audio.");
  p.push_back({"audio_head.w", &audio_head.linear.w, true});
  p.push_back({"audio_head.b", &audio_head.linear.b, true});
  p.push_back({"feedforward.w", &feedforward.w, true});
  p.push_back({"feedforward.b", &feedforward.b, true});
  p.push_back({"classifier.w", &classifier.w, true});
  p.push_back({"classifier.b", &classifier.b, true});
  return p;
}

std::vector<ConstParamRef> StudentModel::parameters() const {
  std::vector<ConstParamRef> out;
  for (const auto& p : const_cast<StudentModel*>(this)->parameters()) {
    out.push_back({p.name, p.value, p.trainable});
  }
  return out;
}

StudentOutput student_forward(const StudentModel& model, const Matrix& frames, Rng& rng, bool training) {
  StudentInput in{model.audio.lower(frames), 0, {}};
  const StudentInput* ptr = &in;
  StudentStep step = student_step(model, std::span<const StudentInput* const>(&ptr, 1), rng, training, false);
  return {std::move(step.E_s), std::move(step.logits)};
}

EmbeddingLoss loss_student(const Matrix& E_at, const Matrix& E_s) {
  if (E_at.rows() != E_s.rows() || E_at.cols() != E_s.cols()) {
    throw DimensionError("loss_student: " + E_at.shape() + " vs " + E_s.shape());
  }
  if (E_s.rows() == 0) throw EmptyInputError("loss_student: empty batch");
  const double n = static_cast<double>(E_s.rows());
  EmbeddingLoss res{0.0, Matrix(E_s.rows(), E_s.cols())};
  auto a = E_at.values();
  auto s = E_s.values();
  auto g = res.grad_E_s.values();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double d = s[i] - a[i];
    res.loss += d * d;
    g[i] = 2.0 * d / n;
  }
  res.loss /= n;
  return res;
}

double loss_total(double l_intent, double l_student, double gamma) {
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  return l_intent + gamma * l_student;
}

StudentStep student_step(const StudentModel& model, std::span<const StudentInput* const> batch, Rng& rng,
                         bool training, bool compute_grads) {
  const std::size_t n = batch.size();
  if (n == 0) throw EmptyInputError("student_step: empty batch");
  const std::size_t hidden = model.audio.hidden_dim();

  std::vector<AudioBackbone::UpperTrace> traces;
  traces.reserve(n);
  Matrix pooled(n, hidden);
  std::vector<std::size_t> labels(n);
  bool have_targets = true;
  for (std::size_t i = 0; i < n; ++i) {
    traces.push_back(model.audio.upper(batch[i]->audio_lower));
    std::copy(traces.back().pooled.values().begin(), traces.back().pooled.values().end(), pooled.row(i).begin());
    labels[i] = batch[i]->label;
    if (batch[i]->target.empty()) have_targets = false;
  }

  ProjectionHead::Trace head = model.audio_head.forward(pooled, rng, training);
  Matrix ff_pre = linear_forward(head.output(), model.feedforward);
  Matrix E_s = relu_forward(ff_pre);
  Matrix logits = linear_forward(E_s, model.classifier);
  CrossEntropyResult ce = softmax_cross_entropy(logits, labels);

  StudentStep step;
  step.intent_loss = ce.loss;
  EmbeddingLoss emb_loss;
  if (have_targets) {
    std::vector<Matrix> rows;
    rows.reserve(n);
    for (const auto* in : batch) rows.push_back(in->target);
    emb_loss = loss_student(stack_rows(rows), E_s);
    step.student_loss = emb_loss.loss;
  }
  const double gamma = have_targets ? effective_gamma(model.options) : 0.0;
  step.total_loss = loss_total(step.intent_loss, step.student_loss, gamma);
  step.E_s = E_s;
  step.logits = logits;
  if (!compute_grads) return step;

  LinearGrads cls = linear_backward(E_s, model.classifier.w, ce.grad_logits);
  Matrix grad_E_s = std::move(cls.x);
  if (gamma != 0.0) add_in_place(grad_E_s, scale(emb_loss.grad_E_s, gamma));
  Matrix grad_ff_pre = relu_backward(ff_pre, grad_E_s);
  LinearGrads ff = linear_backward(head.output(), model.feedforward.w, grad_ff_pre);
  LinearGrads hg = model.audio_head.backward(head, ff.x);

  if (model.audio.layer2_trainable) {
    Dense bb{Matrix(hidden, hidden), Matrix(1, hidden)};
    for (std::size_t i = 0; i < n; ++i) {
      Dense g = model.audio.upper_backward(batch[i]->audio_lower, traces[i], hg.x.row_copy(i));
      add_in_place(bb.w, g.w);
      add_in_place(bb.b, g.b);
    }
    step.grads.push_back(std::move(bb.w));
    step.grads.push_back(std::move(bb.b));
  }
  step.grads.push_back(std::move(hg.w));
  step.grads.push_back(std::move(hg.b));
  step.grads.push_back(std::move(ff.w));
  step.grads.push_back(std::move(ff.b));
  step.grads.push_back(std::move(cls.w));
  step.grads.push_back(std::move(cls.b));
  return step;
}

std::vector<StudentEpochMetrics> student_train(StudentModel& student, const TeacherModel* teacher,
                                               const Corpus& corpus, const TrainConfig& config,
                                               const StudentEpochCallback& on_epoch) {
  config.validate();
  const auto train = corpus.seen(Split::train);
  const auto dev = corpus.seen(Split::dev);
  if (train.empty()) throw ConfigError("student_train: empty train split");
  if (dev.empty()) throw ConfigError("student_train: empty dev split");
  if (teacher != nullptr) {
    if (teacher->classes != student.classes) {
      throw ConfigError("student_train: teacher and student intent spaces differ");
    }
    if (teacher->embedding_dim() != student.embedding_dim()) {
      throw ConfigError("student_train: teacher joint embedding and student embedding widths differ");
    }
  }

  std::vector<StudentInput> train_inputs;
  train_inputs.reserve(train.size());
  Matrix targets;
  if (teacher != nullptr) targets = teacher_joint_embeddings(*teacher, train);
  for (std::size_t i = 0; i < train.size(); ++i) {
    StudentInput in{student.audio.lower(train[i]->frames), class_index(student.classes, train[i]->intent), {}};
    if (teacher != nullptr) in.target = targets.row_copy(i);
    train_inputs.push_back(std::move(in));
  }
  std::vector<StudentInput> dev_inputs;
  for (const Utterance* u : dev) {
    dev_inputs.push_back({student.audio.lower(u->frames), class_index(student.classes, u->intent), {}});
  }

  Rng rng(config.seed);
  auto params = student.parameters();
  std::vector<Matrix*> trainable = trainable_values(params);
  AdamState adam = AdamState::init(trainable, config.adam);
  PlateauScheduler sched = PlateauScheduler::make(config.adam.lr, config.scheduler_patience,
                                                  config.scheduler_factor, config.min_lr);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<StudentEpochMetrics> history;
  auto emit = [&](StudentEpochMetrics m) {
    history.push_back(m);
    if (on_epoch) on_epoch(m);
  };

  {
    EvalSummary tr = evaluate_inputs(student, train_inputs);
    const double dev_acc = evaluate_inputs(student, dev_inputs).accuracy;
    emit({0, tr.intent_loss, tr.student_loss, tr.total_loss, dev_acc, teacher ? tr.student_loss : nan,
          sched.current_lr});
  }

  double best_dev = -1.0;
  std::size_t since_best = 0;
  const bool update = !config.freeze_all && !trainable.empty();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double epoch_lr = sched.current_lr;
    adam.config.lr = epoch_lr;
    double intent = 0.0, stud = 0.0, total = 0.0;
    for (const auto& idx : shuffled_batches(train_inputs.size(), config.batch_size, rng)) {
      auto batch = pointers(train_inputs, idx);
      StudentStep step = student_step(student, batch, rng, true, update);
      const double w = static_cast<double>(idx.size());
      intent += w * step.intent_loss;
      stud += w * step.student_loss;
      total += w * step.total_loss;
      if (update) adam_step(trainable, step.grads, adam);
    }
    const double n = static_cast<double>(train_inputs.size());
    const double dev_acc = evaluate_inputs(student, dev_inputs).accuracy;
    const double distance = teacher ? evaluate_inputs(student, train_inputs).student_loss : nan;
    emit({epoch, intent / n, stud / n, total / n, dev_acc, distance, epoch_lr});
    scheduler_step(sched, dev_acc);

    if (dev_acc > best_dev) {
      best_dev = dev_acc;
      since_best = 0;
    } else if (config.early_stop_patience > 0 && ++since_best >= config.early_stop_patience) {
      break;
    }
  }
  return history;
}

double student_accuracy(const StudentModel& model, std::span<const Utterance* const> utterances) {
  if (utterances.empty()) throw EmptyInputError("student_accuracy: no utterances");
  std::vector<StudentInput> inputs;
  for (const Utterance* u : utterances) {
    inputs.push_back({model.audio.lower(u->frames), class_index(model.classes, u->intent), {}});
  }
  return evaluate_inputs(model, inputs).accuracy;
}

}  // namespace zintent
