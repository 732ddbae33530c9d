// core/src/teacher.cpp

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

#include "zintent/teacher.hpp"

#include <cmath>
#include <string>

#include "zintent/errors.hpp"

namespace zintent {

namespace {

constexpr std::size_t kEvalBatch = 64;

std::vector<const TeacherInput*> pointers(const std::vector<TeacherInput>& inputs,
                                          const std::vector<std::size_t>& idx) {
  std::vector<const TeacherInput*> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(&inputs[i]);
  return out;
}

struct EvalSummary {
  double loss = 0.0;
  double ic_loss = 0.0;
  double cl_loss = 0.0;
  double accuracy = 0.0;
  double mean_pair_cosine = 0.0;
};

EvalSummary evaluate_inputs(const TeacherModel& model, const std::vector<TeacherInput>& inputs,
                            std::size_t batch_size) {
  EvalSummary s;
  if (inputs.empty()) return s;
  Rng unused(0);
  std::size_t correct = 0;
  for (const auto& idx : ordered_batches(inputs.size(), batch_size)) {
    auto batch = pointers(inputs, idx);
    TeacherStep step = teacher_step(model, batch, unused, false, false);
    const double w = static_cast<double>(idx.size());
    s.loss += w * step.loss;
    s.ic_loss += w * step.ic_loss;
    s.cl_loss += w * step.cl_loss;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (argmax(step.output.logits.row(i)) == batch[i]->label) ++correct;
      s.mean_pair_cosine += cosine_similarity(step.output.E_a.row_copy(i), step.output.E_t.row_copy(i));
    }
  }
  const double n = static_cast<double>(inputs.size());
  s.loss /= n;
  s.ic_loss /= n;
  s.cl_loss /= n;
  s.mean_pair_cosine /= n;
  s.accuracy = static_cast<double>(correct) / n;
  return s;
}

}  // namespace

TeacherModel TeacherModel::create(const ModelDims& dims, const TeacherOptions& options,
                                  std::uint64_t audio_seed, std::uint64_t text_seed,
                                  std::uint64_t init_seed, std::vector<IntentId> classes,
                                  bool audio_top_trainable) {
  if (classes.empty()) throw ConfigError("teacher needs at least one intent class");
  if (!(options.tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(options.fusion_dropout >= 0.0 && options.fusion_dropout < 1.0)) {
    throw ConfigError("fusion dropout must lie in [0, 1)");
  }
  TeacherModel m;
  m.audio = AudioBackbone::create(dims.raw_audio, dims.hidden, audio_seed, audio_top_trainable);
  m.text = TextBackbone::create(dims.vocab, dims.hidden, text_seed);
  Rng rng(init_seed);
  m.audio_head = ProjectionHead::create(dims.hidden, dims.embedding, options.projection_dropout, rng);
  m.text_head = ProjectionHead::create(dims.hidden, dims.embedding, options.projection_dropout, rng);
  m.fusion = Dense::random(2 * dims.embedding, dims.embedding,
                           std::sqrt(2.0 / static_cast<double>(2 * dims.embedding)), rng);
  m.classifier = Dense::random(dims.embedding, classes.size(),
                               1.0 / std::sqrt(static_cast<double>(dims.embedding)), rng);
  m.options = options;
  m.classes = std::move(classes);
  return m;
}

std::vector<ParamRef> TeacherModel::parameters() {
  std::vector<ParamRef> p;
  audio.append_params(p, "audio.");
  text.append_params(p, "text.");
  p.push_back({"audio_head.w", &audio_head.linear.w, true});
  p.push_back({"audio_head.b", &audio_head.linear.b, true});
  p.push_back({"text_head.w", &text_head.linear.w, true});
  p.push_back({"text_head.b", &text_head.linear.b, true});
  p.push_back({"fusion.w", &fusion.w, true});
  p.push_back({"fusion.b", &fusion.b, true});
  p.push_back({"classifier.w", &classifier.w, true});
  p.push_back({"classifier.b", &classifier.b, true});
  return p;
}

std::vector<ConstParamRef> TeacherModel::parameters() const {
  std::vector<ConstParamRef> out;
  for (const auto& p : const_cast<TeacherModel*>(this)->parameters()) {
    out.push_back({p.name, p.value, p.trainable});
  }
  return out;
}

Matrix fuse(const TeacherModel& model, const Matrix& E_a, const Matrix& E_t, Rng& rng, bool training) {
  if (E_a.rows() != E_t.rows()) {
    throw BatchError("fuse: batch mismatch " + E_a.shape() + " vs " + E_t.shape());
  }
  Matrix pre = linear_forward(concat_cols(E_a, E_t), model.fusion);
  return dropout_forward(relu_forward(pre), model.options.fusion_dropout, rng, training).output;
}

Matrix classify(const TeacherModel& model, const Matrix& E_at) {
  return linear_forward(E_at, model.classifier);
}

CrossEntropyResult loss_ic(const Matrix& logits, std::span<const std::size_t> labels) {
  return softmax_cross_entropy(logits, labels);
}

double similarity_scale(double tau, bool literal_multiply) {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  return literal_multiply ? tau : 1.0 / tau;
}

Matrix similarity_matrix(const Matrix& E_a, const Matrix& E_t, double tau, bool literal_multiply) {
  if (E_a.cols() != E_t.cols()) {
    throw DimensionError("similarity_matrix: " + E_a.shape() + " vs " + E_t.shape());
  }
  return scale(matmul_nt(E_a, E_t), similarity_scale(tau, literal_multiply));
}

ContrastiveResult loss_cl(const Matrix& C) {
  if (C.rows() != C.cols()) throw DimensionError("loss_cl: similarity matrix must be square, got " + C.shape());
  if (C.rows() == 0) throw EmptyInputError("loss_cl: empty batch");
  std::vector<std::size_t> diag(C.rows());
  for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = i;
  CrossEntropyResult audio_axis = softmax_cross_entropy(C, diag);
  CrossEntropyResult text_axis = softmax_cross_entropy(transpose(C), diag);
  ContrastiveResult res;
  res.loss = 0.5 * (audio_axis.loss + text_axis.loss);
  res.grad_C = scale(add(audio_axis.grad_logits, transpose(text_axis.grad_logits)), 0.5);
  return res;
}

double loss_mm(double l_ic, double l_cl, bool use_contrastive) {
  return use_contrastive ? 0.5 * (l_ic + l_cl) : l_ic;
}

TeacherInput make_teacher_input(const TeacherModel& model, const Utterance& u) {
  return {model.audio.lower(u.frames), encode_text(model.text, u.tokens), class_index(model.classes, u.intent)};
}

TeacherBatchOutput teacher_forward(const TeacherModel& model, std::span<const Utterance* const> batch,
                                   Rng& rng, bool training) {
  if (batch.empty()) throw EmptyInputError("teacher_forward: empty batch");
  std::vector<TeacherInput> inputs;
  inputs.reserve(batch.size());
  for (const Utterance* u : batch) inputs.push_back(make_teacher_input(model, *u));
  std::vector<const TeacherInput*> ptrs;
  for (const auto& in : inputs) ptrs.push_back(&in);
  return teacher_step(model, ptrs, rng, training, false).output;
}

TeacherStep teacher_step(const TeacherModel& model, std::span<const TeacherInput* const> batch, Rng& rng,
                         bool training, bool compute_grads) {
  const std::size_t n = batch.size();
  if (n == 0) throw EmptyInputError("teacher_step: empty batch");
  const std::size_t hidden = model.audio.hidden_dim();
  const std::size_t emb = model.embedding_dim();
  const auto& opt = model.options;

  std::vector<AudioBackbone::UpperTrace> traces;
  traces.reserve(n);
  Matrix pooled_a(n, hidden);
  Matrix pooled_t(n, hidden);
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    traces.push_back(model.audio.upper(batch[i]->audio_lower));
    std::copy(traces.back().pooled.values().begin(), traces.back().pooled.values().end(), pooled_a.row(i).begin());
    if (batch[i]->text_pooled.cols() != hidden) throw DimensionError("teacher_step: text features width mismatch");
    std::copy(batch[i]->text_pooled.values().begin(), batch[i]->text_pooled.values().end(), pooled_t.row(i).begin());
    labels[i] = batch[i]->label;
  }

  ProjectionHead::Trace audio_trace = model.audio_head.forward(pooled_a, rng, training);
  ProjectionHead::Trace text_trace = model.text_head.forward(pooled_t, rng, training);
  const Matrix& E_a = audio_trace.output();
  const Matrix& E_t = text_trace.output();

  Matrix joint = concat_cols(E_a, E_t);
  Matrix fusion_pre = linear_forward(joint, model.fusion);
  DropoutResult fusion_drop = dropout_forward(relu_forward(fusion_pre), opt.fusion_dropout, rng, training);
  const Matrix& E_at = fusion_drop.output;
  Matrix logits = classify(model, E_at);
  CrossEntropyResult ic = loss_ic(logits, labels);

  const Matrix A = opt.normalize_before_sim ? l2_normalize_rows(E_a) : E_a;
  const Matrix B = opt.normalize_before_sim ? l2_normalize_rows(E_t) : E_t;
  const double s = similarity_scale(opt.tau, opt.tau_literal_multiply);
  Matrix C = scale(matmul_nt(A, B), s);

  TeacherStep step;
  ContrastiveResult cl;
  if (opt.use_contrastive) {
    cl = loss_cl(C);
    step.cl_loss = cl.loss;
  }
  step.ic_loss = ic.loss;
  step.loss = loss_mm(ic.loss, step.cl_loss, opt.use_contrastive);
  step.output = {E_a, E_t, E_at, logits, C};
  if (!compute_grads) return step;

  const double ic_weight = opt.use_contrastive ? 0.5 : 1.0;
  LinearGrads cls = linear_backward(E_at, model.classifier.w, scale(ic.grad_logits, ic_weight));
  Matrix grad_fusion_pre = relu_backward(fusion_pre, dropout_backward(fusion_drop, cls.x));
  LinearGrads fus = linear_backward(joint, model.fusion.w, grad_fusion_pre);
  Matrix grad_E_a = slice_cols(fus.x, 0, emb);
  Matrix grad_E_t = slice_cols(fus.x, emb, 2 * emb);

  if (opt.use_contrastive) {
    Matrix grad_C = scale(cl.grad_C, 0.5);
    Matrix grad_A = scale(matmul(grad_C, B), s);
    Matrix grad_B = scale(matmul_tn(grad_C, A), s);
    if (opt.normalize_before_sim) {
      add_in_place(grad_E_a, l2_normalize_rows_backward(E_a, grad_A));
      add_in_place(grad_E_t, l2_normalize_rows_backward(E_t, grad_B));
    } else {
      add_in_place(grad_E_a, grad_A);
      add_in_place(grad_E_t, grad_B);
    }
  }

  LinearGrads ah = model.audio_head.backward(audio_trace, grad_E_a);
  LinearGrads th = model.text_head.backward(text_trace, grad_E_t);

  if (model.audio.layer2_trainable) {
    Dense bb{Matrix(hidden, hidden), Matrix(1, hidden)};
    for (std::size_t i = 0; i < n; ++i) {
      Dense g = model.audio.upper_backward(batch[i]->audio_lower, traces[i], ah.x.row_copy(i));
      add_in_place(bb.w, g.w);
      add_in_place(bb.b, g.b);
    }
    step.grads.push_back(std::move(bb.w));
    step.grads.push_back(std::move(bb.b));
  }
  step.grads.push_back(std::move(ah.w));
  step.grads.push_back(std::move(ah.b));
  step.grads.push_back(std::move(th.w));
  step.grads.push_back(std::move(th.b));
  step.grads.push_back(std::move(fus.w));
  step.grads.push_back(std::move(fus.b));
  step.grads.push_back(std::move(cls.w));
  step.grads.push_back(std::move(cls.b));
  return step;
}

std::vector<TeacherEpochMetrics> teacher_train(TeacherModel& model, const Corpus& corpus,
                                               const TrainConfig& config,
                                               const TeacherEpochCallback& on_epoch) {
  config.validate();
  const auto train = corpus.seen(Split::train);
  const auto dev = corpus.seen(Split::dev);
  if (train.empty()) throw ConfigError("teacher_train: empty train split");
  if (dev.empty()) throw ConfigError("teacher_train: empty dev split");

  std::vector<TeacherInput> train_inputs;
  train_inputs.reserve(train.size());
  for (const Utterance* u : train) train_inputs.push_back(make_teacher_input(model, *u));
  std::vector<TeacherInput> dev_inputs;
  dev_inputs.reserve(dev.size());
  for (const Utterance* u : dev) dev_inputs.push_back(make_teacher_input(model, *u));

  Rng rng(config.seed);
  auto params = model.parameters();
  std::vector<Matrix*> trainable = trainable_values(params);
  AdamState adam = AdamState::init(trainable, config.adam);
  PlateauScheduler sched = PlateauScheduler::make(config.adam.lr, config.scheduler_patience,
                                                  config.scheduler_factor, config.min_lr);

  std::vector<TeacherEpochMetrics> history;
  auto emit = [&](TeacherEpochMetrics m) {
    history.push_back(m);
    if (on_epoch) on_epoch(m);
  };

  {
    EvalSummary tr = evaluate_inputs(model, train_inputs, config.batch_size);
    EvalSummary dv = evaluate_inputs(model, dev_inputs, kEvalBatch);
    emit({0, tr.loss, tr.ic_loss, tr.cl_loss, dv.accuracy, sched.current_lr, tr.mean_pair_cosine});
  }

  double best_dev = -1.0;
  std::size_t since_best = 0;
  const bool update = !config.freeze_all && !trainable.empty();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const double epoch_lr = sched.current_lr;
    adam.config.lr = epoch_lr;
    double loss = 0.0, ic = 0.0, cl = 0.0;
    for (const auto& idx : shuffled_batches(train_inputs.size(), config.batch_size, rng)) {
      auto batch = pointers(train_inputs, idx);
      TeacherStep step = teacher_step(model, batch, rng, true, update);
      const double w = static_cast<double>(idx.size());
      loss += w * step.loss;
      ic += w * step.ic_loss;
      cl += w * step.cl_loss;
      if (update) adam_step(trainable, step.grads, adam);
    }
    const double n = static_cast<double>(train_inputs.size());
    const double dev_acc = evaluate_inputs(model, dev_inputs, kEvalBatch).accuracy;
    const double pair_cos = evaluate_inputs(model, train_inputs, config.batch_size).mean_pair_cosine;
    emit({epoch, loss / n, ic / n, cl / n, dev_acc, epoch_lr, pair_cos});
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

double teacher_accuracy(const TeacherModel& model, std::span<const Utterance* const> utterances) {
  if (utterances.empty()) throw EmptyInputError("teacher_accuracy: no utterances");
  std::vector<TeacherInput> inputs;
  for (const Utterance* u : utterances) inputs.push_back(make_teacher_input(model, *u));
  return evaluate_inputs(model, inputs, kEvalBatch).accuracy;
}

Matrix teacher_joint_embeddings(const TeacherModel& model, std::span<const Utterance* const> utterances) {
  std::vector<Matrix> parts;
  Rng unused(0);
  for (const auto& idx : ordered_batches(utterances.size(), kEvalBatch)) {
    std::vector<const Utterance*> batch;
    for (std::size_t i : idx) batch.push_back(utterances[i]);
    parts.push_back(teacher_forward(model, batch, unused, false).E_at);
  }
  return stack_rows(parts);
}

}  // namespace zintent
