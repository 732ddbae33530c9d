// core/src/harness.cpp

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

#include "zintent/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "zintent/errors.hpp"

namespace zintent {

namespace {

constexpr std::uint64_t kContentStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kSpeakerBasisStream = 3;

// Orthonormal columns spanning the speaker subspace (d x rank).
Matrix speaker_basis(std::size_t d, std::size_t rank, std::uint64_t seed) {
  rank = std::min(rank, d);
  Rng rng(seed);
  Matrix basis(d, rank);
  for (std::size_t c = 0; c < rank; ++c) {
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    for (std::size_t p = 0; p < c; ++p) {
      double proj = 0.0;
      for (std::size_t r = 0; r < d; ++r) proj += v[r] * basis(r, p);
      for (std::size_t r = 0; r < d; ++r) v[r] -= proj * basis(r, p);
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (std::size_t r = 0; r < d; ++r) basis(r, c) = v[r] / norm;
  }
  return basis;
}

std::vector<TokenId> make_sentence(const CorpusSpec& spec, IntentId intent, std::size_t filler_begin, Rng& rng) {
  const std::size_t k = spec.keywords_per_intent;
  const std::size_t min_keys = (k + 1) / 2;
  const std::size_t n_keys = min_keys + rng.index(k - min_keys + 1);
  std::vector<TokenId> keys(k);
  for (std::size_t i = 0; i < k; ++i) keys[i] = static_cast<TokenId>(intent * k + i);
  rng.shuffle(std::span<TokenId>(keys));

  const std::size_t span = spec.sentence_length_max - spec.sentence_length_min + 1;
  const std::size_t length = std::max(spec.sentence_length_min + rng.index(span), n_keys);
  std::vector<TokenId> tokens(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n_keys));
  const std::size_t n_filler = spec.vocab_size - filler_begin;
  while (tokens.size() < length) tokens.push_back(static_cast<TokenId>(filler_begin + rng.index(n_filler)));
  rng.shuffle(std::span<TokenId>(tokens));
  return tokens;
}

Matrix natural_frames(const Matrix& clean, const CorpusSpec& spec, const Matrix& basis, Rng& rng) {
  Matrix frames = clean;
  if (spec.audio_noise_sigma == 0.0) return frames;
  const std::size_t d = frames.cols();
  std::vector<double> offset(d, 0.0);
  for (std::size_t c = 0; c < basis.cols(); ++c) {
    const double z = spec.speaker_scale * rng.normal();
    for (std::size_t r = 0; r < d; ++r) offset[r] += z * basis(r, c);
  }
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    auto row = frames.row(t);
    for (std::size_t j = 0; j < d; ++j) row[j] += spec.audio_noise_sigma * (rng.normal() + offset[j]);
  }
  return frames;
}

std::vector<IntentId> iota_ids(std::size_t begin, std::size_t count) {
  std::vector<IntentId> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = static_cast<IntentId>(begin + i);
  return out;
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

GeneratedCorpus generate_corpus(const CorpusSpec& spec, const SynthesizerConfig& synth) {
  spec.validate();
  const std::size_t n_intents = spec.n_intents_seen + spec.n_intents_unseen;
  const std::size_t filler_begin = n_intents * spec.keywords_per_intent;

  GeneratedCorpus out;
  Corpus& c = out.corpus;
  c.seen_intents = iota_ids(0, spec.n_intents_seen);
  c.unseen_intents = iota_ids(spec.n_intents_seen, spec.n_intents_unseen);
  c.vocab_size = spec.vocab_size;
  c.audio_dim = synth.audio_dim;
  out.bot.intent_vocab = iota_ids(0, n_intents);

  const Matrix basis = speaker_basis(synth.audio_dim, spec.speaker_rank, mix_seed(spec.seed, kSpeakerBasisStream));
  Rng content(mix_seed(spec.seed, kContentStream));
  const std::uint64_t noise_seed = mix_seed(spec.seed, kNoiseStream);

  const std::size_t n = spec.sentences_per_intent;
  const auto n_train = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(n)));
  const auto n_dev = std::min(n - n_train, static_cast<std::size_t>(std::llround(0.1 * static_cast<double>(n))));

  UtteranceId next_id = 0;
  for (std::size_t i = 0; i < n_intents; ++i) {
    const auto intent = static_cast<IntentId>(i);
    for (std::size_t j = 0; j < n; ++j) {
      Utterance u;
      u.id = next_id++;
      u.intent = intent;
      u.tokens = make_sentence(spec, intent, filler_begin, content);
      u.split = j < n_train ? Split::train : (j < n_train + n_dev ? Split::dev : Split::test);
      Rng noise(mix_seed(noise_seed, u.id));
      u.frames = natural_frames(synthesize_pseudo_audio(u.tokens, synth), spec, basis, noise);
      if (u.split == Split::train) out.bot.sentences.push_back({u.id, u.tokens, intent});
      c.utterances.push_back(std::move(u));
    }
  }
  return out;
}

BotDefinition bot_from_corpus(const Corpus& corpus) {
  BotDefinition bot;
  bot.intent_vocab = corpus.seen_intents;
  bot.intent_vocab.insert(bot.intent_vocab.end(), corpus.unseen_intents.begin(), corpus.unseen_intents.end());
  std::sort(bot.intent_vocab.begin(), bot.intent_vocab.end());
  for (const Utterance& u : corpus.utterances) {
    if (u.split == Split::train) bot.sentences.push_back({u.id, u.tokens, u.intent});
  }
  return bot;
}

Corpus rerender_natural_audio(const Corpus& corpus, const CorpusSpec& spec, const SynthesizerConfig& synth) {
  const Matrix basis = speaker_basis(synth.audio_dim, spec.speaker_rank, mix_seed(spec.seed, kSpeakerBasisStream));
  const std::uint64_t noise_seed = mix_seed(spec.seed, kNoiseStream);
  Corpus out = corpus;
  out.audio_dim = synth.audio_dim;
  for (Utterance& u : out.utterances) {
    Rng noise(mix_seed(noise_seed, u.id));
    u.frames = natural_frames(synthesize_pseudo_audio(u.tokens, synth), spec, basis, noise);
  }
  return out;
}

const AudioBackbone& VariantModels::backbone() const {
  if (teacher && is_teacher_variant(variant)) return teacher->audio;
  if (student) return student->audio;
  throw ConfigError("variant '" + std::string(variant_name(variant)) + "' has no trained models");
}

ExtractionHeads VariantModels::heads() const {
  if (teacher && is_teacher_variant(variant)) return {&teacher->audio_head, nullptr};
  if (student) return heads_of(*student);
  return {};
}

double VariantModels::supervised_accuracy(std::span<const Utterance* const> utterances) const {
  if (teacher && is_teacher_variant(variant)) return teacher_accuracy(*teacher, utterances);
  if (student) return student_accuracy(*student, utterances);
  throw ConfigError("variant '" + std::string(variant_name(variant)) + "' has no trained models");
}

TeacherModel make_teacher(Variant v, const Corpus& corpus, const RunConfig& config) {
  if (!is_teacher_variant(v)) throw ConfigError("'" + std::string(variant_name(v)) + "' is not a teacher variant");
  TeacherOptions opts = config.teacher;
  opts.use_contrastive = v == Variant::mm_cl;
  return TeacherModel::create(config.dims(), opts, config.audio_backbone_seed(), config.text_backbone_seed(),
                              config.teacher_init_seed(), corpus.seen_intents, config.audio_top_trainable);
}

StudentModel make_student(const Corpus& corpus, const RunConfig& config, const TeacherModel* teacher,
                          bool distill) {
  AudioBackbone backbone = (config.init_from_teacher_backbone && teacher != nullptr)
                               ? teacher->audio
                               : AudioBackbone::create(config.synth.audio_dim, config.hidden_dim,
                                                       config.audio_backbone_seed(), config.audio_top_trainable);
  StudentOptions opts = config.student;
  opts.distill = distill && teacher != nullptr;
  return StudentModel::create(std::move(backbone), config.embedding_dim, opts, config.student_init_seed(),
                              corpus.seen_intents);
}

VariantModels train_variant(Variant v, const Corpus& corpus, const RunConfig& config, const TeacherModel* teacher) {
  VariantModels m;
  m.variant = v;
  switch (v) {
    case Variant::frozen: {
      RunConfig frozen = config;
      frozen.audio_top_trainable = false;
      m.student = make_student(corpus, frozen, nullptr, false);
      break;
    }
    case Variant::audio_only:
      m.student = make_student(corpus, config, nullptr, false);
      m.student_history = student_train(*m.student, nullptr, corpus, config.student_train_config());
      break;
    case Variant::mm:
    case Variant::mm_cl:
      m.teacher = make_teacher(v, corpus, config);
      m.teacher_history = teacher_train(*m.teacher, corpus, config.teacher_train_config());
      break;
    case Variant::stu_mm:
    case Variant::stu_mm_cl: {
      if (teacher == nullptr) {
        throw DependencyError("variant '" + std::string(variant_name(v)) + "' needs a trained " +
                              (v == Variant::stu_mm ? "mm" : "mm-cl") + " teacher");
      }
      const bool want_cl = v == Variant::stu_mm_cl;
      if (teacher->options.use_contrastive != want_cl) {
        throw DependencyError("variant '" + std::string(variant_name(v)) + "' needs a teacher trained " +
                              (want_cl ? "with" : "without") + " the contrastive loss");
      }
      m.student = make_student(corpus, config, teacher, config.student.distill);
      m.student_history = student_train(*m.student, teacher, corpus, config.student_train_config());
      break;
    }
  }
  return m;
}

ZeroShotScores zero_shot_scores(const EmbeddingPipeline& pipeline, const Corpus& corpus, const BotDefinition& bot,
                                const RunConfig& config) {
  const BotDefinition db_bot = bot.take_per_intent(config.db_sentences_per_intent);
  std::vector<IntentId> all = corpus.seen_intents;
  all.insert(all.end(), corpus.unseen_intents.begin(), corpus.unseen_intents.end());

  const EmbeddingDatabase mix_db = build_embedding_db(db_bot.restrict_to(all), config.synth, pipeline);
  // The unseen database is the mixed one minus the seen entries; same vectors, no re-embedding.
  EmbeddingDatabase unseen_db = mix_db;
  std::erase_if(unseen_db.entries, [&](const DbEntry& e) { return corpus.is_seen(e.intent); });

  const auto mix_test = corpus.select(Split::test, all);
  Matrix mix_queries(mix_test.size(), pipeline.dim());
  std::vector<const Utterance*> unseen_ptrs;
  std::vector<std::size_t> unseen_rows;
  for (std::size_t i = 0; i < mix_test.size(); ++i) {
    Matrix e = pipeline.embed(mix_test[i]->frames);
    std::copy(e.values().begin(), e.values().end(), mix_queries.row(i).begin());
    if (!corpus.is_seen(mix_test[i]->intent)) {
      unseen_ptrs.push_back(mix_test[i]);
      unseen_rows.push_back(i);
    }
  }
  Matrix unseen_queries(unseen_rows.size(), pipeline.dim());
  for (std::size_t i = 0; i < unseen_rows.size(); ++i) {
    auto src = mix_queries.row(unseen_rows[i]);
    std::copy(src.begin(), src.end(), unseen_queries.row(i).begin());
  }

  ZeroShotScores s;
  s.unseen = evaluate_embeddings(unseen_db, unseen_ptrs, unseen_queries).accuracy;
  s.mix = evaluate_embeddings(mix_db, mix_test, mix_queries).accuracy;
  return s;
}

std::vector<ExperimentReport> run_variant_grid(const Corpus& corpus, const BotDefinition& bot,
                                               const RunConfig& config) {
  config.validate();
  std::vector<ExperimentReport> reports;
  for (Variant v : config.variants) {
    ExperimentReport r;
    r.variant = v;
    r.seeds = config.replicate_seeds;
    reports.push_back(r);
  }
  auto report_for = [&](Variant v) -> ExperimentReport& {
    return *std::find_if(reports.begin(), reports.end(), [&](const auto& r) { return r.variant == v; });
  };

  const auto dev = corpus.seen(Split::dev);
  for (std::uint64_t seed : config.replicate_seeds) {
    const RunConfig cfg = config.with_seed(seed);
    std::map<Variant, VariantModels> teachers;
    auto teacher_for = [&](Variant tv) -> const VariantModels& {
      auto it = teachers.find(tv);
      if (it == teachers.end()) it = teachers.emplace(tv, train_variant(tv, corpus, cfg)).first;
      return it->second;
    };
    auto record = [&](Variant v, const VariantModels& m) {
      SeedResult res;
      res.seed = seed;
      res.supervised_dev_acc = m.supervised_accuracy(dev);
      const ZeroShotScores z = zero_shot_scores(m.pipeline(cfg.layer), corpus, bot, cfg);
      res.zeroshot_unseen_acc = z.unseen;
      res.zeroshot_mix_acc = z.mix;
      report_for(v).per_seed.push_back(res);
    };

    for (Variant v : config.variants) {
      if (is_teacher_variant(v)) {
        record(v, teacher_for(v));
      } else if (v == Variant::stu_mm || v == Variant::stu_mm_cl) {
        const Variant tv = v == Variant::stu_mm ? Variant::mm : Variant::mm_cl;
        const VariantModels& t = teacher_for(tv);
        record(v, train_variant(v, corpus, cfg, &*t.teacher));
      } else {
        record(v, train_variant(v, corpus, cfg));
      }
    }
  }

  for (auto& r : reports) {
    std::vector<double> sup, uns, mix;
    for (const auto& s : r.per_seed) {
      sup.push_back(s.supervised_dev_acc);
      uns.push_back(s.zeroshot_unseen_acc);
      mix.push_back(s.zeroshot_mix_acc);
    }
    r.supervised_dev_acc = mean_of(sup);
    r.zeroshot_unseen_acc = mean_of(uns);
    r.zeroshot_mix_acc = mean_of(mix);
  }
  return reports;
}

std::vector<LayerAccuracy> layer_ablation(const StudentModel& student, const BotDefinition& bot,
                                          std::span<const Utterance* const> test, const SynthesizerConfig& synth,
                                          std::span<const ExtractionLayer> layers) {
  std::vector<LayerAccuracy> rows;
  for (ExtractionLayer layer : layers) {
    EmbeddingPipeline pipeline(student.audio, layer, heads_of(student));
    const EmbeddingDatabase db = build_embedding_db(bot, synth, pipeline);
    rows.push_back({layer, evaluate_zero_shot(db, test, pipeline).accuracy});
  }
  return rows;
}

std::vector<SweepPoint> sample_size_sweep(const EmbeddingPipeline& pipeline, const BotDefinition& pool,
                                          std::span<const Utterance* const> test, const SynthesizerConfig& synth,
                                          std::span<const std::size_t> sizes, std::size_t repeats,
                                          std::uint64_t seed) {
  if (repeats == 0) throw ConfigError("sample_size_sweep: repeats must be >= 1");
  const std::size_t available = pool.min_sentences_per_intent();
  for (std::size_t k : sizes) {
    if (k == 0 || k > available) {
      throw ConfigError("sample_size_sweep: " + std::to_string(k) + " sentences per intent requested, pool has " +
                        std::to_string(available));
    }
  }

  // Embed the pool and the queries once; every subset reuses them.
  const EmbeddingDatabase full = build_embedding_db(pool, synth, pipeline);
  std::map<SentenceId, const DbEntry*> by_id;
  for (const auto& e : full.entries) by_id[e.sentence] = &e;
  Matrix queries(test.size(), pipeline.dim());
  for (std::size_t i = 0; i < test.size(); ++i) {
    Matrix e = pipeline.embed(test[i]->frames);
    std::copy(e.values().begin(), e.values().end(), queries.row(i).begin());
  }

  std::vector<SweepPoint> points;
  for (std::size_t k : sizes) {
    SweepPoint p;
    p.sentences_per_intent = k;
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      Rng rng(mix_seed(mix_seed(seed, k), rep));
      const BotDefinition subset = pool.sample_per_intent(k, rng);
      EmbeddingDatabase db = full;
      db.entries.clear();
      for (const auto& s : subset.sentences) db.entries.push_back(*by_id.at(s.id));
      std::sort(db.entries.begin(), db.entries.end(),
                [](const DbEntry& a, const DbEntry& b) { return a.sentence < b.sentence; });
      p.accuracies.push_back(evaluate_embeddings(db, test, queries).accuracy);
    }
    p.mean = mean_of(p.accuracies);
    p.min = *std::min_element(p.accuracies.begin(), p.accuracies.end());
    p.max = *std::max_element(p.accuracies.begin(), p.accuracies.end());
    points.push_back(std::move(p));
  }
  return points;
}

double synth_trained_upper_bound(const BotDefinition& bot, std::span<const Utterance* const> test,
                                 const RunConfig& config) {
  bot.validate();
  if (test.empty()) throw EmptyInputError("synth_trained_upper_bound: empty test set");
  Corpus synth_corpus;
  synth_corpus.seen_intents = bot.intent_vocab;
  synth_corpus.vocab_size = config.corpus.vocab_size;
  synth_corpus.audio_dim = config.synth.audio_dim;
  std::map<IntentId, std::size_t> seen_count;
  std::map<IntentId, std::size_t> totals;
  for (const auto& s : bot.sentences) ++totals[s.intent];
  for (const auto& s : bot.sentences) {
    Utterance u;
    u.id = s.id;
    u.tokens = s.tokens;
    u.intent = s.intent;
    u.frames = synthesize_pseudo_audio(s.tokens, config.synth);
    // Every tenth sentence of an intent goes to dev; single-sentence intents keep theirs in train.
    const std::size_t j = seen_count[s.intent]++;
    u.split = (totals[s.intent] > 1 && j % 10 == 9) ? Split::dev : Split::train;
    synth_corpus.utterances.push_back(std::move(u));
  }
  if (synth_corpus.seen(Split::dev).empty()) {
    // Tiny bots: score dev on the train audio so training still has a plateau signal.
    for (auto& u : synth_corpus.utterances) {
      Utterance copy = u;
      copy.id = u.id + (std::uint64_t{1} << 62);
      copy.split = Split::dev;
      synth_corpus.utterances.push_back(std::move(copy));
      break;
    }
  }
  StudentModel model = StudentModel::create(
      AudioBackbone::create(config.synth.audio_dim, config.hidden_dim, config.audio_backbone_seed(),
                            config.audio_top_trainable),
      config.embedding_dim, config.student, config.student_init_seed(), bot.intent_vocab);
  student_train(model, nullptr, synth_corpus, config.student_train_config());
  return student_accuracy(model, test);
}

std::vector<NoisePoint> noise_sweep(const EmbeddingPipeline& pipeline, const Corpus& corpus, const BotDefinition& bot,
                                    const RunConfig& config, std::span<const double> sigmas) {
  const BotDefinition db_bot = bot.take_per_intent(config.db_sentences_per_intent).restrict_to(corpus.unseen_intents);
  const EmbeddingDatabase db = build_embedding_db(db_bot, config.synth, pipeline);
  Corpus test_only;
  test_only.seen_intents = corpus.seen_intents;
  test_only.unseen_intents = corpus.unseen_intents;
  test_only.vocab_size = corpus.vocab_size;
  for (const Utterance* u : corpus.unseen(Split::test)) test_only.utterances.push_back(*u);

  std::vector<NoisePoint> out;
  for (double sigma : sigmas) {
    CorpusSpec spec = config.corpus;
    spec.audio_noise_sigma = sigma;
    const Corpus noisy = rerender_natural_audio(test_only, spec, config.synth);
    out.push_back({sigma, evaluate_zero_shot(db, noisy.unseen(Split::test), pipeline).accuracy});
  }
  return out;
}

void write_grid_csv(std::ostream& out, std::span<const ExperimentReport> reports) {
  out << "variant,seed,supervised_dev_acc,zeroshot_unseen_acc,zeroshot_mix_acc\n";
  for (const auto& r : reports) {
    for (const auto& s : r.per_seed) {
      out << variant_name(r.variant) << ',' << s.seed << ',' << fmt(s.supervised_dev_acc) << ','
          << fmt(s.zeroshot_unseen_acc) << ',' << fmt(s.zeroshot_mix_acc) << '\n';
    }
    out << variant_name(r.variant) << ",mean," << fmt(r.supervised_dev_acc) << ',' << fmt(r.zeroshot_unseen_acc)
        << ',' << fmt(r.zeroshot_mix_acc) << '\n';
  }
}

void write_layer_csv(std::ostream& out, std::span<const LayerAccuracy> rows) {
  out << "layer,accuracy\n";
  for (const auto& r : rows) out << layer_name(r.layer) << ',' << fmt(r.accuracy) << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "sentences_per_intent,mean,min,max\n";
  for (const auto& p : points) {
    out << p.sentences_per_intent << ',' << fmt(p.mean) << ',' << fmt(p.min) << ',' << fmt(p.max) << '\n';
  }
}

void write_noise_csv(std::ostream& out, std::span<const NoisePoint> points) {
  out << "sigma,accuracy\n";
  for (const auto& p : points) out << fmt(p.sigma) << ',' << fmt(p.accuracy) << '\n';
}

std::string format_grid_table(std::span<const ExperimentReport> reports) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %12s %12s %12s\n", "variant", "dev-acc", "unseen-acc", "mix-acc");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line), "%-12s %12.4f %12.4f %12.4f\n", std::string(variant_name(r.variant)).c_str(),
                  r.supervised_dev_acc, r.zeroshot_unseen_acc, r.zeroshot_mix_acc);
    out << line;
  }
  return out.str();
}

}  // namespace zintent
