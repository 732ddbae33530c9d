// tests/unit/zeroshot_test.cpp

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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "support/fixtures.hpp"
#include "support/testing.hpp"
#include "zintent/errors.hpp"
#include "zintent/student.hpp"
#include "zintent/zeroshot.hpp"

namespace zintent {
namespace {

using testing::random_matrix;

SynthesizerConfig synth_config() {
  SynthesizerConfig s;
  s.audio_dim = 8;
  s.frames_per_token = 3;
  return s;
}

BotDefinition small_bot() {
  BotDefinition bot;
  bot.intent_vocab = {10, 11, 12};
  SentenceId id = 100;
  for (IntentId intent : bot.intent_vocab) {
    for (int j = 0; j < 4; ++j) {
      bot.sentences.push_back({id++, {static_cast<TokenId>(intent), static_cast<TokenId>(20 + j),
                                      static_cast<TokenId>(30 + (id % 5))},
                               intent});
    }
  }
  return bot;
}

struct World {
  AudioBackbone backbone = AudioBackbone::create(8, 12, 3, true);
  SynthesizerConfig synth = synth_config();
  BotDefinition bot = small_bot();
};

TEST(Synthesize, Deterministic) {
  const std::vector<TokenId> s = {4, 8, 15, 16};
  EXPECT_EQ(synthesize_pseudo_audio(s, synth_config()), synthesize_pseudo_audio(s, synth_config()));
}

TEST(Synthesize, SingleTokenShape) {
  const std::vector<TokenId> s = {9};
  const Matrix f = synthesize_pseudo_audio(s, synth_config());
  EXPECT_EQ(f.rows(), 3u);
  EXPECT_EQ(f.cols(), 8u);
}

TEST(Synthesize, SeedChangesPrototypes) {
  const std::vector<TokenId> s = {1, 2};
  SynthesizerConfig other = synth_config();
  other.seed += 1;
  EXPECT_NE(synthesize_pseudo_audio(s, synth_config()), synthesize_pseudo_audio(s, other));
}

TEST(Synthesize, EmptyTokens) {
  EXPECT_THROW(synthesize_pseudo_audio(std::vector<TokenId>{}, synth_config()), EmptyInputError);
}

TEST(BuildDb, SingleSentence) {
  World w;
  BotDefinition bot;
  bot.intent_vocab = {4};
  bot.sentences = {{1, {3, 5}, 4}};
  const EmbeddingPipeline p(w.backbone, ExtractionLayer::pooled);
  const EmbeddingDatabase db = build_embedding_db(bot, w.synth, p);
  ASSERT_EQ(db.entries.size(), 1u);
  EXPECT_NEAR(l2_norm(db.entries[0].embedding), 1.0, 1e-12);
  EXPECT_EQ(db.dim, 12u);
  EXPECT_EQ(db.fingerprint, p.fingerprint());
}

TEST(BuildDb, DuplicateSentenceKeepsBothLabels) {
  World w;
  BotDefinition bot;
  bot.intent_vocab = {1, 2};
  bot.sentences = {{1, {3, 5, 7}, 1}, {2, {3, 5, 7}, 2}};
  const EmbeddingDatabase db = build_embedding_db(bot, w.synth, EmbeddingPipeline(w.backbone, ExtractionLayer::pooled));
  ASSERT_EQ(db.entries.size(), 2u);
  EXPECT_EQ(db.entries[0].embedding, db.entries[1].embedding);
  EXPECT_NE(db.entries[0].intent, db.entries[1].intent);
  // Exact tie: the lower sentence id wins.
  const Prediction p = classify_embedding(db, Matrix(1, 12, 1.0), 2);
  EXPECT_EQ(p.best_sentence, 1u);
  EXPECT_EQ(p.intent, 1u);
}

TEST(BuildDb, EntryCountAndUnitNorm) {
  World w;
  const EmbeddingDatabase db = build_embedding_db(w.bot, w.synth, EmbeddingPipeline(w.backbone, ExtractionLayer::pooled));
  EXPECT_EQ(db.entries.size(), w.bot.sentences.size());
  for (const auto& e : db.entries) {
    EXPECT_EQ(e.embedding.size(), db.dim);
    EXPECT_NEAR(l2_norm(e.embedding), 1.0, 1e-12);
  }
  EXPECT_EQ(db.intents(), w.bot.intent_vocab);
}

TEST(BuildDb, HeadsRequiredAboveThePooledLayer) {
  World w;
  EXPECT_THROW(EmbeddingPipeline(w.backbone, ExtractionLayer::projection), ConfigError);
  EXPECT_THROW(EmbeddingPipeline(w.backbone, ExtractionLayer::feedforward), ConfigError);
  Rng rng(1);
  const ProjectionHead wrong = ProjectionHead::create(13, 6, 0.2, rng);
  EXPECT_THROW(EmbeddingPipeline(w.backbone, ExtractionLayer::projection, {&wrong, nullptr}), DimensionError);
}

TEST(BuildDb, Idempotent) {
  World w;
  const EmbeddingPipeline p(w.backbone, ExtractionLayer::pooled);
  std::ostringstream a, b;
  write_edb(a, build_embedding_db(w.bot, w.synth, p));
  write_edb(b, build_embedding_db(w.bot, w.synth, p));
  EXPECT_EQ(a.str(), b.str());
}

TEST(ClassifyZeroShot, SelfRetrievalOnEveryLayer) {
  World w;
  Rng rng(2);
  const StudentModel s = StudentModel::create(w.backbone, 6, {}, 5, {0, 1});
  for (ExtractionLayer layer : {ExtractionLayer::pooled, ExtractionLayer::projection, ExtractionLayer::feedforward}) {
    const EmbeddingPipeline p(s.audio, layer, heads_of(s));
    const EmbeddingDatabase db = build_embedding_db(w.bot, w.synth, p);
    for (const BotSentence& sent : w.bot.sentences) {
      const Prediction pred = classify_zero_shot(db, synthesize_pseudo_audio(sent.tokens, w.synth), p);
      EXPECT_GE(pred.similarity, 1.0 - 1e-9) << layer_name(layer);
      EXPECT_EQ(pred.intent, sent.intent);
    }
  }
}

TEST(ClassifyZeroShot, SingleEntryAlwaysWins) {
  World w;
  BotDefinition bot;
  bot.intent_vocab = {42};
  bot.sentences = {{9, {1, 2, 3}, 42}};
  const EmbeddingPipeline p(w.backbone, ExtractionLayer::pooled);
  const EmbeddingDatabase db = build_embedding_db(bot, w.synth, p);
  Rng rng(3);
  for (int t = 0; t < 5; ++t) EXPECT_EQ(classify_zero_shot(db, random_matrix(4, 8, rng), p).intent, 42u);
}

TEST(ClassifyZeroShot, TopKSortedAndConsistent) {
  World w;
  const EmbeddingPipeline p(w.backbone, ExtractionLayer::pooled);
  const EmbeddingDatabase db = build_embedding_db(w.bot, w.synth, p);
  Rng rng(4);
  const Prediction pred = classify_zero_shot(db, random_matrix(5, 8, rng), p, 5);
  ASSERT_EQ(pred.top_k.size(), 5u);
  for (std::size_t i = 1; i < pred.top_k.size(); ++i) EXPECT_GE(pred.top_k[i - 1].similarity, pred.top_k[i].similarity);
  EXPECT_EQ(pred.top_k[0].intent, pred.intent);
  EXPECT_EQ(pred.top_k[0].sentence, pred.best_sentence);
  EXPECT_LE(pred.similarity, 1.0);
  EXPECT_GE(pred.similarity, -1.0);
}

TEST(ClassifyZeroShot, InvariantToQueryScaleAndEntryOrder) {
  World w;
  const EmbeddingPipeline p(w.backbone, ExtractionLayer::pooled);
  EmbeddingDatabase db = build_embedding_db(w.bot, w.synth, p);
  Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const Matrix q = random_matrix(1, 12, rng);
    const Prediction base = classify_embedding(db, q);
    EXPECT_EQ(classify_embedding(db, scale(q, 7.5)).best_sentence, base.best_sentence);
    EmbeddingDatabase shuffled = db;
    rng.shuffle(std::span<DbEntry>(shuffled.entries));
    EXPECT_EQ(classify_embedding(shuffled, q).best_sentence, base.best_sentence);
  }
}

TEST(ClassifyZeroShot, Errors) {
  World w;
  const EmbeddingPipeline p(w.backbone, ExtractionLayer::pooled);
  EmbeddingDatabase db = build_embedding_db(w.bot, w.synth, p);
  const AudioBackbone other = AudioBackbone::create(8, 12, 4, true);
  const EmbeddingPipeline q(other, ExtractionLayer::pooled);
  EXPECT_THROW(classify_zero_shot(db, Matrix(2, 8, 1.0), q), StaleDatabaseError);
  EmbeddingDatabase empty = db;
  empty.entries.clear();
  EXPECT_THROW(classify_zero_shot(empty, Matrix(2, 8, 1.0), p), ConfigError);
}

std::vector<Utterance> bot_as_utterances(const BotDefinition& bot, const SynthesizerConfig& synth) {
  std::vector<Utterance> out;
  for (const BotSentence& s : bot.sentences) {
    Utterance u;
    u.id = s.id;
    u.intent = s.intent;
    u.tokens = s.tokens;
    u.frames = synthesize_pseudo_audio(s.tokens, synth);
    out.push_back(u);
  }
  return out;
}

TEST(EvaluateZeroShot, ResynthesizedSourceIsPerfect) {
  World w;
  const EmbeddingPipeline p(w.backbone, ExtractionLayer::pooled);
  const EmbeddingDatabase db = build_embedding_db(w.bot, w.synth, p);
  const auto utts = bot_as_utterances(w.bot, w.synth);
  std::vector<const Utterance*> test;
  for (const auto& u : utts) test.push_back(&u);
  const ZeroShotEvaluation e = evaluate_zero_shot(db, test, p);
  EXPECT_EQ(e.accuracy, 1.0);
  EXPECT_EQ(e.total, utts.size());
  std::size_t diag = 0;
  for (const auto& [key, n] : e.confusion) {
    if (key.first == key.second) diag += n;
  }
  EXPECT_EQ(diag, utts.size());
}

TEST(EvaluateZeroShot, MissingIntentIsCoverageError) {
  World w;
  const EmbeddingPipeline p(w.backbone, ExtractionLayer::pooled);
  const std::vector<IntentId> keep = {10, 11};
  const EmbeddingDatabase db = build_embedding_db(w.bot.restrict_to(keep), w.synth, p);
  const auto utts = bot_as_utterances(w.bot, w.synth);
  std::vector<const Utterance*> test;
  for (const auto& u : utts) test.push_back(&u);
  try {
    evaluate_zero_shot(db, test, p);
    FAIL() << "expected CoverageError";
  } catch (const CoverageError& e) {
    EXPECT_NE(std::string(e.what()).find("12"), std::string::npos);
  }
}

TEST(EvaluateZeroShot, PermutedLabelsFallToChance) {
  const RunConfig cfg = testing::tiny_config();
  const GeneratedCorpus g = testing::tiny_corpus(cfg);
  const AudioBackbone bb = AudioBackbone::create(cfg.synth.audio_dim, cfg.hidden_dim, 11, true);
  const EmbeddingPipeline p(bb, ExtractionLayer::pooled);
  EmbeddingDatabase db = build_embedding_db(g.bot, cfg.synth, p);
  const auto test = g.corpus.select(Split::test, db.intents());
  Rng rng(12);
  std::vector<IntentId> labels;
  for (const auto& e : db.entries) labels.push_back(e.intent);
  rng.shuffle(std::span<IntentId>(labels));
  for (std::size_t i = 0; i < labels.size(); ++i) db.entries[i].intent = labels[i];
  const double n_intents = static_cast<double>(db.intents().size());
  const double chance = 1.0 / n_intents;
  const double sigma = std::sqrt(chance * (1.0 - chance) / static_cast<double>(test.size()));
  EXPECT_NEAR(evaluate_zero_shot(db, test, p).accuracy, chance, 3.0 * sigma);
}

TEST(BotDefinition, Validation) {
  BotDefinition bot = small_bot();
  EXPECT_NO_THROW(bot.validate());
  bot.sentences[0].intent = 99;
  EXPECT_THROW(bot.validate(), ConfigError);
  EXPECT_THROW(BotDefinition{}.validate(), ConfigError);
}

TEST(BotDefinition, TakeAndSamplePerIntent) {
  const BotDefinition bot = small_bot();
  const BotDefinition first = bot.take_per_intent(2);
  EXPECT_EQ(first.sentences.size(), 6u);
  EXPECT_EQ(first.sentences[0].id, 100u);
  EXPECT_EQ(first.sentences[1].id, 101u);
  EXPECT_THROW(bot.take_per_intent(5), ConfigError);
  Rng rng(1);
  const BotDefinition sampled = bot.sample_per_intent(3, rng);
  EXPECT_EQ(sampled.min_sentences_per_intent(), 3u);
  EXPECT_TRUE(std::is_sorted(sampled.sentences.begin(), sampled.sentences.end(),
                             [](const BotSentence& a, const BotSentence& b) { return a.id < b.id; }));
}

}  // namespace
}  // namespace zintent
