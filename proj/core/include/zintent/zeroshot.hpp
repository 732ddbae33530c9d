// core/include/zintent/zeroshot.hpp

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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zintent/corpus.hpp"
#include "zintent/encoders.hpp"
#include "zintent/rng.hpp"

namespace zintent {

struct StudentModel;

struct BotSentence {
  SentenceId id = 0;
  std::vector<TokenId> tokens;
  IntentId intent = 0;

  friend bool operator==(const BotSentence&, const BotSentence&) = default;
};

/// Developer-provided text sentences with intent labels; no audio.
struct BotDefinition {
  std::vector<BotSentence> sentences;
  std::vector<IntentId> intent_vocab;

  // Throws ConfigError when empty or a label is outside intent_vocab.
  void validate() const;

  // First `k` sentences of every intent, in order. Throws ConfigError if an intent has fewer.
  BotDefinition take_per_intent(std::size_t k) const;
  // `k` sentences per intent drawn without replacement, kept in original order.
  BotDefinition sample_per_intent(std::size_t k, Rng& rng) const;
  // Sentences whose intent is in `intents`; intent_vocab becomes `intents`.
  BotDefinition restrict_to(std::span<const IntentId> intents) const;
  std::size_t min_sentences_per_intent() const;

  friend bool operator==(const BotDefinition&, const BotDefinition&) = default;
};

/// Clean-channel stand-in for a neural speech synthesizer.
///
/// Every token owns a seeded prototype frame; it emits `frames_per_token`
/// frames of prototype plus a fixed per-frame jitter. Output depends only on
/// the tokens and the configuration.
struct SynthesizerConfig {
  std::size_t audio_dim = 16;
  std::size_t frames_per_token = 4;
  double frame_jitter = 0.5;
  std::uint64_t seed = 7;
};

Matrix synthesize_pseudo_audio(std::span<const TokenId> tokens, const SynthesizerConfig& config);

enum class ExtractionLayer { pooled, projection, feedforward };

std::string_view layer_name(ExtractionLayer layer);
ExtractionLayer parse_layer(std::string_view name);

struct ExtractionHeads {
  const ProjectionHead* projection = nullptr;
  const Dense* feedforward = nullptr;
};

ExtractionHeads heads_of(const StudentModel& student);

/// Audio -> retrieval embedding, taken from a chosen point of the network.
class EmbeddingPipeline {
 public:
  // Throws ConfigError when `layer` needs heads that are missing, DimensionError on width mismatch.
  EmbeddingPipeline(const AudioBackbone& backbone, ExtractionLayer layer, ExtractionHeads heads = {});

  ExtractionLayer layer() const { return layer_; }
  std::size_t dim() const;
  // Checksum of every weight the embedding depends on plus the layer choice.
  std::uint64_t fingerprint() const { return fingerprint_; }

  // Unnormalized 1 x dim embedding (eval mode).
  Matrix embed(const Matrix& frames) const;

 private:
  const AudioBackbone* backbone_;
  ExtractionLayer layer_;
  ExtractionHeads heads_;
  std::uint64_t fingerprint_ = 0;
};

struct DbEntry {
  SentenceId sentence = 0;
  IntentId intent = 0;
  std::vector<double> embedding;  // unit norm

  friend bool operator==(const DbEntry&, const DbEntry&) = default;
};

struct EmbeddingDatabase {
  std::size_t dim = 0;
  ExtractionLayer layer = ExtractionLayer::pooled;
  std::uint64_t fingerprint = 0;
  std::vector<DbEntry> entries;

  std::vector<IntentId> intents() const;

  friend bool operator==(const EmbeddingDatabase&, const EmbeddingDatabase&) = default;
};

/// Synthesizes every bot sentence, embeds it and stores the normalized vector.
EmbeddingDatabase build_embedding_db(const BotDefinition& bot, const SynthesizerConfig& synth,
                                     const EmbeddingPipeline& pipeline);

struct Hit {
  IntentId intent = 0;
  SentenceId sentence = 0;
  double similarity = 0.0;
};

struct Prediction {
  IntentId intent = 0;
  SentenceId best_sentence = 0;
  double similarity = 0.0;
  // Best entries by similarity descending, ties by lowest sentence id.
  std::vector<Hit> top_k;
};

// Throws ConfigError on an empty database and StaleDatabaseError on a pipeline mismatch.
void check_compatible(const EmbeddingDatabase& db, const EmbeddingPipeline& pipeline);

Prediction classify_embedding(const EmbeddingDatabase& db, const Matrix& query, std::size_t k = 1);
Prediction classify_zero_shot(const EmbeddingDatabase& db, const Matrix& frames,
                              const EmbeddingPipeline& pipeline, std::size_t k = 1);

struct ZeroShotEvaluation {
  double accuracy = 0.0;
  std::size_t total = 0;
  std::size_t correct = 0;
  // (true intent, predicted intent) -> count
  std::map<std::pair<IntentId, IntentId>, std::size_t> confusion;
};

/// Top-1 accuracy over `test`; every test intent must be present in the database.
ZeroShotEvaluation evaluate_zero_shot(const EmbeddingDatabase& db, std::span<const Utterance* const> test,
                                      const EmbeddingPipeline& pipeline);

// Same, with the query embeddings already computed (row i for test[i]).
ZeroShotEvaluation evaluate_embeddings(const EmbeddingDatabase& db, std::span<const Utterance* const> test,
                                       const Matrix& queries);

// EDB v1 text format; floats with 17 significant digits so parsing is exact.
void write_edb(std::ostream& out, const EmbeddingDatabase& db);
EmbeddingDatabase read_edb(std::istream& in);
void save_edb(const std::string& path, const EmbeddingDatabase& db);
EmbeddingDatabase load_edb(const std::string& path);

}  // namespace zintent
