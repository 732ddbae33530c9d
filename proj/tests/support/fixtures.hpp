// tests/support/fixtures.hpp

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

#include "zintent/config.hpp"
#include "zintent/harness.hpp"

namespace zintent::testing {

// A few intents, narrow models and short training: seconds, not minutes.
inline RunConfig tiny_config() {
  RunConfig c;
  c.corpus.n_intents_seen = 3;
  c.corpus.n_intents_unseen = 2;
  c.corpus.vocab_size = 40;
  c.corpus.keywords_per_intent = 3;
  c.corpus.sentences_per_intent = 40;
  c.corpus.sentence_length_min = 4;
  c.corpus.sentence_length_max = 6;
  c.corpus.audio_noise_sigma = 0.2;
  c.synth.audio_dim = 8;
  c.synth.frames_per_token = 2;
  c.hidden_dim = 16;
  c.embedding_dim = 16;
  c.train.epochs = 3;
  c.train.batch_size = 8;
  c.train.adam.lr = 1e-3;
  c.db_sentences_per_intent = 10;
  c.replicate_seeds = {1, 2};
  c.sweep_sizes = {2, 5, 10};
  c.sweep_repeats = 3;
  return c;
}

inline GeneratedCorpus tiny_corpus(const RunConfig& c = tiny_config()) { return generate_corpus(c.corpus, c.synth); }

}  // namespace zintent::testing
