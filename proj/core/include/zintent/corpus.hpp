// core/include/zintent/corpus.hpp

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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zintent/matrix.hpp"

namespace zintent {

using TokenId = std::uint32_t;
using IntentId = std::uint32_t;
using UtteranceId = std::uint64_t;
using SentenceId = std::uint64_t;

enum class Split { train, dev, test };

std::string_view split_name(Split s);
Split parse_split(std::string_view name);

/// Paired sample: audio frames (T x d_audio), transcript tokens, intent.
struct Utterance {
  UtteranceId id = 0;
  Matrix frames;
  std::vector<TokenId> tokens;
  IntentId intent = 0;
  Split split = Split::train;
};

struct Corpus {
  std::vector<Utterance> utterances;
  // Intents available for supervised training; everything else is unseen.
  std::vector<IntentId> seen_intents;
  std::vector<IntentId> unseen_intents;
  std::size_t vocab_size = 0;
  std::size_t audio_dim = 0;

  bool is_seen(IntentId intent) const;

  // Utterances of `split` whose intent is in `intents`, in corpus order.
  std::vector<const Utterance*> select(Split split, std::span<const IntentId> intents) const;
  std::vector<const Utterance*> seen(Split split) const { return select(split, seen_intents); }
  std::vector<const Utterance*> unseen(Split split) const { return select(split, unseen_intents); }

  const Utterance* find(UtteranceId id) const;

  // Throws ConfigError on broken invariants (empty frames or tokens, bad intent, token out of range).
  void validate() const;
};

}  // namespace zintent
