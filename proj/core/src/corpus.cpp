// core/src/corpus.cpp

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

#include "zintent/corpus.hpp"

#include <algorithm>

#include "zintent/errors.hpp"

namespace zintent {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "dev") return Split::dev;
  if (name == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(name) + "'");
}

bool Corpus::is_seen(IntentId intent) const {
  return std::find(seen_intents.begin(), seen_intents.end(), intent) != seen_intents.end();
}

std::vector<const Utterance*> Corpus::select(Split split, std::span<const IntentId> intents) const {
  std::vector<const Utterance*> out;
  for (const auto& u : utterances) {
    if (u.split != split) continue;
    if (std::find(intents.begin(), intents.end(), u.intent) == intents.end()) continue;
    out.push_back(&u);
  }
  return out;
}

const Utterance* Corpus::find(UtteranceId id) const {
  for (const auto& u : utterances) {
    if (u.id == id) return &u;
  }
  return nullptr;
}

void Corpus::validate() const {
  for (const auto& u : utterances) {
    const std::string where = "utterance " + std::to_string(u.id);
    if (u.frames.rows() == 0) throw ConfigError(where + ": no audio frames");
    if (u.frames.cols() != audio_dim) throw ConfigError(where + ": frame width " + u.frames.shape());
    if (u.tokens.empty()) throw ConfigError(where + ": empty transcript");
    for (TokenId t : u.tokens) {
      if (t >= vocab_size) throw ConfigError(where + ": token " + std::to_string(t) + " out of vocabulary");
    }
    const bool known = is_seen(u.intent) ||
                       std::find(unseen_intents.begin(), unseen_intents.end(), u.intent) != unseen_intents.end();
    if (!known) throw ConfigError(where + ": intent " + std::to_string(u.intent) + " not in vocabulary");
  }
}

}  // namespace zintent
