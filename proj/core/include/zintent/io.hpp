// core/include/zintent/io.hpp

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

#include <iosfwd>
#include <string>

#include "zintent/corpus.hpp"
#include "zintent/zeroshot.hpp"

namespace zintent {

/// Corpus as a text index plus a binary frame blob.
///
/// Index `path`:
///   ZINTENT-CORPUS v1 audio_dim=<d> vocab=<v> seen=<ids> unseen=<ids>
///   <id>\t<split>\t<intent>\t<tokens space-separated>\t<frame offset>\t<frame rows>
/// Sidecar `path + ".frames"`: "ZINTFRM1" then little-endian f64 rows of width d.
void save_corpus(const std::string& path, const Corpus& corpus);
Corpus load_corpus(const std::string& path);

/// ZINTENT-BOT v1 intents=<ids>, then <sentence id>\t<intent>\t<tokens>.
void write_bot(std::ostream& out, const BotDefinition& bot);
BotDefinition read_bot(std::istream& in);
void save_bot(const std::string& path, const BotDefinition& bot);
BotDefinition load_bot(const std::string& path);

/// ZINTENT-AUDIO v1 rows=<T> cols=<d>, then one whitespace-separated frame per line.
void write_audio(std::ostream& out, const Matrix& frames);
Matrix read_audio(std::istream& in);
void save_audio(const std::string& path, const Matrix& frames);
Matrix load_audio(const std::string& path);

}  // namespace zintent
