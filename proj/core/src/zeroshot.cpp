// core/src/zeroshot.cpp

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

#include "zintent/zeroshot.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "zintent/errors.hpp"
#include "zintent/params.hpp"
#include "zintent/student.hpp"
#include "text_io.hpp"

namespace zintent {

using detail::format_double;
using detail::header_field;
using detail::parse_double;
using detail::parse_uint;

void BotDefinition::validate() const {
  if (sentences.empty()) throw ConfigError("bot definition has no sentences");
  std::set<SentenceId> ids;
  for (const auto& s : sentences) {
    if (s.tokens.empty()) throw ConfigError("bot sentence " + std::to_string(s.id) + " is empty");
    if (std::find(intent_vocab.begin(), intent_vocab.end(), s.intent) == intent_vocab.end()) {
      throw ConfigError("bot sentence " + std::to_string(s.id) + " has intent " + std::to_string(s.intent) +
                        " outside the bot intent set");
    }
    if (!ids.insert(s.id).second) throw ConfigError("duplicate bot sentence id " + std::to_string(s.id));
  }
}

BotDefinition BotDefinition::take_per_intent(std::size_t k) const {
  BotDefinition out;
  out.intent_vocab = intent_vocab;
  std::map<IntentId, std::size_t> taken;
  for (const auto& s : sentences) {
    if (taken[s.intent] < k) {
      out.sentences.push_back(s);
      ++taken[s.intent];
    }
  }
  for (IntentId i : intent_vocab) {
    if (taken[i] < k) {
      throw ConfigError("intent " + std::to_string(i) + " has only " + std::to_string(taken[i]) +
                        " sentences, " + std::to_string(k) + " requested");
    }
  }
  return out;
}

BotDefinition BotDefinition::sample_per_intent(std::size_t k, Rng& rng) const {
  std::map<IntentId, std::vector<std::size_t>> by_intent;
  for (std::size_t i = 0; i < sentences.size(); ++i) by_intent[sentences[i].intent].push_back(i);
  std::vector<std::size_t> keep;
  for (IntentId intent : intent_vocab) {
    auto& pool = by_intent[intent];
    if (pool.size() < k) {
      throw ConfigError("intent " + std::to_string(intent) + " has only " + std::to_string(pool.size()) +
                        " sentences, " + std::to_string(k) + " requested");
    }
    rng.shuffle(std::span<std::size_t>(pool));
    keep.insert(keep.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  }
  std::sort(keep.begin(), keep.end());
  BotDefinition out;
  out.intent_vocab = intent_vocab;
  for (std::size_t i : keep) out.sentences.push_back(sentences[i]);
  return out;
}

BotDefinition BotDefinition::restrict_to(std::span<const IntentId> intents) const {
  BotDefinition out;
  out.intent_vocab.assign(intents.begin(), intents.end());
  for (const auto& s : sentences) {
    if (std::find(intents.begin(), intents.end(), s.intent) != intents.end()) out.sentences.push_back(s);
  }
  return out;
}

std::size_t BotDefinition::min_sentences_per_intent() const {
  std::map<IntentId, std::size_t> count;
  for (IntentId i : intent_vocab) count[i] = 0;
  for (const auto& s : sentences) ++count[s.intent];
  std::size_t m = SIZE_MAX;
  for (const auto& [intent, c] : count) m = std::min(m, c);
  return count.empty() ? 0 : m;
}

Matrix synthesize_pseudo_audio(std::span<const TokenId> tokens, const SynthesizerConfig& config) {
  if (tokens.empty()) throw EmptyInputError("synthesize_pseudo_audio: no tokens");
  if (config.audio_dim == 0 || config.frames_per_token == 0) {
    throw ConfigError("synthesizer dimensions must be positive");
  }
  const std::size_t d = config.audio_dim;
  Matrix frames(tokens.size() * config.frames_per_token, d);
  std::vector<double> prototype(d);
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    Rng rng(mix_seed(config.seed, tokens[t]));
    for (double& v : prototype) v = rng.normal();
    for (std::size_t k = 0; k < config.frames_per_token; ++k) {
      auto row = frames.row(t * config.frames_per_token + k);
      for (std::size_t j = 0; j < d; ++j) row[j] = prototype[j] + config.frame_jitter * rng.normal();
    }
  }
  return frames;
}

std::string_view layer_name(ExtractionLayer layer) {
  switch (layer) {
    case ExtractionLayer::pooled: return "pooled";
    case ExtractionLayer::projection: return "projection";
    case ExtractionLayer::feedforward: return "feedforward";
  }
  return "pooled";
}

ExtractionLayer parse_layer(std::string_view name) {
  if (name == "pooled") return ExtractionLayer::pooled;
  if (name == "projection") return ExtractionLayer::projection;
  if (name == "feedforward") return ExtractionLayer::feedforward;
  throw ConfigError("unknown extraction layer '" + std::string(name) + "'");
}

ExtractionHeads heads_of(const StudentModel& student) {
  return {&student.audio_head, &student.feedforward};
}

EmbeddingPipeline::EmbeddingPipeline(const AudioBackbone& backbone, ExtractionLayer layer, ExtractionHeads heads)
    : backbone_(&backbone), layer_(layer), heads_(heads) {
  if (layer != ExtractionLayer::pooled) {
    if (heads_.projection == nullptr) {
      throw ConfigError("extraction layer '" + std::string(layer_name(layer)) + "' needs a projection head");
    }
    if (heads_.projection->linear.in_dim() != backbone.hidden_dim()) {
      throw DimensionError("projection head input " + std::to_string(heads_.projection->linear.in_dim()) +
                           " does not match backbone width " + std::to_string(backbone.hidden_dim()));
    }
  }
  if (layer == ExtractionLayer::feedforward) {
    if (heads_.feedforward == nullptr) throw ConfigError("extraction layer 'feedforward' needs a feed-forward layer");
    if (heads_.feedforward->in_dim() != heads_.projection->out_dim()) {
      throw DimensionError("feed-forward input does not match projection width");
    }
  }
  if (layer == ExtractionLayer::pooled) heads_ = {};
  if (layer == ExtractionLayer::projection) heads_.feedforward = nullptr;

  Fingerprint fp;
  fp.add(layer_name(layer_));
  std::vector<ConstParamRef> params;
  backbone.append_params(params, "audio.");
  if (heads_.projection != nullptr) {
    params.push_back({"projection.w", &heads_.projection->linear.w, true});
    params.push_back({"projection.b", &heads_.projection->linear.b, true});
  }
  if (heads_.feedforward != nullptr) {
    params.push_back({"feedforward.w", &heads_.feedforward->w, true});
    params.push_back({"feedforward.b", &heads_.feedforward->b, true});
  }
  fp.add(fingerprint_params(params));
  fingerprint_ = fp.value();
}

std::size_t EmbeddingPipeline::dim() const {
  switch (layer_) {
    case ExtractionLayer::pooled: return backbone_->hidden_dim();
    case ExtractionLayer::projection: return heads_.projection->out_dim();
    case ExtractionLayer::feedforward: return heads_.feedforward->out_dim();
  }
  return 0;
}

Matrix EmbeddingPipeline::embed(const Matrix& frames) const {
  Matrix x = encode_audio(*backbone_, frames);
  if (layer_ == ExtractionLayer::pooled) return x;
  x = linear_forward(x, heads_.projection->linear);
  if (layer_ == ExtractionLayer::projection) return x;
  return relu_forward(linear_forward(x, *heads_.feedforward));
}

std::vector<IntentId> EmbeddingDatabase::intents() const {
  std::set<IntentId> s;
  for (const auto& e : entries) s.insert(e.intent);
  return {s.begin(), s.end()};
}

EmbeddingDatabase build_embedding_db(const BotDefinition& bot, const SynthesizerConfig& synth,
                                     const EmbeddingPipeline& pipeline) {
  bot.validate();
  EmbeddingDatabase db;
  db.dim = pipeline.dim();
  db.layer = pipeline.layer();
  db.fingerprint = pipeline.fingerprint();
  db.entries.reserve(bot.sentences.size());
  for (const auto& s : bot.sentences) {
    Matrix e = l2_normalize(pipeline.embed(synthesize_pseudo_audio(s.tokens, synth)));
    db.entries.push_back({s.id, s.intent, {e.values().begin(), e.values().end()}});
  }
  std::stable_sort(db.entries.begin(), db.entries.end(),
                   [](const DbEntry& a, const DbEntry& b) { return a.sentence < b.sentence; });
  return db;
}

void check_compatible(const EmbeddingDatabase& db, const EmbeddingPipeline& pipeline) {
  if (db.entries.empty()) throw ConfigError("embedding database is empty");
  if (db.layer != pipeline.layer()) {
    throw StaleDatabaseError("database built from layer '" + std::string(layer_name(db.layer)) +
                             "', query pipeline uses '" + std::string(layer_name(pipeline.layer())) + "'");
  }
  if (db.fingerprint != pipeline.fingerprint()) {
    throw StaleDatabaseError("database fingerprint " + to_hex(db.fingerprint) + " does not match model " +
                             to_hex(pipeline.fingerprint()));
  }
  if (db.dim != pipeline.dim()) throw StaleDatabaseError("database dimension does not match pipeline");
}

Prediction classify_embedding(const EmbeddingDatabase& db, const Matrix& query, std::size_t k) {
  if (db.entries.empty()) throw ConfigError("embedding database is empty");
  if (query.size() != db.dim) {
    throw DimensionError("query width " + std::to_string(query.size()) + " vs database " + std::to_string(db.dim));
  }
  const double norm = l2_norm(query.values());
  if (!(norm > 0.0)) throw DegenerateVectorError("query embedding is a zero vector");
  std::vector<Hit> hits;
  hits.reserve(db.entries.size());
  for (const auto& e : db.entries) {
    const double sim = std::clamp(dot(query.values(), e.embedding) / norm, -1.0, 1.0);
    hits.push_back({e.intent, e.sentence, sim});
  }
  const std::size_t keep = std::clamp<std::size_t>(k, 1, hits.size());
  auto better = [](const Hit& a, const Hit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.sentence < b.sentence;
  };
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), better);
  hits.resize(keep);
  Prediction p;
  p.intent = hits.front().intent;
  p.best_sentence = hits.front().sentence;
  p.similarity = hits.front().similarity;
  p.top_k = std::move(hits);
  return p;
}

Prediction classify_zero_shot(const EmbeddingDatabase& db, const Matrix& frames,
                              const EmbeddingPipeline& pipeline, std::size_t k) {
  check_compatible(db, pipeline);
  return classify_embedding(db, pipeline.embed(frames), k);
}

ZeroShotEvaluation evaluate_embeddings(const EmbeddingDatabase& db, std::span<const Utterance* const> test,
                                       const Matrix& queries) {
  if (test.empty()) throw EmptyInputError("evaluate_zero_shot: empty test set");
  const auto covered = db.intents();
  std::set<IntentId> missing;
  for (const Utterance* u : test) {
    if (!std::binary_search(covered.begin(), covered.end(), u->intent)) missing.insert(u->intent);
  }
  if (!missing.empty()) {
    std::string list;
    for (IntentId i : missing) list += (list.empty() ? "" : ",") + std::to_string(i);
    throw CoverageError("test intents missing from embedding database: " + list);
  }
  ZeroShotEvaluation ev;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const Prediction p = classify_embedding(db, queries.row_copy(i), 1);
    ++ev.confusion[{test[i]->intent, p.intent}];
    if (p.intent == test[i]->intent) ++ev.correct;
  }
  ev.total = test.size();
  ev.accuracy = static_cast<double>(ev.correct) / static_cast<double>(ev.total);
  return ev;
}

ZeroShotEvaluation evaluate_zero_shot(const EmbeddingDatabase& db, std::span<const Utterance* const> test,
                                      const EmbeddingPipeline& pipeline) {
  check_compatible(db, pipeline);
  std::vector<Matrix> rows;
  rows.reserve(test.size());
  for (const Utterance* u : test) rows.push_back(pipeline.embed(u->frames));
  return evaluate_embeddings(db, test, stack_rows(rows));
}

namespace {

constexpr std::string_view kEdbMagic = "ZINTENT-EDB";

}  // namespace

void write_edb(std::ostream& out, const EmbeddingDatabase& db) {
  out << kEdbMagic << " v1 dim=" << db.dim << " layer=" << layer_name(db.layer)
      << " fingerprint=" << to_hex(db.fingerprint) << '\n';
  for (const auto& e : db.entries) {
    if (e.embedding.size() != db.dim) throw DimensionError("EDB entry width does not match header");
    out << e.sentence << '\t' << e.intent << '\t';
    for (std::size_t j = 0; j < e.embedding.size(); ++j) {
      if (j) out << ' ';
      out << format_double(e.embedding[j]);
    }
    out << '\n';
  }
}

EmbeddingDatabase read_edb(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("EDB: missing header");
  std::istringstream hs(line);
  std::string magic, version, dim, layer, fp;
  hs >> magic >> version >> dim >> layer >> fp;
  if (magic != kEdbMagic) throw FormatError("EDB: bad magic '" + magic + "'");
  if (version != "v1") throw FormatError("EDB: unsupported format version '" + version + "'");
  EmbeddingDatabase db;
  db.dim = parse_uint<std::size_t>(header_field(dim, "dim", "EDB"));
  db.layer = parse_layer(header_field(layer, "layer", "EDB"));
  db.fingerprint = from_hex(header_field(fp, "fingerprint", "EDB"));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) throw FormatError("EDB line " + std::to_string(line_no) + ": expected 3 fields");
    DbEntry e;
    e.sentence = parse_uint<SentenceId>(std::string_view(line).substr(0, t1));
    e.intent = parse_uint<IntentId>(std::string_view(line).substr(t1 + 1, t2 - t1 - 1));
    std::string_view rest = std::string_view(line).substr(t2 + 1);
    while (!rest.empty()) {
      const auto sp = rest.find(' ');
      e.embedding.push_back(parse_double(rest.substr(0, sp)));
      rest = sp == std::string_view::npos ? std::string_view{} : rest.substr(sp + 1);
    }
    if (e.embedding.size() != db.dim) {
      throw FormatError("EDB line " + std::to_string(line_no) + ": " + std::to_string(e.embedding.size()) +
                        " values, header says " + std::to_string(db.dim));
    }
    db.entries.push_back(std::move(e));
  }
  return db;
}

void save_edb(const std::string& path, const EmbeddingDatabase& db) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_edb(out, db);
  if (!out) throw Error("failed writing '" + path + "'");
}

EmbeddingDatabase load_edb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DependencyError("cannot open embedding database '" + path + "'");
  return read_edb(in);
}

}  // namespace zintent
