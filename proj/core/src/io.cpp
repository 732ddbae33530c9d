// core/src/io.cpp

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

#include "zintent/io.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "binary_io.hpp"
#include "text_io.hpp"
#include "zintent/errors.hpp"

namespace zintent {

namespace {

using detail::header_field;
using detail::parse_uint;

constexpr std::string_view kCorpusMagic = "ZINTENT-CORPUS";
constexpr std::string_view kBotMagic = "ZINTENT-BOT";
constexpr std::string_view kAudioMagic = "ZINTENT-AUDIO";
constexpr char kFramesMagic[8] = {'Z', 'I', 'N', 'T', 'F', 'R', 'M', '1'};

template <typename T>
std::string join_ids(const std::vector<T>& ids, char sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(ids[i]);
  }
  return out;
}

template <typename T>
std::vector<T> parse_ids(std::string_view s, char sep) {
  std::vector<T> out;
  if (s.empty()) return out;
  for (auto part : detail::split(s, sep)) out.push_back(parse_uint<T>(part));
  return out;
}

std::string line_error(std::string_view what, std::size_t line_no, const std::string& msg) {
  return std::string(what) + " line " + std::to_string(line_no) + ": " + msg;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw DependencyError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

void save_corpus(const std::string& path, const Corpus& corpus) {
  auto index = open_out(path, std::ios::out | std::ios::binary);
  auto frames = open_out(path + ".frames", std::ios::out | std::ios::binary);
  frames.write(kFramesMagic, sizeof(kFramesMagic));
  index << kCorpusMagic << " v1 audio_dim=" << corpus.audio_dim << " vocab=" << corpus.vocab_size
        << " seen=" << join_ids(corpus.seen_intents, ',') << " unseen=" << join_ids(corpus.unseen_intents, ',')
        << '\n';
  std::uint64_t offset = 0;
  for (const auto& u : corpus.utterances) {
    if (u.frames.cols() != corpus.audio_dim) {
      throw DimensionError("utterance " + std::to_string(u.id) + " has " + std::to_string(u.frames.cols()) +
                           " audio columns, corpus has " + std::to_string(corpus.audio_dim));
    }
    index << u.id << '\t' << split_name(u.split) << '\t' << u.intent << '\t' << join_ids(u.tokens, ' ') << '\t'
          << offset << '\t' << u.frames.rows() << '\n';
    for (double v : u.frames.values()) detail::put_f64(frames, v);
    offset += u.frames.rows();
  }
  if (!index || !frames) throw Error("corpus: write failed for '" + path + "'");
}

Corpus load_corpus(const std::string& path) {
  auto index = open_in(path, std::ios::in | std::ios::binary);
  auto frames = open_in(path + ".frames", std::ios::in | std::ios::binary);
  detail::Reader blob(frames, "corpus frames");
  char magic[sizeof(kFramesMagic)];
  blob.bytes(magic, sizeof(magic));
  if (!std::equal(magic, magic + sizeof(magic), kFramesMagic)) throw FormatError("corpus frames: bad magic");

  std::string line;
  if (!std::getline(index, line)) throw FormatError("corpus: missing header");
  std::istringstream hs(line);
  std::string m, version, dim, vocab, seen, unseen;
  hs >> m >> version >> dim >> vocab >> seen >> unseen;
  if (m != kCorpusMagic) throw FormatError("corpus: bad magic '" + m + "'");
  if (version != "v1") throw FormatError("corpus: unsupported format version '" + version + "'");
  Corpus c;
  c.audio_dim = parse_uint<std::size_t>(header_field(dim, "audio_dim", "corpus"));
  c.vocab_size = parse_uint<std::size_t>(header_field(vocab, "vocab", "corpus"));
  c.seen_intents = parse_ids<IntentId>(header_field(seen, "seen", "corpus"), ',');
  c.unseen_intents = parse_ids<IntentId>(header_field(unseen, "unseen", "corpus"), ',');

  std::uint64_t expected_offset = 0;
  std::size_t line_no = 1;
  while (std::getline(index, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 6) throw FormatError(line_error("corpus", line_no, "expected 6 tab-separated fields"));
    Utterance u;
    u.id = parse_uint<UtteranceId>(fields[0]);
    u.split = parse_split(fields[1]);
    u.intent = parse_uint<IntentId>(fields[2]);
    u.tokens = parse_ids<TokenId>(fields[3], ' ');
    const auto offset = parse_uint<std::uint64_t>(fields[4]);
    const auto rows = parse_uint<std::size_t>(fields[5]);
    if (offset != expected_offset) {
      throw FormatError(line_error("corpus", line_no, "frame offset " + std::to_string(offset) + ", expected " +
                                                          std::to_string(expected_offset)));
    }
    u.frames = Matrix(rows, c.audio_dim);
    for (double& v : u.frames.values()) v = blob.f64();
    expected_offset += rows;
    c.utterances.push_back(std::move(u));
  }
  c.validate();
  return c;
}

void write_bot(std::ostream& out, const BotDefinition& bot) {
  out << kBotMagic << " v1 intents=" << join_ids(bot.intent_vocab, ',') << '\n';
  for (const auto& s : bot.sentences) out << s.id << '\t' << s.intent << '\t' << join_ids(s.tokens, ' ') << '\n';
}

BotDefinition read_bot(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("bot: missing header");
  std::istringstream hs(line);
  std::string m, version, intents;
  hs >> m >> version >> intents;
  if (m != kBotMagic) throw FormatError("bot: bad magic '" + m + "'");
  if (version != "v1") throw FormatError("bot: unsupported format version '" + version + "'");
  BotDefinition bot;
  bot.intent_vocab = parse_ids<IntentId>(header_field(intents, "intents", "bot"), ',');
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = detail::split(line, '\t');
    if (fields.size() != 3) throw FormatError(line_error("bot", line_no, "expected 3 tab-separated fields"));
    bot.sentences.push_back(
        {parse_uint<SentenceId>(fields[0]), parse_ids<TokenId>(fields[2], ' '), parse_uint<IntentId>(fields[1])});
  }
  bot.validate();
  return bot;
}

void save_bot(const std::string& path, const BotDefinition& bot) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  write_bot(out, bot);
}

BotDefinition load_bot(const std::string& path) {
  auto in = open_in(path);
  return read_bot(in);
}

void write_audio(std::ostream& out, const Matrix& frames) {
  out << kAudioMagic << " v1 rows=" << frames.rows() << " cols=" << frames.cols() << '\n';
  for (std::size_t r = 0; r < frames.rows(); ++r) {
    const auto row = frames.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? " " : "") << detail::format_double(row[c]);
    out << '\n';
  }
}

Matrix read_audio(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("audio: missing header");
  std::istringstream hs(line);
  std::string m, version, rows_tok, cols_tok;
  hs >> m >> version >> rows_tok >> cols_tok;
  if (m != kAudioMagic) throw FormatError("audio: bad magic '" + m + "'");
  if (version != "v1") throw FormatError("audio: unsupported format version '" + version + "'");
  const auto rows = parse_uint<std::size_t>(header_field(rows_tok, "rows", "audio"));
  const auto cols = parse_uint<std::size_t>(header_field(cols_tok, "cols", "audio"));
  if (rows == 0 || cols == 0) throw EmptyInputError("audio: no frames");
  Matrix frames(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw FormatError("audio: expected " + std::to_string(rows) + " frames");
    const auto parts = detail::split(line, ' ');
    if (parts.size() != cols) throw FormatError(line_error("audio", r + 2, "expected " + std::to_string(cols) + " values"));
    for (std::size_t c = 0; c < cols; ++c) frames(r, c) = detail::parse_double(parts[c]);
  }
  return frames;
}

void save_audio(const std::string& path, const Matrix& frames) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  write_audio(out, frames);
}

Matrix load_audio(const std::string& path) {
  auto in = open_in(path);
  return read_audio(in);
}

}  // namespace zintent
