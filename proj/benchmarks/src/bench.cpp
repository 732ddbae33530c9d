// benchmarks/src/bench.cpp

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

#include <benchmark/benchmark.h>

#include "zintent/harness.hpp"

namespace zintent {
namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Matmul)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNCubed);

void BM_EncodeAudio(benchmark::State& state) {
  const RunConfig cfg;
  const AudioBackbone bb = AudioBackbone::create(cfg.synth.audio_dim, cfg.hidden_dim, 1, true);
  Rng rng(2);
  const Matrix frames = random_matrix(static_cast<std::size_t>(state.range(0)), cfg.synth.audio_dim, rng);
  for (auto _ : state) benchmark::DoNotOptimize(encode_audio(bb, frames));
}
BENCHMARK(BM_EncodeAudio)->Arg(10)->Arg(40)->Arg(160);

void BM_LossCl(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const Matrix c = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(loss_cl(c));
}
BENCHMARK(BM_LossCl)->Arg(8)->Arg(32)->Arg(128);

void BM_TeacherStep(benchmark::State& state) {
  RunConfig cfg;
  cfg.corpus.sentences_per_intent = 20;
  const GeneratedCorpus g = generate_corpus(cfg.corpus, cfg.synth);
  const TeacherModel model = make_teacher(Variant::mm_cl, g.corpus, cfg);
  std::vector<TeacherInput> inputs;
  for (const Utterance* u : g.corpus.seen(Split::train)) {
    inputs.push_back(make_teacher_input(model, *u));
    if (inputs.size() == static_cast<std::size_t>(state.range(0))) break;
  }
  std::vector<const TeacherInput*> batch;
  for (const auto& in : inputs) batch.push_back(&in);
  Rng rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(teacher_step(model, batch, rng, true));
}
BENCHMARK(BM_TeacherStep)->Arg(8)->Arg(32);

void BM_ClassifyZeroShot(benchmark::State& state) {
  RunConfig cfg;
  cfg.corpus.sentences_per_intent = 60;
  const GeneratedCorpus g = generate_corpus(cfg.corpus, cfg.synth);
  const AudioBackbone bb = AudioBackbone::create(cfg.synth.audio_dim, cfg.hidden_dim, 1, true);
  const EmbeddingPipeline p(bb, ExtractionLayer::pooled);
  const EmbeddingDatabase db = build_embedding_db(g.bot.take_per_intent(cfg.db_sentences_per_intent), cfg.synth, p);
  const Matrix& query = g.corpus.utterances.front().frames;
  for (auto _ : state) benchmark::DoNotOptimize(classify_zero_shot(db, query, p));
  state.counters["db_entries"] = static_cast<double>(db.entries.size());
}
BENCHMARK(BM_ClassifyZeroShot);

}  // namespace
}  // namespace zintent

BENCHMARK_MAIN();
