// tests/unit/cli_test.cpp

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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "support/fixtures.hpp"
#include "zintent/checkpoint.hpp"
#include "zintent/io.hpp"

namespace zintent {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Value of a `key\tvalue` line in command output.
std::string field(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key + '\t', 0) == 0) return line.substr(key.size() + 1);
  }
  return {};
}

std::vector<std::vector<std::string>> rows(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    std::string cell;
    while (std::getline(cs, cell, '\t')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

// One generated corpus and two trained checkpoints shared by the suite.
class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = fs::temp_directory_path() / "zintent-cli-test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    RunConfig cfg = testing::tiny_config();
    cfg.output_dir = (dir_ / "run").string();
    std::ofstream(dir_ / "tiny.ini") << dump_config(cfg);
    ASSERT_EQ(run({"generate", "-c", config()}).code, 0);
    ASSERT_EQ(run({"train", "-c", config(), "--variant", "mm-cl"}).code, 0);
    ASSERT_EQ(run({"train", "-c", config(), "--variant", "stu-mm-cl", "--teacher", path("mm-cl.ckpt")}).code, 0);
  }
  static void TearDownTestSuite() { fs::remove_all(dir_); }

  static std::string config() { return (dir_ / "tiny.ini").string(); }
  static std::string path(const std::string& name) { return (dir_ / "run" / name).string(); }
  static std::string scratch(const std::string& name) { return (dir_ / name).string(); }

  static inline fs::path dir_;
};

TEST_F(CliTest, GenerateWritesExpectedCounts) {
  const Result r = run({"generate", "-c", config(), "-o", scratch("gen")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(field(r.out, "utterances"), "200");
  EXPECT_EQ(field(r.out, "train"), "140");
  EXPECT_EQ(field(r.out, "dev"), "20");
  EXPECT_EQ(field(r.out, "test"), "40");
  for (const char* f : {"corpus.tsv", "corpus.tsv.frames", "bot-pool.tsv", "bot-unseen.tsv", "bot-mix.tsv", "config.ini"}) {
    EXPECT_TRUE(fs::exists(fs::path(scratch("gen")) / f)) << f;
  }
  EXPECT_EQ(load_corpus(scratch("gen/corpus.tsv")).utterances.size(), 200u);
}

TEST_F(CliTest, GenerateIsDeterministic) {
  ASSERT_EQ(run({"generate", "-c", config(), "-o", scratch("g1")}).code, 0);
  ASSERT_EQ(run({"generate", "-c", config(), "-o", scratch("g2")}).code, 0);
  for (const char* f : {"corpus.tsv", "corpus.tsv.frames", "bot-pool.tsv", "bot-unseen.tsv"}) {
    EXPECT_EQ(slurp(fs::path(scratch("g1")) / f), slurp(fs::path(scratch("g2")) / f)) << f;
  }
}

TEST_F(CliTest, GenerateDefaultSplitProportions) {
  const Result r = run({"generate", "-o", scratch("default")});
  ASSERT_EQ(r.code, 0) << r.err;
  const double total = std::stod(field(r.out, "utterances"));
  EXPECT_NEAR(std::stod(field(r.out, "train")) / total, 0.7, 0.01);
  EXPECT_NEAR(std::stod(field(r.out, "dev")) / total, 0.1, 0.01);
  EXPECT_NEAR(std::stod(field(r.out, "test")) / total, 0.2, 0.01);
}

TEST_F(CliTest, LogsResolvedConfiguration) {
  const Result r = run({"generate", "-c", config(), "-o", scratch("log"), "--set", "teacher.tau=0.25"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("# resolved configuration"), std::string::npos);
  EXPECT_NE(r.err.find("tau=0.25"), std::string::npos);
  EXPECT_NE(r.err.find("gamma=10"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsExitTwo) {
  EXPECT_EQ(run({"generate", "-c", config(), "--set", "teacher.nope=1"}).code, cli::kConfigError);
  EXPECT_EQ(run({"generate", "-c", config(), "--set", "corpus.sentences_per_intent=5"}).code, cli::kConfigError);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kConfigError);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST_F(CliTest, TrainRoundTripsCheckpoint) {
  const Result r = run({"train", "-c", config(), "--variant", "audio-only", "--set", "train.epochs=1", "-o",
                        scratch("ao.ckpt"), "--metrics", scratch("ao.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string bytes = slurp(scratch("ao.ckpt"));
  const Checkpoint ckpt = load_checkpoint(scratch("ao.ckpt"));
  std::ostringstream again;
  write_checkpoint(again, make_checkpoint(restore_student(ckpt), ckpt.variant, ckpt.config));
  EXPECT_EQ(again.str(), bytes);
  const std::string csv = slurp(scratch("ao.csv"));
  EXPECT_EQ(csv.rfind("epoch,intent_loss,student_loss,total_loss,dev_accuracy,mean_embed_distance,lr\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST_F(CliTest, StudentWithoutTeacherIsDependencyError) {
  const Result r = run({"train", "-c", config(), "--variant", "stu-mm", "-o", scratch("x.ckpt")});
  EXPECT_EQ(r.code, cli::kDependencyError);
  EXPECT_NE(r.err.find("--teacher"), std::string::npos);
  EXPECT_FALSE(fs::exists(scratch("x.ckpt")));
}

TEST_F(CliTest, MissingCorpusIsReported) {
  const Result r = run({"train", "-c", config(), "--variant", "mm", "--corpus", scratch("absent.tsv")});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("absent.tsv"), std::string::npos);
}

TEST_F(CliTest, TrainMatchesLibraryRun) {
  const Checkpoint ckpt = load_checkpoint(path("mm-cl.ckpt"));
  const Corpus corpus = load_corpus(path("corpus.tsv"));
  TeacherModel t = make_teacher(Variant::mm_cl, corpus, ckpt.config);
  teacher_train(t, corpus, ckpt.config.teacher_train_config());
  const TeacherModel restored = restore_teacher(ckpt);
  const TeacherModel& lib = t;
  EXPECT_EQ(fingerprint_params(restored.parameters()), fingerprint_params(lib.parameters()));
  const Result r = run({"train", "-c", config(), "--variant", "mm-cl", "-o", scratch("again.ckpt"), "--metrics",
                        scratch("again.csv")});
  ASSERT_EQ(r.code, 0);
  EXPECT_NEAR(std::stod(field(r.out, "dev_accuracy")), teacher_accuracy(lib, corpus.seen(Split::dev)), 1e-12);
  EXPECT_EQ(slurp(scratch("again.csv")), slurp(path("mm-cl-metrics.csv")));
  EXPECT_EQ(slurp(scratch("again.ckpt")), slurp(path("mm-cl.ckpt")));
}

TEST_F(CliTest, BuildDbSingleSentenceAndIdempotence) {
  BotDefinition pool = load_bot(path("bot-unseen.tsv"));
  BotDefinition one;
  one.intent_vocab = {pool.sentences[0].intent};
  one.sentences = {pool.sentences[0]};
  save_bot(scratch("one.tsv"), one);
  ASSERT_EQ(run({"build-db", "--checkpoint", path("stu-mm-cl.ckpt"), "--bot", scratch("one.tsv"), "-o",
                 scratch("one.edb")})
                .code,
            0);
  const EmbeddingDatabase db = load_edb(scratch("one.edb"));
  ASSERT_EQ(db.entries.size(), 1u);
  EXPECT_NEAR(l2_norm(db.entries[0].embedding), 1.0, 1e-12);

  ASSERT_EQ(run({"build-db", "--checkpoint", path("stu-mm-cl.ckpt"), "--bot", path("bot-unseen.tsv"), "-o",
                 scratch("a.edb")})
                .code,
            0);
  const Result r = run({"build-db", "--checkpoint", path("stu-mm-cl.ckpt"), "--bot", path("bot-unseen.tsv"), "-o",
                        scratch("b.edb")});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(slurp(scratch("a.edb")), slurp(scratch("b.edb")));
  EXPECT_EQ(field(r.out, "entries"), std::to_string(pool.sentences.size()));
  EXPECT_EQ(field(r.out, "dim"), "16");
  EXPECT_EQ(slurp(scratch("a.edb")).rfind("ZINTENT-EDB v1 dim=16 layer=pooled", 0), 0u);
}

TEST_F(CliTest, BuildDbLayerNeedsHeads) {
  const Result r = run({"build-db", "--checkpoint", path("mm-cl.ckpt"), "--bot", path("bot-unseen.tsv"), "--layer",
                        "feedforward", "-o", scratch("ff.edb")});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(r.err.empty());
}

class CliDbTest : public CliTest {
 protected:
  void SetUp() override {
    ASSERT_EQ(run({"build-db", "--checkpoint", path("stu-mm-cl.ckpt"), "--bot", path("bot-unseen.tsv"), "-o",
                   scratch("unseen.edb")})
                  .code,
              0);
  }
};

TEST_F(CliDbTest, ClassifySelfRetrievalTopThree) {
  const BotDefinition bot = load_bot(path("bot-unseen.tsv"));
  const BotSentence& s = bot.sentences[3];
  const Result r = run({"classify", "--db", scratch("unseen.edb"), "--checkpoint", path("stu-mm-cl.ckpt"),
                        "--sentence", std::to_string(s.id), "--bot", path("bot-unseen.tsv"), "--top-k", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = rows(r.out);
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[0][1], std::to_string(s.intent));
  EXPECT_EQ(table[0][2], std::to_string(s.id));
  EXPECT_GE(std::stod(table[0][3]), 1.0 - 1e-9);
  for (std::size_t i = 1; i < 3; ++i) {
    EXPECT_EQ(table[i][0], std::to_string(i + 1));
    EXPECT_GE(std::stod(table[i - 1][3]), std::stod(table[i][3]));
  }
}

TEST_F(CliDbTest, ClassifyFromAudioFile) {
  const Corpus corpus = load_corpus(path("corpus.tsv"));
  const Utterance* u = corpus.unseen(Split::test)[0];
  save_audio(scratch("q.audio"), u->frames);
  const Result a = run({"classify", "--db", scratch("unseen.edb"), "--checkpoint", path("stu-mm-cl.ckpt"), "--audio",
                        scratch("q.audio"), "-k", "1"});
  const Result b = run({"classify", "--db", scratch("unseen.edb"), "--checkpoint", path("stu-mm-cl.ckpt"),
                        "--from-corpus", std::to_string(u->id), "--corpus", path("corpus.tsv"), "-k", "1"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliDbTest, StaleDatabaseExitsThree) {
  const Result r = run({"classify", "--db", scratch("unseen.edb"), "--checkpoint", path("mm-cl.ckpt"), "--sentence",
                        "0", "--bot", path("bot-unseen.tsv")});
  EXPECT_EQ(r.code, cli::kDependencyError);
  EXPECT_NE(r.err.find("stale"), std::string::npos);
}

TEST_F(CliDbTest, BatchClassifyMatchesEvaluate) {
  const Corpus corpus = load_corpus(path("corpus.tsv"));
  std::size_t correct = 0;
  const auto test = corpus.unseen(Split::test);
  for (const Utterance* u : test) {
    const Result r = run({"classify", "--db", scratch("unseen.edb"), "--checkpoint", path("stu-mm-cl.ckpt"),
                          "--from-corpus", std::to_string(u->id), "--corpus", path("corpus.tsv"), "-k", "1"});
    ASSERT_EQ(r.code, 0);
    if (rows(r.out)[0][1] == std::to_string(u->intent)) ++correct;
  }
  const Result ev = run({"evaluate", "--db", scratch("unseen.edb"), "--checkpoint", path("stu-mm-cl.ckpt"), "--corpus",
                         path("corpus.tsv")});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_EQ(field(ev.out, "correct"), std::to_string(correct));
  EXPECT_EQ(field(ev.out, "total"), std::to_string(test.size()));

  const Checkpoint ckpt = load_checkpoint(path("stu-mm-cl.ckpt"));
  const StudentModel s = restore_student(ckpt);
  const EmbeddingPipeline p(s.audio, ExtractionLayer::pooled, heads_of(s));
  const ZeroShotEvaluation lib = evaluate_zero_shot(load_edb(scratch("unseen.edb")), test, p);
  EXPECT_EQ(lib.correct, correct);
}

TEST_F(CliTest, ExperimentFrozenGridIsRepeatable) {
  const std::vector<std::string> base = {"experiment", "-c", config(), "--grid", "--set", "experiment.variants=frozen"};
  std::vector<std::string> a = base, b = base;
  a.insert(a.end(), {"-o", scratch("e1")});
  b.insert(b.end(), {"-o", scratch("e2")});
  const Result r = run(a);
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_EQ(run(b).code, 0);
  EXPECT_NE(r.out.find("frozen"), std::string::npos);
  EXPECT_EQ(slurp(scratch("e1/grid.csv")), slurp(scratch("e2/grid.csv")));
  EXPECT_EQ(slurp(scratch("e1/grid.txt")), slurp(scratch("e2/grid.txt")));
}

TEST_F(CliTest, ExperimentLayerAblationFromCheckpoint) {
  const Result r = run({"experiment", "-c", config(), "--ablation", "layers", "--corpus", path("corpus.tsv"),
                        "--checkpoint", path("stu-mm-cl.ckpt"), "-o", scratch("abl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(rows(slurp(scratch("abl/layers.csv"))).size(), 4u);
  EXPECT_EQ(run({"experiment", "-c", config(), "--ablation", "bogus", "-o", scratch("abl")}).code, cli::kConfigError);
  EXPECT_EQ(run({"experiment", "-c", config(), "-o", scratch("abl")}).code, cli::kConfigError);
}

}  // namespace
}  // namespace zintent
