// tools/src/cli.cpp

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

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "zintent/checkpoint.hpp"
#include "zintent/config.hpp"
#include "zintent/errors.hpp"
#include "zintent/harness.hpp"
#include "zintent/io.hpp"

namespace zintent::cli {

namespace {

namespace fs = std::filesystem;

struct ConfigArgs {
  std::string path;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& args) {
  cmd->add_option("-c,--config", args.path, "Run configuration file (defaults apply when omitted)");
  cmd->add_option("--set", args.overrides, "Override one key, e.g. --set train.epochs=5")->take_all();
}

RunConfig resolve_config(const ConfigArgs& args) {
  RunConfig cfg = args.path.empty() ? RunConfig{} : load_config(args.path);
  for (const auto& o : args.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not section.key=value");
    set_config_value(cfg, o.substr(0, eq), o.substr(eq + 1));
  }
  cfg.validate();
  return cfg;
}

void log_config(std::ostream& err, const RunConfig& cfg) {
  err << "# resolved configuration\n" << dump_config(cfg) << std::flush;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

std::ofstream open_text(const std::string& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::out | std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

std::string in_dir(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

// A checkpoint together with the model it restores to.
struct LoadedModel {
  Checkpoint ckpt;
  VariantModels models;
};

LoadedModel load_model(const std::string& path) {
  LoadedModel m{load_checkpoint(path), {}};
  m.models.variant = m.ckpt.variant;
  if (m.ckpt.kind == ModelKind::teacher) {
    m.models.teacher = restore_teacher(m.ckpt);
  } else {
    m.models.student = restore_student(m.ckpt);
  }
  return m;
}

// ---- generate ----

struct GenerateArgs {
  ConfigArgs config;
  std::string out_dir;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(a.config);
  log_config(err, cfg);
  const std::string dir = a.out_dir.empty() ? cfg.output_dir : a.out_dir;
  // Everything that can fail runs before the first file is written.
  const GeneratedCorpus g = generate_corpus(cfg.corpus, cfg.synth);
  const BotDefinition db_bot = g.bot.take_per_intent(cfg.db_sentences_per_intent);
  fs::create_directories(dir);
  save_corpus(in_dir(dir, "corpus.tsv"), g.corpus);
  save_bot(in_dir(dir, "bot-pool.tsv"), g.bot);
  save_bot(in_dir(dir, "bot-unseen.tsv"), db_bot.restrict_to(g.corpus.unseen_intents));
  save_bot(in_dir(dir, "bot-mix.tsv"), db_bot);
  open_text(in_dir(dir, "config.ini")) << dump_config(cfg);

  std::size_t counts[3] = {0, 0, 0};
  for (const auto& u : g.corpus.utterances) ++counts[static_cast<int>(u.split)];
  out << "utterances\t" << g.corpus.utterances.size() << '\n'
      << "train\t" << counts[0] << '\n'
      << "dev\t" << counts[1] << '\n'
      << "test\t" << counts[2] << '\n';
  return kOk;
}

// ---- train ----

struct TrainArgs {
  ConfigArgs config;
  std::string variant;
  std::string corpus;
  std::string teacher;
  std::string out;
  std::string metrics;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(a.config);
  log_config(err, cfg);
  const Variant v = parse_variant(a.variant);
  const std::string corpus_path = a.corpus.empty() ? in_dir(cfg.output_dir, "corpus.tsv") : a.corpus;
  const std::string ckpt_path = a.out.empty() ? in_dir(cfg.output_dir, a.variant + ".ckpt") : a.out;
  const std::string metrics_path = a.metrics.empty() ? in_dir(cfg.output_dir, a.variant + "-metrics.csv") : a.metrics;

  std::optional<TeacherModel> teacher;
  if (v == Variant::stu_mm || v == Variant::stu_mm_cl) {
    if (a.teacher.empty()) {
      throw DependencyError("variant '" + a.variant + "' needs --teacher with a trained " +
                            (v == Variant::stu_mm ? "mm" : "mm-cl") + " checkpoint");
    }
    const Checkpoint tc = load_checkpoint(a.teacher);
    if (tc.kind != ModelKind::teacher) throw DependencyError("'" + a.teacher + "' is not a teacher checkpoint");
    teacher = restore_teacher(tc);
  }
  const Corpus corpus = load_corpus(corpus_path);

  std::ofstream metrics = open_text(metrics_path);
  if (is_teacher_variant(v)) {
    metrics << "epoch,train_loss,ic_loss,cl_loss,dev_accuracy,lr,mean_pair_cosine\n";
  } else {
    metrics << "epoch,intent_loss,student_loss,total_loss,dev_accuracy,mean_embed_distance,lr\n";
  }
  metrics.flush();

  // Same construction as train_variant, with per-epoch streaming.
  VariantModels m;
  m.variant = v;
  if (v == Variant::frozen) {
    m = train_variant(v, corpus, cfg);
  } else if (is_teacher_variant(v)) {
    m.teacher = make_teacher(v, corpus, cfg);
    m.teacher_history = teacher_train(*m.teacher, corpus, cfg.teacher_train_config(), [&](const TeacherEpochMetrics& e) {
      metrics << e.epoch << ',' << format_value(e.train_loss) << ',' << format_value(e.ic_loss) << ','
              << format_value(e.cl_loss) << ',' << format_value(e.dev_accuracy) << ',' << format_value(e.lr) << ','
              << format_value(e.mean_pair_cosine) << '\n';
      metrics.flush();
    });
  } else {
    const TeacherModel* t = teacher ? &*teacher : nullptr;
    if (t != nullptr && t->options.use_contrastive != (v == Variant::stu_mm_cl)) {
      throw DependencyError("variant '" + a.variant + "' needs a teacher trained " +
                            (v == Variant::stu_mm_cl ? "with" : "without") + " the contrastive loss");
    }
    m.student = make_student(corpus, cfg, t, t != nullptr && cfg.student.distill);
    m.student_history =
        student_train(*m.student, t, corpus, cfg.student_train_config(), [&](const StudentEpochMetrics& e) {
          metrics << e.epoch << ',' << format_value(e.intent_loss) << ',' << format_value(e.student_loss) << ','
                  << format_value(e.total_loss) << ',' << format_value(e.dev_accuracy) << ','
                  << format_value(e.mean_embed_distance) << ',' << format_value(e.lr) << '\n';
          metrics.flush();
        });
  }

  const Checkpoint ckpt = m.teacher ? make_checkpoint(*m.teacher, v, cfg) : make_checkpoint(*m.student, v, cfg);
  ensure_parent(ckpt_path);
  save_checkpoint(ckpt_path, ckpt);

  const double dev = m.supervised_accuracy(corpus.seen(Split::dev));
  out << "variant\t" << variant_name(v) << '\n'
      << "dev_accuracy\t" << format_value(dev) << '\n'
      << "checkpoint\t" << ckpt_path << '\n';
  return kOk;
}

// ---- build-db ----

struct BuildDbArgs {
  std::string checkpoint;
  std::string bot;
  std::string layer;
  std::string out;
};

int cmd_build_db(const BuildDbArgs& a, std::ostream& out, std::ostream& err) {
  const LoadedModel m = load_model(a.checkpoint);
  RunConfig cfg = m.ckpt.config;
  if (!a.layer.empty()) cfg.layer = parse_layer(a.layer);
  log_config(err, cfg);
  const BotDefinition bot = load_bot(a.bot);
  const EmbeddingDatabase db = build_embedding_db(bot, cfg.synth, m.models.pipeline(cfg.layer));
  ensure_parent(a.out);
  save_edb(a.out, db);
  out << "entries\t" << db.entries.size() << '\n' << "dim\t" << db.dim << '\n' << "layer\t" << layer_name(db.layer) << '\n';
  return kOk;
}

// ---- classify ----

struct ClassifyArgs {
  std::string db;
  std::string checkpoint;
  std::string audio;
  std::optional<UtteranceId> from_corpus;
  std::string corpus;
  std::optional<SentenceId> sentence;
  std::string bot;
  std::optional<std::size_t> top_k;
};

int cmd_classify(const ClassifyArgs& a, std::ostream& out, std::ostream& err) {
  const LoadedModel m = load_model(a.checkpoint);
  const EmbeddingDatabase db = load_edb(a.db);
  RunConfig cfg = m.ckpt.config;
  cfg.layer = db.layer;
  if (a.top_k) cfg.top_k = *a.top_k;
  if (cfg.top_k == 0) throw ConfigError("--top-k must be >= 1");
  log_config(err, cfg);
  const EmbeddingPipeline pipeline = m.models.pipeline(db.layer);
  check_compatible(db, pipeline);

  Matrix frames;
  if (!a.audio.empty()) {
    frames = load_audio(a.audio);
  } else if (a.from_corpus) {
    if (a.corpus.empty()) throw ConfigError("--from-corpus needs --corpus");
    const Corpus corpus = load_corpus(a.corpus);
    const Utterance* u = corpus.find(*a.from_corpus);
    if (u == nullptr) throw ConfigError("utterance " + std::to_string(*a.from_corpus) + " is not in the corpus");
    frames = u->frames;
  } else if (a.sentence) {
    if (a.bot.empty()) throw ConfigError("--sentence needs --bot");
    const BotDefinition bot = load_bot(a.bot);
    auto it = std::find_if(bot.sentences.begin(), bot.sentences.end(),
                           [&](const BotSentence& s) { return s.id == *a.sentence; });
    if (it == bot.sentences.end()) throw ConfigError("sentence " + std::to_string(*a.sentence) + " is not in the bot");
    frames = synthesize_pseudo_audio(it->tokens, cfg.synth);
  } else {
    throw ConfigError("one of --audio, --from-corpus or --sentence is required");
  }

  if (cfg.top_k > db.entries.size()) {
    throw ConfigError("--top-k " + std::to_string(cfg.top_k) + " exceeds the " + std::to_string(db.entries.size()) +
                      " database entries");
  }
  const Prediction p = classify_zero_shot(db, frames, pipeline, cfg.top_k);
  for (std::size_t i = 0; i < p.top_k.size(); ++i) {
    const Hit& h = p.top_k[i];
    out << (i + 1) << '\t' << h.intent << '\t' << h.sentence << '\t' << format_value(h.similarity) << '\n';
  }
  return kOk;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string db;
  std::string checkpoint;
  std::string corpus;
  std::string split = "test";
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const LoadedModel m = load_model(a.checkpoint);
  const EmbeddingDatabase db = load_edb(a.db);
  RunConfig cfg = m.ckpt.config;
  cfg.layer = db.layer;
  log_config(err, cfg);
  const Corpus corpus = load_corpus(a.corpus);
  const auto test = corpus.select(parse_split(a.split), db.intents());
  const ZeroShotEvaluation e = evaluate_zero_shot(db, test, m.models.pipeline(db.layer));
  out << "accuracy\t" << format_value(e.accuracy) << '\n'
      << "correct\t" << e.correct << '\n'
      << "total\t" << e.total << '\n';
  return kOk;
}

// ---- experiment ----

struct ExperimentArgs {
  ConfigArgs config;
  bool grid = false;
  std::string ablation;
  std::string corpus;
  std::string checkpoint;
  std::string variant = "stu-mm-cl";
  std::string out_dir;
};

// Corpus and bot from a file when given, otherwise generated from the config.
GeneratedCorpus experiment_corpus(const ExperimentArgs& a, const RunConfig& cfg) {
  if (a.corpus.empty()) return generate_corpus(cfg.corpus, cfg.synth);
  GeneratedCorpus g;
  g.corpus = load_corpus(a.corpus);
  g.bot = bot_from_corpus(g.corpus);
  return g;
}

// Trains `v` (and the teacher it needs) unless a checkpoint is supplied.
VariantModels experiment_models(const ExperimentArgs& a, const Corpus& corpus, const RunConfig& cfg, Variant v) {
  if (!a.checkpoint.empty()) return load_model(a.checkpoint).models;
  if (v == Variant::stu_mm || v == Variant::stu_mm_cl) {
    const VariantModels t = train_variant(v == Variant::stu_mm ? Variant::mm : Variant::mm_cl, corpus, cfg);
    VariantModels s = train_variant(v, corpus, cfg, &*t.teacher);
    s.teacher = t.teacher;
    s.teacher_history = t.teacher_history;
    return s;
  }
  return train_variant(v, corpus, cfg);
}

int cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = resolve_config(a.config);
  log_config(err, cfg);
  if (a.grid == !a.ablation.empty()) throw ConfigError("experiment needs exactly one of --grid or --ablation");
  const std::string dir = a.out_dir.empty() ? cfg.output_dir : a.out_dir;
  fs::create_directories(dir);
  open_text(in_dir(dir, "config.ini")) << dump_config(cfg);

  const GeneratedCorpus g = experiment_corpus(a, cfg);
  const Corpus& corpus = g.corpus;
  const BotDefinition unseen_pool = g.bot.restrict_to(corpus.unseen_intents);
  const auto unseen_test = corpus.unseen(Split::test);

  if (a.grid) {
    const auto reports = run_variant_grid(corpus, g.bot, cfg);
    {
      std::ofstream f = open_text(in_dir(dir, "grid.csv"));
      write_grid_csv(f, reports);
    }
    const std::string table = format_grid_table(reports);
    open_text(in_dir(dir, "grid.txt")) << table;
    out << table;
    return kOk;
  }

  if (a.ablation == "layers") {
    const VariantModels m = experiment_models(a, corpus, cfg, parse_variant(a.variant));
    if (!m.student) throw ConfigError("the layer ablation needs a student variant");
    const std::vector<ExtractionLayer> layers = {ExtractionLayer::pooled, ExtractionLayer::projection,
                                                 ExtractionLayer::feedforward};
    const auto rows = layer_ablation(*m.student, unseen_pool.take_per_intent(cfg.db_sentences_per_intent),
                                     unseen_test, cfg.synth, layers);
    {
      std::ofstream f = open_text(in_dir(dir, "layers.csv"));
      write_layer_csv(f, rows);
    }
    write_layer_csv(out, rows);
  } else if (a.ablation == "samples") {
    const VariantModels m = experiment_models(a, corpus, cfg, parse_variant(a.variant));
    const auto points = sample_size_sweep(m.pipeline(cfg.layer), unseen_pool, unseen_test, cfg.synth,
                                          cfg.sweep_sizes, cfg.sweep_repeats, cfg.seed);
    {
      std::ofstream f = open_text(in_dir(dir, "samples.csv"));
      write_sweep_csv(f, points);
    }
    write_sweep_csv(out, points);
  } else if (a.ablation == "noise") {
    const VariantModels m = experiment_models(a, corpus, cfg, parse_variant(a.variant));
    const auto points = noise_sweep(m.pipeline(cfg.layer), corpus, g.bot, cfg, cfg.noise_levels);
    {
      std::ofstream f = open_text(in_dir(dir, "noise.csv"));
      write_noise_csv(f, points);
    }
    write_noise_csv(out, points);
  } else if (a.ablation == "upper-bound") {
    const double acc =
        synth_trained_upper_bound(unseen_pool.take_per_intent(cfg.db_sentences_per_intent), unseen_test, cfg);
    open_text(in_dir(dir, "upper-bound.csv")) << "accuracy\n" << format_value(acc) << '\n';
    out << "accuracy\t" << format_value(acc) << '\n';
  } else {
    throw ConfigError("unknown ablation '" + a.ablation + "' (expected layers, samples, noise or upper-bound)");
  }
  return kOk;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const StaleDatabaseError& e) {
    err << "stale database: " << e.what() << '\n';
    return kDependencyError;
  } catch (const DependencyError& e) {
    err << "dependency error: " << e.what() << '\n';
    return kDependencyError;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << '\n';
    return kDependencyError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot spoken intent classification toolkit", "zintent"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic corpus and bot definitions");
  add_config_options(generate, gen.config);
  generate->add_option("-o,--out", gen.out_dir, "Output directory (default: paths.output_dir)");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train one model variant and write its checkpoint");
  add_config_options(train, tr.config);
  train->add_option("--variant", tr.variant, "frozen, audio-only, mm, mm-cl, stu-mm or stu-mm-cl")->required();
  train->add_option("--corpus", tr.corpus, "Corpus index file (default: <output_dir>/corpus.tsv)");
  train->add_option("--teacher", tr.teacher, "Teacher checkpoint for stu-mm / stu-mm-cl");
  train->add_option("-o,--out", tr.out, "Checkpoint path (default: <output_dir>/<variant>.ckpt)");
  train->add_option("--metrics", tr.metrics, "Per-epoch metrics CSV (default: <output_dir>/<variant>-metrics.csv)");

  BuildDbArgs bd;
  auto* build_db = app.add_subcommand("build-db", "Embed bot sentences into an embedding database");
  build_db->add_option("--checkpoint", bd.checkpoint, "Model checkpoint")->required();
  build_db->add_option("--bot", bd.bot, "Bot definition file")->required();
  build_db->add_option("--layer", bd.layer, "pooled, projection or feedforward (default: zeroshot.layer)");
  build_db->add_option("-o,--out", bd.out, "Database path")->required();

  ClassifyArgs cl;
  auto* classify = app.add_subcommand("classify", "Classify one utterance against an embedding database");
  classify->add_option("--db", cl.db, "Embedding database")->required();
  classify->add_option("--checkpoint", cl.checkpoint, "Checkpoint the database was built with")->required();
  auto* audio_opt = classify->add_option("--audio", cl.audio, "Audio frame file");
  auto* corpus_opt = classify->add_option("--from-corpus", cl.from_corpus, "Utterance id in --corpus");
  classify->add_option("--corpus", cl.corpus, "Corpus index file");
  auto* sentence_opt = classify->add_option("--sentence", cl.sentence, "Synthesize this sentence id of --bot");
  classify->add_option("--bot", cl.bot, "Bot definition file");
  classify->add_option("-k,--top-k", cl.top_k, "Number of ranked rows to print (default: zeroshot.top_k)");
  audio_opt->excludes(corpus_opt)->excludes(sentence_opt);
  corpus_opt->excludes(sentence_opt);

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Zero-shot accuracy of a database on a corpus split");
  evaluate->add_option("--db", ev.db, "Embedding database")->required();
  evaluate->add_option("--checkpoint", ev.checkpoint, "Checkpoint the database was built with")->required();
  evaluate->add_option("--corpus", ev.corpus, "Corpus index file")->required();
  evaluate->add_option("--split", ev.split, "train, dev or test")->capture_default_str();

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "Run the variant grid or an ablation");
  add_config_options(experiment, ex.config);
  experiment->add_flag("--grid", ex.grid, "Every configured variant over the replicate seeds");
  experiment->add_option("--ablation", ex.ablation, "layers, samples, noise or upper-bound");
  experiment->add_option("--corpus", ex.corpus, "Corpus index file (generated from the config when omitted)");
  experiment->add_option("--checkpoint", ex.checkpoint, "Use this trained model instead of training one");
  experiment->add_option("--variant", ex.variant, "Variant analysed by an ablation")->capture_default_str();
  experiment->add_option("-o,--out", ex.out_dir, "Report directory (default: paths.output_dir)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kConfigError;
  }

  if (generate->parsed()) return guarded([&] { return cmd_generate(gen, out, err); }, err);
  if (train->parsed()) return guarded([&] { return cmd_train(tr, out, err); }, err);
  if (build_db->parsed()) return guarded([&] { return cmd_build_db(bd, out, err); }, err);
  if (classify->parsed()) return guarded([&] { return cmd_classify(cl, out, err); }, err);
  if (evaluate->parsed()) return guarded([&] { return cmd_evaluate(ev, out, err); }, err);
  if (experiment->parsed()) return guarded([&] { return cmd_experiment(ex, out, err); }, err);
  return kConfigError;
}

}  // namespace zintent::cli
