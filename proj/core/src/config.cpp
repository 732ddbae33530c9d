// core/src/config.cpp

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

#include "zintent/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "zintent/errors.hpp"

namespace zintent {

void CorpusSpec::validate() const {
  if (n_intents_seen + n_intents_unseen == 0) throw ConfigError("corpus needs at least one intent");
  if (keywords_per_intent == 0 || sentences_per_intent == 0) {
    throw ConfigError("keywords_per_intent and sentences_per_intent must be >= 1");
  }
  if (sentence_length_min == 0 || sentence_length_min > sentence_length_max) {
    throw ConfigError("sentence length range must satisfy 1 <= min <= max");
  }
  const std::size_t keywords = (n_intents_seen + n_intents_unseen) * keywords_per_intent;
  if (keywords >= vocab_size) {
    throw ConfigError("vocabulary of " + std::to_string(vocab_size) + " tokens is too small for " +
                      std::to_string(keywords) + " disjoint keywords plus filler");
  }
  if (!(audio_noise_sigma >= 0.0) || !(speaker_scale >= 0.0)) throw ConfigError("noise scales must be >= 0");
}

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::audio_only: return "audio-only";
    case Variant::mm: return "mm";
    case Variant::mm_cl: return "mm-cl";
    case Variant::stu_mm: return "stu-mm";
    case Variant::stu_mm_cl: return "stu-mm-cl";
    case Variant::frozen: return "frozen";
  }
  return "frozen";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : all_variants()) {
    if (variant_name(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + std::string(name) + "'");
}

bool is_teacher_variant(Variant v) { return v == Variant::mm || v == Variant::mm_cl; }

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> kAll = {Variant::frozen, Variant::audio_only, Variant::mm,
                                            Variant::mm_cl, Variant::stu_mm, Variant::stu_mm_cl};
  return kAll;
}

std::uint64_t RunConfig::audio_backbone_seed() const { return mix_seed(seed, 101); }
std::uint64_t RunConfig::text_backbone_seed() const { return mix_seed(seed, 102); }
std::uint64_t RunConfig::teacher_init_seed() const { return mix_seed(seed, 103); }
std::uint64_t RunConfig::student_init_seed() const { return mix_seed(seed, 104); }

TrainConfig RunConfig::teacher_train_config() const {
  TrainConfig t = train;
  t.seed = mix_seed(seed, 105);
  return t;
}

TrainConfig RunConfig::student_train_config() const {
  TrainConfig t = train;
  t.seed = mix_seed(seed, 106);
  return t;
}

RunConfig RunConfig::with_seed(std::uint64_t s) const {
  RunConfig c = *this;
  c.seed = s;
  c.corpus.seed = s;
  return c;
}

void RunConfig::validate() const {
  corpus.validate();
  train.validate();
  if (synth.audio_dim == 0 || synth.frames_per_token == 0) throw ConfigError("synthesizer dimensions must be positive");
  if (hidden_dim == 0 || embedding_dim == 0) throw ConfigError("model dimensions must be positive");
  if (!(teacher.tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(student.gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (db_sentences_per_intent == 0) throw ConfigError("db_sentences_per_intent must be >= 1");
  if (top_k == 0) throw ConfigError("top_k must be >= 1");
  if (replicate_seeds.empty()) throw ConfigError("at least one replicate seed is required");
  if (sweep_repeats == 0) throw ConfigError("sweep_repeats must be >= 1");
}

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const std::string s = trim(text);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("config key '" + key + "': expected boolean, got '" + text + "'");
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& xs, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + f(xs[i]);
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename T>
Field size_field(std::string section, std::string key, T RunConfig::*outer, std::size_t T::*member) {
  const std::string name = section + "." + key;
  return {section, key, [=](const RunConfig& c) { return std::to_string(c.*outer.*member); },
          [=](RunConfig& c, const std::string& v) { c.*outer.*member = parse_number<std::size_t>(name, v); }};
}

template <typename T>
Field double_field(std::string section, std::string key, T RunConfig::*outer, double T::*member) {
  const std::string name = section + "." + key;
  return {section, key, [=](const RunConfig& c) { return format_number(c.*outer.*member); },
          [=](RunConfig& c, const std::string& v) { c.*outer.*member = parse_number<double>(name, v); }};
}

template <typename T>
Field bool_field(std::string section, std::string key, T RunConfig::*outer, bool T::*member) {
  const std::string name = section + "." + key;
  return {section, key, [=](const RunConfig& c) { return std::string((c.*outer.*member) ? "true" : "false"); },
          [=](RunConfig& c, const std::string& v) { c.*outer.*member = parse_bool(name, v); }};
}

template <typename T>
Field u64_field(std::string section, std::string key, T RunConfig::*outer, std::uint64_t T::*member) {
  const std::string name = section + "." + key;
  return {section, key, [=](const RunConfig& c) { return std::to_string(c.*outer.*member); },
          [=](RunConfig& c, const std::string& v) { c.*outer.*member = parse_number<std::uint64_t>(name, v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> kFields = [] {
    std::vector<Field> f;
    using C = CorpusSpec;
    f.push_back(size_field("corpus", "n_intents_seen", &RunConfig::corpus, &C::n_intents_seen));
    f.push_back(size_field("corpus", "n_intents_unseen", &RunConfig::corpus, &C::n_intents_unseen));
    f.push_back(size_field("corpus", "vocab_size", &RunConfig::corpus, &C::vocab_size));
    f.push_back(size_field("corpus", "keywords_per_intent", &RunConfig::corpus, &C::keywords_per_intent));
    f.push_back(size_field("corpus", "sentences_per_intent", &RunConfig::corpus, &C::sentences_per_intent));
    f.push_back(size_field("corpus", "sentence_length_min", &RunConfig::corpus, &C::sentence_length_min));
    f.push_back(size_field("corpus", "sentence_length_max", &RunConfig::corpus, &C::sentence_length_max));
    f.push_back(double_field("corpus", "audio_noise_sigma", &RunConfig::corpus, &C::audio_noise_sigma));
    f.push_back(size_field("corpus", "speaker_rank", &RunConfig::corpus, &C::speaker_rank));
    f.push_back(double_field("corpus", "speaker_scale", &RunConfig::corpus, &C::speaker_scale));

    using S = SynthesizerConfig;
    f.push_back(size_field("synth", "audio_dim", &RunConfig::synth, &S::audio_dim));
    f.push_back(size_field("synth", "frames_per_token", &RunConfig::synth, &S::frames_per_token));
    f.push_back(double_field("synth", "frame_jitter", &RunConfig::synth, &S::frame_jitter));
    f.push_back(u64_field("synth", "seed", &RunConfig::synth, &S::seed));

    f.push_back({"model", "hidden_dim", [](const RunConfig& c) { return std::to_string(c.hidden_dim); },
                 [](RunConfig& c, const std::string& v) { c.hidden_dim = parse_number<std::size_t>("model.hidden_dim", v); }});
    f.push_back({"model", "embedding_dim", [](const RunConfig& c) { return std::to_string(c.embedding_dim); },
                 [](RunConfig& c, const std::string& v) {
                   c.embedding_dim = parse_number<std::size_t>("model.embedding_dim", v);
                 }});
    f.push_back({"model", "audio_top_trainable",
                 [](const RunConfig& c) { return std::string(c.audio_top_trainable ? "true" : "false"); },
                 [](RunConfig& c, const std::string& v) {
                   c.audio_top_trainable = parse_bool("model.audio_top_trainable", v);
                 }});

    using T = TeacherOptions;
    f.push_back(double_field("teacher", "tau", &RunConfig::teacher, &T::tau));
    f.push_back(bool_field("teacher", "use_contrastive", &RunConfig::teacher, &T::use_contrastive));
    f.push_back(bool_field("teacher", "normalize_before_sim", &RunConfig::teacher, &T::normalize_before_sim));
    f.push_back(bool_field("teacher", "tau_literal_multiply", &RunConfig::teacher, &T::tau_literal_multiply));
    f.push_back(double_field("teacher", "projection_dropout", &RunConfig::teacher, &T::projection_dropout));
    f.push_back(double_field("teacher", "fusion_dropout", &RunConfig::teacher, &T::fusion_dropout));

    using St = StudentOptions;
    f.push_back(double_field("student", "gamma", &RunConfig::student, &St::gamma));
    f.push_back(bool_field("student", "distill", &RunConfig::student, &St::distill));
    f.push_back(double_field("student", "projection_dropout", &RunConfig::student, &St::projection_dropout));
    f.push_back({"student", "init_from_teacher_backbone",
                 [](const RunConfig& c) { return std::string(c.init_from_teacher_backbone ? "true" : "false"); },
                 [](RunConfig& c, const std::string& v) {
                   c.init_from_teacher_backbone = parse_bool("student.init_from_teacher_backbone", v);
                 }});

    using Tr = TrainConfig;
    f.push_back(size_field("train", "epochs", &RunConfig::train, &Tr::epochs));
    f.push_back(size_field("train", "batch_size", &RunConfig::train, &Tr::batch_size));
    f.push_back({"train", "lr", [](const RunConfig& c) { return format_number(c.train.adam.lr); },
                 [](RunConfig& c, const std::string& v) { c.train.adam.lr = parse_number<double>("train.lr", v); }});
    f.push_back({"train", "beta1", [](const RunConfig& c) { return format_number(c.train.adam.beta1); },
                 [](RunConfig& c, const std::string& v) { c.train.adam.beta1 = parse_number<double>("train.beta1", v); }});
    f.push_back({"train", "beta2", [](const RunConfig& c) { return format_number(c.train.adam.beta2); },
                 [](RunConfig& c, const std::string& v) { c.train.adam.beta2 = parse_number<double>("train.beta2", v); }});
    f.push_back({"train", "eps", [](const RunConfig& c) { return format_number(c.train.adam.eps); },
                 [](RunConfig& c, const std::string& v) { c.train.adam.eps = parse_number<double>("train.eps", v); }});
    f.push_back(size_field("train", "scheduler_patience", &RunConfig::train, &Tr::scheduler_patience));
    f.push_back(double_field("train", "scheduler_factor", &RunConfig::train, &Tr::scheduler_factor));
    f.push_back(double_field("train", "min_lr", &RunConfig::train, &Tr::min_lr));
    f.push_back(size_field("train", "early_stop_patience", &RunConfig::train, &Tr::early_stop_patience));
    f.push_back(bool_field("train", "freeze_all", &RunConfig::train, &Tr::freeze_all));

    f.push_back({"zeroshot", "layer", [](const RunConfig& c) { return std::string(layer_name(c.layer)); },
                 [](RunConfig& c, const std::string& v) { c.layer = parse_layer(trim(v)); }});
    f.push_back({"zeroshot", "db_sentences_per_intent",
                 [](const RunConfig& c) { return std::to_string(c.db_sentences_per_intent); },
                 [](RunConfig& c, const std::string& v) {
                   c.db_sentences_per_intent = parse_number<std::size_t>("zeroshot.db_sentences_per_intent", v);
                 }});
    f.push_back({"zeroshot", "top_k", [](const RunConfig& c) { return std::to_string(c.top_k); },
                 [](RunConfig& c, const std::string& v) { c.top_k = parse_number<std::size_t>("zeroshot.top_k", v); }});

    f.push_back({"experiment", "seed", [](const RunConfig& c) { return std::to_string(c.seed); },
                 [](RunConfig& c, const std::string& v) {
                   c.seed = parse_number<std::uint64_t>("experiment.seed", v);
                   c.corpus.seed = c.seed;
                 }});
    f.push_back({"experiment", "replicate_seeds",
                 [](const RunConfig& c) {
                   return join<std::uint64_t>(c.replicate_seeds, [](const std::uint64_t& s) { return std::to_string(s); });
                 },
                 [](RunConfig& c, const std::string& v) {
                   c.replicate_seeds.clear();
                   for (const auto& s : split_list(v)) {
                     c.replicate_seeds.push_back(parse_number<std::uint64_t>("experiment.replicate_seeds", s));
                   }
                 }});
    f.push_back({"experiment", "variants",
                 [](const RunConfig& c) {
                   return join<Variant>(c.variants, [](const Variant& x) { return std::string(variant_name(x)); });
                 },
                 [](RunConfig& c, const std::string& v) {
                   c.variants.clear();
                   for (const auto& s : split_list(v)) c.variants.push_back(parse_variant(s));
                 }});
    f.push_back({"experiment", "sweep_sizes",
                 [](const RunConfig& c) {
                   return join<std::size_t>(c.sweep_sizes, [](const std::size_t& s) { return std::to_string(s); });
                 },
                 [](RunConfig& c, const std::string& v) {
                   c.sweep_sizes.clear();
                   for (const auto& s : split_list(v)) {
                     c.sweep_sizes.push_back(parse_number<std::size_t>("experiment.sweep_sizes", s));
                   }
                 }});
    f.push_back({"experiment", "sweep_repeats", [](const RunConfig& c) { return std::to_string(c.sweep_repeats); },
                 [](RunConfig& c, const std::string& v) {
                   c.sweep_repeats = parse_number<std::size_t>("experiment.sweep_repeats", v);
                 }});
    f.push_back({"experiment", "noise_levels",
                 [](const RunConfig& c) {
                   return join<double>(c.noise_levels, [](const double& s) { return format_number(s); });
                 },
                 [](RunConfig& c, const std::string& v) {
                   c.noise_levels.clear();
                   for (const auto& s : split_list(v)) {
                     c.noise_levels.push_back(parse_number<double>("experiment.noise_levels", s));
                   }
                 }});

    f.push_back({"paths", "output_dir", [](const RunConfig& c) { return c.output_dir; },
                 [](RunConfig& c, const std::string& v) { c.output_dir = trim(v); }});
    return f;
  }();
  return kFields;
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  std::set<std::string> known_sections;
  for (const auto& f : fields()) known_sections.insert(f.section);
  for (const auto& [section, body] : tree) {
    if (!known_sections.count(section)) throw ConfigError("config: unknown section [" + section + "]");
    if (!body.data().empty() && body.empty()) {
      throw ConfigError("config: key '" + section + "' outside of any section");
    }
    for (const auto& [key, value] : body) {
      bool found = false;
      for (const auto& f : fields()) {
        if (f.section == section && f.key == key) {
          f.set(cfg, value.data());
          found = true;
          break;
        }
      }
      if (!found) throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
    }
  }
  cfg.validate();
  return cfg;
}

void set_config_value(RunConfig& cfg, std::string_view dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string_view::npos) throw ConfigError("config override '" + std::string(dotted_key) + "' is not section.key");
  const std::string_view section = dotted_key.substr(0, dot);
  const std::string_view key = dotted_key.substr(dot + 1);
  for (const auto& f : fields()) {
    if (f.section == section && f.key == key) {
      f.set(cfg, value);
      return;
    }
  }
  throw ConfigError("config: unknown key '" + std::string(dotted_key) + "'");
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string dump_config(const RunConfig& cfg) {
  boost::property_tree::ptree tree;
  for (const auto& f : fields()) tree.put(boost::property_tree::ptree::path_type(f.section + "/" + f.key, '/'), f.get(cfg));
  std::ostringstream out;
  boost::property_tree::ini_parser::write_ini(out, tree);
  return out.str();
}

}  // namespace zintent
