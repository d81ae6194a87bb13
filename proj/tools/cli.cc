// Copyright 2026 The cometkb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "CLI11.hpp"
#include "cometkb/checkpoint.h"
#include "cometkb/corpus.h"
#include "cometkb/dataset.h"
#include "cometkb/decoding.h"
#include "cometkb/error.h"
#include "cometkb/evaluation.h"
#include "cometkb/key_value.h"
#include "cometkb/random.h"
#include "cometkb/synthetic.h"
#include "cometkb/text.h"
#include "cometkb/training.h"
#include "json.hpp"

namespace cometkb {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CommonArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;
  bool no_timestamp = false;
  CLI::Option* seed_option = nullptr;
};

void add_common(CLI::App* sub, CommonArgs& common, bool out_required = true) {
  sub->add_option("--config", common.config, "flat key = value file; flags win over it");
  auto* out = sub->add_option("--out", common.out, "output directory");
  if (out_required) out->required();
  common.seed_option = sub->add_option("--seed", common.seed, "global seed");
  sub->add_flag("--no-timestamp", common.no_timestamp, "omit timestamps from outputs");
}

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::string underscored(std::string key) {
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

// Inserts `--key=value` for every config-file entry right after the
// subcommand, so that explicit flags (parsed later, last one wins) override.
std::vector<std::string> expand_config(std::vector<std::string> args,
                                       const std::set<std::string>& subcommands) {
  auto sub = std::find_if(args.begin(), args.end(),
                          [&](const std::string& a) { return subcommands.count(a) > 0; });
  if (sub == args.end()) return args;
  std::string path;
  for (auto it = sub + 1; it != args.end(); ++it) {
    if (*it == "--config" && it + 1 != args.end()) path = *(it + 1);
    if (it->rfind("--config=", 0) == 0) path = it->substr(9);
  }
  if (path.empty()) return args;
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_key_values(path)) {
    if (key == "config") throw ConfigError("config file may not name another config file");
    injected.push_back("--" + dashed(key) + "=" + value);
  }
  args.insert(sub + 1, injected.begin(), injected.end());
  return args;
}

std::string timestamp_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

std::optional<std::string> maybe_timestamp(const CommonArgs& common) {
  if (common.no_timestamp) return std::nullopt;
  return timestamp_now();
}

// Every option of the subcommand with the value that took effect.
KeyValues option_values(const CLI::App* sub) {
  KeyValues out;
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "config") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    out.emplace_back(underscored(name), value);
  }
  return out;
}

void write_effective_config(const CommonArgs& common, const KeyValues& values) {
  if (common.out.empty()) return;
  fs::create_directories(common.out);
  write_file(fs::path(common.out) / "effective_config.txt", format_key_values(values));
}

// Relation ids are case-sensitive, so entries are only trimmed.
std::set<std::string> parse_relation_list(const std::string& list) {
  std::set<std::string> out;
  std::stringstream in(list);
  for (std::string item; std::getline(in, item, ',');) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(" \t");
    out.insert(item.substr(first, last - first + 1));
  }
  return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    const std::string clean = normalize_text(line);
    if (!clean.empty()) lines.push_back(clean);
  }
  return lines;
}

// ---- prepare ---------------------------------------------------------------

struct PrepareArgs {
  bool synthetic = false;
  std::vector<std::string> inputs;
  std::string train_file, dev_file, test_file;
  std::string format = "jsonl";
  std::string schema = "atomic";
  std::string relations;
  std::string relation_split = "full";
  std::string text_file;
  int min_count = 1;
  int max_subject = 17;
  int max_object = 15;
};

int cmd_prepare(const CLI::App* sub, const CommonArgs& common, const PrepareArgs& a) {
  const bool has_files = !a.inputs.empty() || !a.train_file.empty() || !a.dev_file.empty() ||
                         !a.test_file.empty();
  if (a.synthetic && has_files) {
    throw ArgumentError("--synthetic conflicts with --input/--train/--dev/--test");
  }
  if (!a.synthetic && !has_files) {
    throw ArgumentError("prepare needs --synthetic or tuple files");
  }
  if (a.synthetic && a.schema != "atomic") {
    throw ArgumentError("the synthetic knowledge base uses the atomic schema");
  }
  if (!a.relations.empty() && a.relation_split != "full") {
    throw ArgumentError("--relations conflicts with --relation-split");
  }

  PreparedDataset d;
  d.schemas = SchemaSet::load(a.schema);
  d.min_count = a.min_count;
  d.max_subject = a.max_subject;
  d.max_object = a.max_object;

  std::vector<KnowledgeTuple> tuples;
  if (a.synthetic) {
    SyntheticKb kb = make_synthetic_kb(common.seed);
    tuples = std::move(kb.tuples);
    d.text = std::move(kb.text);
  } else {
    const TupleFormat format = parse_tuple_format(a.format);
    // --input rows keep their own split; --train/--dev/--test assign one.
    auto add = [&](const std::string& path, Partition split, bool force) {
      if (path.empty()) return;
      auto part = load_tuples(path, format, d.schemas, split);
      for (auto& t : part) {
        if (force) t.split = split;
        tuples.push_back(std::move(t));
      }
    };
    for (const auto& p : a.inputs) add(p, Partition::kTrain, false);
    add(a.train_file, Partition::kTrain, true);
    add(a.dev_file, Partition::kDev, true);
    add(a.test_file, Partition::kTest, true);
    if (!a.text_file.empty()) d.text = read_lines(a.text_file);
  }

  d.split = make_split(tuples);
  if (!a.relations.empty()) {
    d.split = filter_relations(d.split, parse_relation_list(a.relations), d.schemas);
  } else if (a.relation_split != "full") {
    d.split = filter_relations(d.split, relation_split(a.relation_split), d.schemas);
  }

  std::vector<KnowledgeTuple> all = d.split.train;
  all.insert(all.end(), d.split.dev.begin(), d.split.dev.end());
  all.insert(all.end(), d.split.test.begin(), d.split.test.end());
  d.vocab = Vocabulary::build(all, d.schemas, a.min_count, d.text);
  save_dataset(common.out, d);

  KeyValues echo = option_values(sub);
  echo.emplace_back("vocab_hash", d.vocab.hash());
  write_effective_config(common, echo);
  std::cout << "prepared " << d.split.train.size() << " train, " << d.split.dev.size()
            << " dev, " << d.split.test.size() << " test tuples; vocabulary "
            << d.vocab.size() << " tokens\n";
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string preset = "desk";
  std::string init;
  std::string pretrain_text;
  bool echo_only = false;
  bool quiet = false;
  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> override_options;
};

int cmd_train(const CommonArgs& common, const TrainArgs& a) {
  TrainConfig cfg = TrainConfig::preset(a.preset);
  for (const auto& [key, opt] : a.override_options) {
    if (opt->count() > 0) cfg.set(key, a.overrides.at(key));
  }
  if (common.seed_option->count() > 0) cfg.seed = common.seed;
  cfg.validate();

  KeyValues echo = {{"preset", a.preset},
                    {"data", a.data},
                    {"init", a.init},
                    {"pretrain_text", a.pretrain_text}};
  const KeyValues fields = cfg.to_key_values();
  echo.insert(echo.end(), fields.begin(), fields.end());

  if (a.echo_only) {
    write_effective_config(common, echo);
    std::cout << format_key_values(echo);
    return kExitOk;
  }
  if (a.data.empty()) throw ArgumentError("train needs --data (a prepared dataset directory)");
  if (common.out.empty()) throw ArgumentError("train needs --out");

  const PreparedDataset d = load_dataset(a.data);
  const Layout layout = d.layout(cfg.mode, cfg.meta_tokens);
  ModelConfig model = cfg.model;
  model.vocab_size = d.vocab.size();
  echo.emplace_back("vocab_size", std::to_string(model.vocab_size));
  echo.emplace_back("vocab_hash", d.vocab.hash());
  echo.emplace_back("max_subject", std::to_string(layout.max_subject));
  echo.emplace_back("max_relation", std::to_string(layout.max_relation));
  echo.emplace_back("max_object", std::to_string(layout.max_object));

  Reporter reporter;
  if (!a.quiet) {
    reporter = [](const LossPoint& p) {
      if (!std::isnan(p.dev_loss)) {
        std::cerr << "step " << p.step << " lr " << p.lr << " dev_loss " << p.dev_loss << "\n";
      }
    };
  }

  TrainResult result;
  std::string task;
  if (!a.pretrain_text.empty()) {
    task = "lm";
    const std::vector<std::string> lines = read_lines(a.pretrain_text);
    std::vector<std::string> train_text, dev_text;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      (i % 10 == 9 ? dev_text : train_text).push_back(lines[i]);
    }
    if (train_text.empty() || dev_text.empty()) {
      throw DataError("pretraining text needs at least 10 non-empty lines");
    }
    echo.emplace_back("text_train_lines", std::to_string(train_text.size()));
    echo.emplace_back("text_dev_lines", std::to_string(dev_text.size()));
    write_effective_config(common, echo);
    result = pretrain_lm(d.vocab, train_text, dev_text, layout.length(), model, cfg, reporter);
  } else {
    task = "tuples";
    DatasetSplit split = d.split;
    if (cfg.relation_split != "full") {
      split = filter_relations(split, relation_split(cfg.relation_split), d.schemas);
    }
    if (cfg.fraction < 1.0) split = subsample_training(split, cfg.fraction, cfg.seed);
    const EncodingOptions enc{layout, cfg.mode, cfg.meta_tokens};
    const auto train_set = encode_tuples(d.vocab, d.schemas, split.train, enc);
    const auto dev_set = encode_tuples(d.vocab, d.schemas, split.dev, enc);

    Parameters<float> init;
    if (!a.init.empty()) {
      Checkpoint ck = load_checkpoint(a.init, d.vocab.hash());
      ModelConfig loaded = ck.config;
      loaded.dropout = model.dropout;
      if (!(loaded == model)) {
        throw ConfigError("--init checkpoint has a different model shape: " +
                          model_config_to_json(ck.config));
      }
      init = std::move(ck.params);
    } else {
      init = init_parameters<float>(model, d.vocab.num_specials(), derive_seed(cfg.seed, 0));
    }
    echo.emplace_back("train_tuples", std::to_string(split.train.size()));
    echo.emplace_back("dev_tuples", std::to_string(split.dev.size()));
    write_effective_config(common, echo);
    result = train(std::move(init), model, train_set, dev_set, cfg, reporter);
  }

  const fs::path out = common.out;
  Checkpoint ck;
  ck.config = model;
  ck.vocab_hash = d.vocab.hash();
  ck.metadata = {{"task", task},
                 {"schema", d.schemas.name()},
                 {"relation_mode", std::string(relation_mode_name(cfg.mode))},
                 {"meta_tokens", cfg.meta_tokens ? "true" : "false"},
                 {"max_subject", std::to_string(layout.max_subject)},
                 {"max_relation", std::to_string(layout.max_relation)},
                 {"max_object", std::to_string(layout.max_object)}};
  ck.params = std::move(result.best);
  save_checkpoint(out / "model.ckpt", ck);
  write_file(out / "loss.csv", loss_curve_csv(result.curve));
  write_file(out / "vocab.json", d.vocab.to_json() + "\n");
  write_file(out / "schema.json", d.schemas.to_json() + "\n");
  json summary = {{"task", task},
                  {"best_step", result.best_step},
                  {"best_dev_loss", result.best_dev_loss},
                  {"best_dev_ppl", std::exp(result.best_dev_loss)},
                  {"steps_run", result.steps_run},
                  {"stopped_early", result.stopped_early}};
  if (auto ts = maybe_timestamp(common)) summary["timestamp"] = *ts;
  write_file(out / "train_summary.json", summary.dump(2) + "\n");
  std::cout << "best dev loss " << result.best_dev_loss << " (ppl "
            << std::exp(result.best_dev_loss) << ") at step " << result.best_step << "\n";
  return kExitOk;
}

// ---- shared model loading and decoding -------------------------------------

struct LoadedModel {
  Checkpoint checkpoint;
  Vocabulary vocab;
  SchemaSet schemas;
  EncodingOptions encoding;
};

LoadedModel load_model(const fs::path& dir) {
  LoadedModel m;
  m.vocab = Vocabulary::from_json(read_file(dir / "vocab.json"));
  m.checkpoint = load_checkpoint(dir / "model.ckpt", m.vocab.hash());
  const auto& meta = m.checkpoint.metadata;
  auto get = [&](const char* key) {
    auto it = meta.find(key);
    if (it == meta.end()) throw CheckpointError(std::string("checkpoint lacks metadata ") + key);
    return it->second;
  };
  if (get("task") != "tuples") {
    throw ArgumentError("checkpoint is a language-model pretraining run; fine-tune it first");
  }
  m.schemas = SchemaSet::from_json(read_file(dir / "schema.json"), get("schema"));
  m.encoding.mode = parse_relation_mode(get("relation_mode"));
  m.encoding.meta_tokens = get("meta_tokens") == "true";
  m.encoding.layout.max_subject = std::stoi(get("max_subject"));
  m.encoding.layout.max_relation = std::stoi(get("max_relation"));
  m.encoding.layout.max_object = std::stoi(get("max_object"));
  return m;
}

struct DecoderArgs {
  std::string decoder = "greedy";
  int beam = 10;
  int k = 5;
  int n = 5;

  void add(CLI::App* sub, const char* default_decoder) {
    decoder = default_decoder;
    sub->add_option("--decoder", decoder, "greedy, beam or topk")->capture_default_str();
    sub->add_option("--b", beam, "beam width")->capture_default_str();
    sub->add_option("--k", k, "top-k cutoff")->capture_default_str();
    sub->add_option("--n", n, "samples per prompt for topk")->capture_default_str();
  }

  std::optional<int> param() const {
    switch (parse_decoder(decoder)) {
      case DecoderKind::kBeam: return beam;
      case DecoderKind::kTopK: return k;
      case DecoderKind::kGreedy: return std::nullopt;
    }
    return std::nullopt;
  }
};

std::vector<GenerationCandidate> decode_prompt(const LoadedModel& m, const DecoderArgs& a,
                                               const std::string& subject,
                                               const std::string& relation,
                                               std::uint64_t seed) {
  const KnowledgeTuple prompt{subject, relation, "", Partition::kTest};
  const EncodedSequence seq = encode_tuple(m.vocab, m.schemas, prompt, m.encoding);
  const std::vector<int> prefix = decoding_prefix(seq);
  const DecodeContext ctx = DecodeContext::for_vocabulary(
      m.checkpoint.params, m.checkpoint.config, m.vocab, m.encoding.layout.max_object);
  switch (parse_decoder(a.decoder)) {
    case DecoderKind::kGreedy: return {greedy(ctx, prefix)};
    case DecoderKind::kBeam: return beam_search(ctx, prefix, a.beam);
    case DecoderKind::kTopK: return top_k_sample(ctx, prefix, a.k, a.n, seed);
  }
  return {};
}

std::string object_text(const LoadedModel& m, const GenerationCandidate& c) {
  return m.vocab.decode(c.tokens);
}

// ---- generate --------------------------------------------------------------

struct GenerateArgs {
  std::string model;
  std::string prompts;
  DecoderArgs decoding;
};

int cmd_generate(const CLI::App* sub, const CommonArgs& common, const GenerateArgs& a) {
  parse_decoder(a.decoding.decoder);
  const LoadedModel m = load_model(a.model);
  std::istringstream in(read_file(a.prompts));
  std::string rows;
  int prompts = 0, failures = 0, line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (normalize_text(line).empty()) continue;
    ++prompts;
    std::string subject, relation;
    try {
      json row;
      try {
        row = json::parse(line);
      } catch (const json::exception&) {
        throw DataError("not a JSON object");
      }
      if (!row.is_object() || !row.contains("subject") || !row.contains("relation") ||
          !row["subject"].is_string() || !row["relation"].is_string()) {
        throw DataError("prompt needs string fields subject and relation");
      }
      subject = normalize_text(row["subject"].get<std::string>());
      relation = row["relation"].get<std::string>();
      m.schemas.at(relation);
      const auto candidates =
          decode_prompt(m, a.decoding, subject, relation, derive_seed(common.seed, line_no));
      int rank = 0;
      for (const auto& c : candidates) {
        json out = {{"subject", subject},
                    {"relation", relation},
                    {"object", object_text(m, c)},
                    {"log_prob", c.log_prob},
                    {"decoder", a.decoding.decoder},
                    {"param", a.decoding.param() ? json(*a.decoding.param()) : json(nullptr)},
                    {"rank", ++rank}};
        rows += out.dump() + "\n";
      }
    } catch (const Error& e) {
      ++failures;
      json err = {{"line", line_no}, {"error", e.what()}};
      if (!subject.empty()) err["subject"] = subject;
      if (!relation.empty()) err["relation"] = relation;
      rows += err.dump() + "\n";
      std::cerr << "line " << line_no << ": " << e.what() << "\n";
    }
  }
  if (prompts == 0) throw ArgumentError("prompt file " + a.prompts + " is empty");
  fs::create_directories(common.out);
  write_file(fs::path(common.out) / "generations.jsonl", rows);
  write_effective_config(common, option_values(sub));
  std::cout << prompts - failures << " of " << prompts << " prompts decoded\n";
  return failures == prompts ? kExitUsage : kExitOk;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string generations;
  std::string gold;
  std::string train;
  std::string model;
  std::string schema = "atomic";
  std::string stopwords;
  bool edit_profile = false;
};

std::vector<KnowledgeTuple> read_generations(const fs::path& path) {
  std::vector<KnowledgeTuple> out;
  std::istringstream in(read_file(path));
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (normalize_text(line).empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception&) {
      throw DataError("generation row is not JSON", line_no);
    }
    if (row.contains("error")) continue;
    if (!row.contains("subject") || !row.contains("relation") || !row.contains("object")) {
      throw DataError("generation row needs subject, relation and object", line_no);
    }
    out.push_back({normalize_text(row["subject"].get<std::string>()),
                   row["relation"].get<std::string>(),
                   normalize_text(row["object"].get<std::string>()), Partition::kTest});
  }
  return out;
}

int cmd_evaluate(const CLI::App* sub, const CommonArgs& common, const EvaluateArgs& a) {
  std::optional<LoadedModel> model;
  if (!a.model.empty()) model = load_model(a.model);
  const SchemaSet schemas = model ? model->schemas : SchemaSet::load(a.schema);
  const Stopwords stopwords = a.stopwords.empty() ? Stopwords::builtin() : Stopwords::load(a.stopwords);

  std::vector<KnowledgeTuple> generated, gold, train_tuples;
  if (!a.generations.empty()) generated = read_generations(a.generations);
  if (!a.gold.empty()) gold = load_tuples(a.gold, TupleFormat::kJsonl, schemas);
  if (!a.train.empty()) train_tuples = load_tuples(a.train, TupleFormat::kJsonl, schemas);

  EvalReport report;
  report.stopwords_hash = stopwords.hash();
  report.evaluated_tuples = static_cast<long>(generated.size());

  if (!generated.empty() && !gold.empty()) {
    std::map<std::pair<std::string, std::string>, std::vector<Tokens>> refs;
    for (const auto& g : gold) refs[{g.subject, g.relation}].push_back(split_words(g.object));
    std::vector<Tokens> candidates;
    std::vector<std::vector<Tokens>> references;
    for (const auto& g : generated) {
      auto it = refs.find({g.subject, g.relation});
      if (it == refs.end()) {
        throw DataError("no gold reference for (" + g.subject + ", " + g.relation + ")");
      }
      candidates.push_back(split_words(g.object));
      references.push_back(it->second);
    }
    report.bleu_stats = bleu2_stats(candidates, references);
    report.bleu2 = bleu2_from_stats(*report.bleu_stats);
  } else if (!generated.empty() && a.gold.empty()) {
    std::cerr << "no --gold given; BLEU-2 skipped\n";
  }
  if (!generated.empty() && !a.train.empty()) {
    report.novelty = novelty_metrics(generated, train_tuples);
  }
  if (model && !gold.empty()) {
    const auto seqs = encode_tuples(model->vocab, model->schemas, gold, model->encoding);
    report.ppl = perplexity(model->checkpoint.params, model->checkpoint.config, seqs);
  }
  if (!gold.empty() && !train_tuples.empty()) {
    report.unigram_ppl = unigram_baseline_ppl(train_tuples, gold);
  }
  if (a.edit_profile) {
    if (gold.empty() || train_tuples.empty()) {
      throw ArgumentError("--edit-profile needs --gold and --train");
    }
    std::unordered_set<std::string> seen;
    for (const auto& t : train_tuples) seen.insert(t.subject + '\x1f' + t.relation + '\x1f' + t.object);
    std::vector<KnowledgeTuple> novel;
    for (const auto& g : gold) {
      if (!seen.count(g.subject + '\x1f' + g.relation + '\x1f' + g.object)) novel.push_back(g);
    }
    report.edit_profile = edit_distance_profile(novel, train_tuples, stopwords);
  }

  const fs::path out = common.out;
  fs::create_directories(out);
  write_file(out / "report.json", report.to_json(maybe_timestamp(common)));
  if (report.edit_profile) write_file(out / "edit_histogram.csv", report.histogram_csv());
  write_effective_config(common, option_values(sub));
  std::cout << report.to_json(maybe_timestamp(common));
  return kExitOk;
}

// ---- build-kb --------------------------------------------------------------

struct BuildKbArgs {
  std::string model;
  std::string subjects;
  std::string train;
  std::string relations;
  DecoderArgs decoding;
};

int cmd_build_kb(const CLI::App* sub, const CommonArgs& common, const BuildKbArgs& a) {
  parse_decoder(a.decoding.decoder);
  const LoadedModel m = load_model(a.model);
  const std::vector<std::string> subjects = read_lines(a.subjects);
  if (subjects.empty()) throw ArgumentError("subject file " + a.subjects + " is empty");
  const std::vector<KnowledgeTuple> train_tuples =
      load_tuples(a.train, TupleFormat::kJsonl, m.schemas);

  std::vector<std::string> relations;
  if (a.relations.empty()) {
    for (const auto& r : m.schemas.relations()) relations.push_back(r.id);
  } else {
    for (const auto& r : parse_relation_list(a.relations)) {
      m.schemas.at(r);
      relations.push_back(r);
    }
  }

  std::unordered_set<std::string> train_triples, train_objects;
  for (const auto& t : train_tuples) {
    train_triples.insert(t.subject + '\x1f' + t.relation + '\x1f' + t.object);
    train_objects.insert(t.object);
  }

  std::string rows;
  std::vector<KnowledgeTuple> generated;
  long novel_nodes = 0, novel_edges = 0;
  std::uint64_t prompt_index = 0;
  for (const auto& subject : subjects) {
    for (const auto& relation : relations) {
      const auto candidates =
          decode_prompt(m, a.decoding, subject, relation, derive_seed(common.seed, prompt_index++));
      int rank = 0;
      for (const auto& c : candidates) {
        const std::string object = object_text(m, c);
        const bool node = !train_objects.count(object);
        const bool edge = !train_triples.count(subject + '\x1f' + relation + '\x1f' + object);
        novel_nodes += node;
        novel_edges += edge;
        generated.push_back({subject, relation, object, Partition::kTest});
        json out = {{"subject", subject},
                    {"relation", relation},
                    {"object", object},
                    {"score", c.log_prob},
                    {"novel_node", node},
                    {"novel_edge", edge},
                    {"decoder", a.decoding.decoder},
                    {"param", a.decoding.param() ? json(*a.decoding.param()) : json(nullptr)},
                    {"rank", ++rank}};
        rows += out.dump() + "\n";
      }
    }
  }

  const NoveltyMetrics novelty = novelty_metrics(generated, train_tuples);
  json summary = {{"records", generated.size()},
                  {"subjects", subjects.size()},
                  {"relations", relations},
                  {"novel_nodes", novel_nodes},
                  {"novel_edges", novel_edges},
                  {"n_t_sro", novelty.n_t_sro},
                  {"n_t_o", novelty.n_t_o},
                  {"n_u_o", novelty.n_u_o}};
  if (auto ts = maybe_timestamp(common)) summary["timestamp"] = *ts;
  const fs::path out = common.out;
  fs::create_directories(out);
  write_file(out / "kb.jsonl", rows);
  write_file(out / "kb_summary.json", summary.dump(2) + "\n");
  write_effective_config(common, option_values(sub));
  std::cout << "records " << generated.size() << " N/T sro " << novelty.n_t_sro << " N/T o "
            << novelty.n_t_o << " N/U o " << novelty.n_u_o << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Generative commonsense knowledge-base construction", "cometkb"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  CommonArgs common;

  PrepareArgs prep;
  CLI::App* prepare = app.add_subcommand("prepare", "build vocabulary and partitions");
  add_common(prepare, common);
  prepare->add_flag("--synthetic", prep.synthetic, "generate the bundled mini knowledge base");
  prepare->add_option("--input", prep.inputs, "tuple files (JSONL rows carry their split)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  prepare->add_option("--train", prep.train_file, "train tuple file");
  prepare->add_option("--dev", prep.dev_file, "dev tuple file");
  prepare->add_option("--test", prep.test_file, "test tuple file");
  prepare->add_option("--format", prep.format, "jsonl or tsv")->capture_default_str();
  prepare->add_option("--schema", prep.schema, "atomic, conceptnet or a schema JSON file")
      ->capture_default_str();
  prepare->add_option("--relations", prep.relations, "comma-separated relation subset");
  prepare->add_option("--relation-split", prep.relation_split, "named relation group")
      ->capture_default_str();
  prepare->add_option("--text", prep.text_file, "plain-text pretraining corpus");
  prepare->add_option("--min-count", prep.min_count, "minimum word frequency")
      ->capture_default_str();
  prepare->add_option("--max-subject", prep.max_subject, "subject segment width")
      ->capture_default_str();
  prepare->add_option("--max-object", prep.max_object, "object segment width")
      ->capture_default_str();

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "train a knowledge model");
  add_common(train_cmd, common, /*out_required=*/false);
  train_cmd->add_option("--data", tr.data, "prepared dataset directory");
  train_cmd->add_option("--preset", tr.preset, "atomic-paper, conceptnet-paper or desk")
      ->capture_default_str();
  train_cmd->add_option("--init", tr.init, "initial checkpoint (e.g. from pretraining)");
  train_cmd->add_option("--pretrain-text", tr.pretrain_text,
                        "train a plain language model on this text file instead");
  train_cmd->add_flag("--echo-only", tr.echo_only, "print the effective config and exit");
  train_cmd->add_flag("--quiet", tr.quiet, "no progress lines");
  for (const auto& [key, value] : TrainConfig().to_key_values()) {
    if (key == "seed") continue;
    tr.overrides[key];
    tr.override_options[key] =
        train_cmd->add_option("--" + dashed(key), tr.overrides[key], "train config " + key);
  }

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "decode objects for prompts");
  add_common(generate, common);
  generate->add_option("--model", gen.model, "training output directory")->required();
  generate->add_option("--prompts", gen.prompts, "JSONL of {subject, relation}")->required();
  gen.decoding.add(generate, "greedy");

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "compute the evaluation report");
  add_common(evaluate, common);
  evaluate->add_option("--generations", ev.generations, "generations JSONL");
  evaluate->add_option("--gold", ev.gold, "gold tuples JSONL");
  evaluate->add_option("--train", ev.train, "training tuples JSONL");
  evaluate->add_option("--model", ev.model, "training output directory, for perplexity");
  evaluate->add_option("--schema", ev.schema, "schema when no model is given")
      ->capture_default_str();
  evaluate->add_option("--stopwords", ev.stopwords, "stopword list (default: built-in)");
  evaluate->add_flag("--edit-profile", ev.edit_profile, "add the edit-distance histogram");

  BuildKbArgs kb;
  CLI::App* build_kb = app.add_subcommand("build-kb", "generate a knowledge graph");
  add_common(build_kb, common);
  build_kb->add_option("--model", kb.model, "training output directory")->required();
  build_kb->add_option("--subjects", kb.subjects, "one seed subject per line")->required();
  build_kb->add_option("--train", kb.train, "training tuples, for novelty flags")->required();
  build_kb->add_option("--relations", kb.relations, "comma-separated relations (default all)");
  kb.decoding.add(build_kb, "beam");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = expand_config(std::move(args),
                         {"prepare", "train", "generate", "evaluate", "build-kb"});
    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::ParseError& e) {
      const int rc = app.exit(e);
      return rc == 0 ? kExitOk : kExitUsage;
    }
    if (prepare->parsed()) return cmd_prepare(prepare, common, prep);
    if (train_cmd->parsed()) return cmd_train(common, tr);
    if (generate->parsed()) return cmd_generate(generate, common, gen);
    if (evaluate->parsed()) return cmd_evaluate(evaluate, common, ev);
    if (build_kb->parsed()) return cmd_build_kb(build_kb, common, kb);
    return kExitUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace cometkb
