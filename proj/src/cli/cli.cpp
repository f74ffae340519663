/* Copyright 2026 The semdef Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "semdef/cli/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semdef/core/error.hpp"
#include "semdef/data/batch.hpp"
#include "semdef/data/dataset.hpp"
#include "semdef/data/vocab.hpp"
#include "semdef/eval/bleu.hpp"
#include "semdef/eval/decode.hpp"
#include "semdef/models/checkpoint.hpp"
#include "semdef/models/config.hpp"
#include "semdef/models/training.hpp"

namespace semdef::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Usage problems detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlignArgs {
  std::string definitions, lexicon, token_lexicon, function_words, pos_map, out;
  std::vector<std::string> exclude_pos;
};

struct SplitArgs {
  std::string data, out;
  std::uint64_t seed = 1;
  std::vector<unsigned> ratios{18, 1, 1};
};

struct TrainArgs {
  std::string config, arch, data, valid, out, embeddings;
  std::optional<std::uint64_t> seed;
  bool no_position = false, no_adaptive = false, no_sememes = false;
  std::vector<std::string> overrides;
};

struct DecodeArgs {
  std::string ckpt, input, out;
  std::size_t beam = 1;
  std::size_t max_len = eval::kDefaultMaxLen;
  bool length_norm = false;
};

struct ScoreArgs {
  std::string cand, ref;
  bool verbose = false;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

// --------------------------------------------------------------- align

int do_align(const AlignArgs& a, std::ostream& out, std::ostream& err) {
  const auto defs = data::parse_definitions(a.definitions);
  const auto lexicon = data::parse_lexicon(a.lexicon);
  const auto tokens = a.token_lexicon.empty() ? lexicon : data::parse_lexicon(a.token_lexicon);
  auto aligned = data::align_entries(defs, lexicon, tokens);
  err << "aligned " << aligned.entries.size() << " of " << defs.size() << " definitions ("
      << aligned.missing_word << " headwords missing from the lexicon, " << aligned.no_overlap
      << " without sememe overlap)\n";
  std::vector<data::Entry> entries = std::move(aligned.entries);
  if (!a.function_words.empty() || !a.exclude_pos.empty()) {
    if (!a.exclude_pos.empty() && a.pos_map.empty()) {
      throw UsageError("--exclude-pos needs --pos-map");
    }
    const auto fw = a.function_words.empty() ? std::set<std::string>{}
                                              : data::read_word_list(a.function_words);
    const auto pos = a.pos_map.empty() ? std::unordered_map<std::string, std::string>{}
                                       : data::read_pos_map(a.pos_map);
    const std::set<std::string> excluded(a.exclude_pos.begin(), a.exclude_pos.end());
    auto filtered = data::filter_entries(entries, fw, excluded, pos);
    err << "kept " << filtered.kept.size() << " entries (" << filtered.contains_word
        << " definitions containing the headword, " << filtered.function_word
        << " function words, " << filtered.excluded_pos << " excluded parts of speech)\n";
    entries = std::move(filtered.kept);
  }
  if (a.out.empty()) {
    data::write_entries(out, entries);
  } else {
    data::save_dataset(a.out, entries);
  }
  return kExitOk;
}

// --------------------------------------------------------------- split

int do_split(const SplitArgs& a, std::ostream& out, std::ostream&) {
  if (a.ratios.size() != 3) throw UsageError("--ratios takes three integers");
  const auto entries = data::parse_dataset(a.data);
  const auto s = data::split_dataset(entries, a.seed, {a.ratios[0], a.ratios[1], a.ratios[2]});
  fs::create_directories(a.out);
  data::save_dataset(fs::path(a.out) / "train.jsonl", s.train);
  data::save_dataset(fs::path(a.out) / "valid.jsonl", s.valid);
  data::save_dataset(fs::path(a.out) / "test.jsonl", s.test);
  out << "train " << s.train.size() << "\nvalid " << s.valid.size() << "\ntest " << s.test.size()
      << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- train

models::ModelConfig train_config(const TrainArgs& a) {
  models::ConfigValues values;
  if (!a.config.empty()) values = models::read_config_file(a.config);
  if (!a.arch.empty()) values.emplace_back("arch", a.arch);
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    auto parsed = models::parse_config_text(kv, "--set");
    values.insert(values.end(), parsed.begin(), parsed.end());
  }
  if (a.seed) values.emplace_back("seed", std::to_string(*a.seed));
  const bool ablating = a.no_position || a.no_adaptive || a.no_sememes;
  if (ablating) {
    models::Arch arch = models::Arch::kSaam;
    for (const auto& [k, v] : values)
      if (k == "arch") arch = models::parse_arch(v);
    if (arch != models::Arch::kSaam) {
      throw UsageError("--no-position, --no-adaptive and --no-sememes apply only to saam");
    }
  }
  if (a.no_position) values.emplace_back("use_position", "false");
  if (a.no_adaptive) values.emplace_back("use_adaptive", "false");
  if (a.no_sememes) values.emplace_back("use_sememes", "false");
  return models::make_config(values);
}

int do_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const models::ModelConfig cfg = train_config(a);
  const auto train_entries = data::parse_dataset(a.data);
  if (train_entries.empty()) throw DataError(a.data + ": no training entries");
  const auto vocabs = data::Vocabularies::build(train_entries, cfg.min_count);
  const std::size_t max_def = models::max_definition_tokens(cfg);
  const auto train_set = data::encode_entries(train_entries, vocabs, cfg.max_sememes, max_def);
  std::vector<data::Example> valid_set;
  if (!a.valid.empty()) {
    valid_set = data::encode_entries(data::parse_dataset(a.valid), vocabs, cfg.max_sememes, max_def);
  }
  auto model = models::make_model<float>(cfg, models::vocab_sizes(vocabs));
  if (!a.embeddings.empty()) {
    const std::size_t missing = models::load_pretrained_embeddings(*model, vocabs, a.embeddings);
    err << "pretrained vectors: " << missing << " tokens absent (zero rows)\n";
  }
  err << "arch " << models::arch_name(cfg.arch) << ", " << model->params().scalar_count()
      << " parameters, " << train_set.size() << " training examples\n";
  models::TrainHooks hooks;
  double epoch_loss = 0;
  std::size_t epoch_steps = 0;
  hooks.on_step = [&](const models::TrainLogRow& r) {
    epoch_loss += r.train_loss;
    ++epoch_steps;
  };
  hooks.on_epoch = [&](std::size_t epoch, std::optional<double> valid) {
    err << "epoch " << epoch + 1 << " train_loss " << fmt("%.6f", epoch_loss / epoch_steps);
    if (valid) err << " valid_loss " << fmt("%.6f", *valid);
    err << "\n";
    epoch_loss = 0;
    epoch_steps = 0;
  };
  const auto result = models::train(*model, train_set, valid_set.empty() ? nullptr : &valid_set, hooks);
  models::save_model_dir(a.out, *model, vocabs);
  models::write_loss_csv(fs::path(a.out) / "loss.csv", result.log);
  out << "trained " << result.steps << " steps over " << result.epochs << " epochs";
  if (result.best_valid_loss) {
    out << "; best valid_loss " << fmt("%.6f", *result.best_valid_loss) << " after epoch "
        << result.best_epoch + 1;
  }
  out << "\ncheckpoint written to " << a.out << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- generate / inspect

struct Query {
  std::string word;
  std::vector<std::string> sememes;
  std::vector<std::string> definition;  // optional
};

std::vector<Query> read_queries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Query> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + "malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("word") || !j["word"].is_string()) {
      throw DataError(where + "expected an object with a string \"word\"");
    }
    Query q;
    q.word = j["word"].get<std::string>();
    if (j.contains("sememes")) {
      if (!j["sememes"].is_array()) throw DataError(where + "\"sememes\" must be a list");
      for (const auto& s : j["sememes"]) {
        if (!s.is_string()) throw DataError(where + "sememes must be strings");
        q.sememes.push_back(s.get<std::string>());
      }
    }
    if (j.contains("definition")) {
      const auto& d = j["definition"];
      if (d.is_string()) {
        q.definition = data::split_tokens(d.get<std::string>());
      } else if (d.is_array()) {
        for (const auto& t : d) q.definition.push_back(t.get<std::string>());
      } else {
        throw DataError(where + "\"definition\" must be a string or list");
      }
    }
    out.push_back(std::move(q));
  }
  return out;
}

models::ModelInput encode_query(const Query& q, const models::LoadedModel& m) {
  data::Entry e{q.word, q.sememes, {"x"}};
  const auto ex = data::encode_entry(e, m.vocabs, m.config.max_sememes, 1);
  return models::input_from_example(ex);
}

eval::Hypothesis decode_query(const models::LoadedModel& m, const models::ModelInput& in,
                              const DecodeArgs& a) {
  if (a.beam <= 1) return eval::greedy_decode(*m.model, in, a.max_len);
  return eval::beam_decode(*m.model, in, eval::BeamOptions{a.beam, a.max_len, a.length_norm});
}

int do_generate(const DecodeArgs& a, std::ostream& out, std::ostream&) {
  if (a.beam == 0) throw UsageError("--beam must be at least 1");
  const auto m = models::load_model_dir(a.ckpt);
  const auto queries = read_queries(a.input);
  std::ofstream file;
  if (!a.out.empty()) file = open_out(a.out);
  std::ostream& dst = a.out.empty() ? out : file;
  for (const auto& q : queries) {
    const auto h = decode_query(m, encode_query(q, m), a);
    dst << data::join_tokens(m.vocabs.target.decode(h.tokens)) << "\n";
  }
  return kExitOk;
}

int do_inspect(const DecodeArgs& a, std::ostream& out, std::ostream&) {
  const auto m = models::load_model_dir(a.ckpt);
  if (m.config.arch == models::Arch::kBaseline) {
    throw UsageError("inspect needs an attention model (aam or saam)");
  }
  std::ofstream file;
  if (!a.out.empty()) file = open_out(a.out);
  std::ostream& dst = a.out.empty() ? out : file;
  for (const auto& q : read_queries(a.input)) {
    const auto in = encode_query(q, m);
    std::vector<TokenId> tokens;
    if (q.definition.empty()) {
      tokens = decode_query(m, in, a).tokens;
    } else {
      tokens = m.vocabs.target.encode(q.definition);
      tokens.push_back(kEos);
    }
    std::vector<TokenId> prefix{kBos};
    prefix.insert(prefix.end(), tokens.begin(), tokens.end() - 1);
    std::vector<models::TraceRecord> trace;
    {
      Graph<float> g(false);
      m.model->logits(g, in, prefix, &trace);
    }
    ordered_json slots = ordered_json::array();
    if (m.config.arch == models::Arch::kSaam) slots.push_back(m.vocabs.source.token(in.word));
    if (m.config.use_sememes)
      for (TokenId s : in.visible_sememes()) slots.push_back(m.vocabs.source.token(s));
    ordered_json steps = ordered_json::array();
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      ordered_json layers = ordered_json::array();
      for (const auto& r : trace) {
        if (r.t != t) continue;
        ordered_json l;
        l["layer"] = r.layer;
        l["beta"] = r.beta ? ordered_json(*r.beta) : ordered_json(nullptr);
        l["alpha"] = r.alpha;
        layers.push_back(std::move(l));
      }
      ordered_json s;
      s["t"] = t;
      s["token"] = m.vocabs.target.token(tokens[t]);
      s["layers"] = std::move(layers);
      steps.push_back(std::move(s));
    }
    ordered_json line;
    line["word"] = q.word;
    line["slots"] = std::move(slots);
    line["steps"] = std::move(steps);
    dst << line.dump() << "\n";
  }
  return kExitOk;
}

// --------------------------------------------------------------- score

int do_score(const ScoreArgs& a, std::ostream& out, std::ostream&) {
  const auto r = eval::bleu_files(a.cand, a.ref);
  if (a.verbose) {
    out << eval::format_bleu(r) << "\n";
  } else {
    out << "BLEU = " << fmt("%.2f", r.bleu) << "\n";
  }
  return kExitOk;
}

void add_decode_flags(CLI::App* cmd, DecodeArgs& a) {
  cmd->add_option("--ckpt", a.ckpt, "Checkpoint directory written by train")->required();
  cmd->add_option("--input", a.input, "JSON lines with \"word\" and \"sememes\"")->required();
  cmd->add_option("--out", a.out, "Output file (default: stdout)");
  cmd->add_option("--beam", a.beam, "Beam width; 1 decodes greedily")->capture_default_str();
  cmd->add_option("--max-len", a.max_len, "Longest generated sequence, EOS included")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--length-norm", a.length_norm, "Rank beam hypotheses by log-prob / length");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sememe-informed definition modeling: data pipeline, training, decoding, BLEU",
               "semdef"};
  app.require_subcommand(1);

  AlignArgs align;
  auto* c_align = app.add_subcommand("align", "Attach sememe groups to definitions");
  c_align->add_option("--definitions", align.definitions, "JSON lines {word, definition}")->required();
  c_align->add_option("--lexicon", align.lexicon, "Headword lexicon, JSON lines {word, groups}")->required();
  c_align->add_option("--token-lexicon", align.token_lexicon, "Lexicon for definition tokens (default: --lexicon)");
  c_align->add_option("--function-words", align.function_words, "Headwords to drop, one per line");
  c_align->add_option("--pos-map", align.pos_map, "\"word pos\" lines");
  c_align->add_option("--exclude-pos", align.exclude_pos, "Parts of speech to drop")->delimiter(',');
  c_align->add_option("--out", align.out, "Output JSON lines (default: stdout)");

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Word-disjoint train/valid/test split");
  c_split->add_option("--data", split.data, "Entry JSON lines")->required();
  c_split->add_option("--out", split.out, "Directory for train/valid/test.jsonl")->required();
  c_split->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();
  c_split->add_option("--ratios", split.ratios, "Split ratios")->delimiter(',')->expected(3);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a model and write a checkpoint directory");
  c_train->add_option("--config", train.config, "key = value config file");
  c_train->add_option("--arch", train.arch, "baseline, aam or saam")
      ->check(CLI::IsMember({"baseline", "aam", "saam"}));
  c_train->add_option("--data", train.data, "Training entries")->required();
  c_train->add_option("--valid", train.valid, "Validation entries");
  c_train->add_option("--out", train.out, "Checkpoint directory")->required();
  c_train->add_option("--embeddings", train.embeddings, "Pretrained vectors (text format)");
  c_train->add_option("--seed", train.seed, "Seed for initialisation, dropout and batching");
  c_train->add_option("--set", train.overrides, "Override a config key (key=value)");
  c_train->add_flag("--no-position", train.no_position, "saam without encoder position embeddings");
  c_train->add_flag("--no-adaptive", train.no_adaptive, "saam with the plain encoder-decoder sublayer");
  c_train->add_flag("--no-sememes", train.no_sememes, "saam conditioned on the headword alone");

  DecodeArgs generate;
  auto* c_generate = app.add_subcommand("generate", "Generate one definition per input line");
  add_decode_flags(c_generate, generate);

  DecodeArgs inspect;
  auto* c_inspect = app.add_subcommand("inspect", "Dump gate and attention values per step as JSON lines");
  add_decode_flags(c_inspect, inspect);

  ScoreArgs score;
  auto* c_score = app.add_subcommand("score", "Corpus BLEU of candidate against reference lines");
  c_score->add_option("--cand", score.cand, "Candidate file")->required();
  c_score->add_option("--ref", score.ref, "Reference file")->required();
  c_score->add_flag("--verbose", score.verbose, "Print precisions and brevity penalty too");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*c_align) return do_align(align, out, err);
    if (*c_split) return do_split(split, out, err);
    if (*c_train) return do_train(train, out, err);
    if (*c_generate) return do_generate(generate, out, err);
    if (*c_inspect) return do_inspect(inspect, out, err);
    if (*c_score) return do_score(score, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace semdef::cli
