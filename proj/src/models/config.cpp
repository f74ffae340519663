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
#include "semdef/models/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "semdef/core/error.hpp"

namespace semdef::models {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw ConfigError("config key '" + key + "': '" + value + "' is not " + expected);
}

template <typename U>
U parse_uint(const std::string& key, const std::string& v) {
  U out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a finite number");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  const char* name;
  std::function<void(ModelConfig&, const std::string&)> set;
  std::function<std::string(const ModelConfig&)> get;
};

#define SIZE_FIELD(k)                                                               \
  Field{#k, [](ModelConfig& c, const std::string& v) { c.k = parse_uint<std::size_t>(#k, v); }, \
        [](const ModelConfig& c) { return std::to_string(c.k); }}
#define DOUBLE_FIELD(k)                                                             \
  Field{#k, [](ModelConfig& c, const std::string& v) { c.k = parse_double(#k, v); }, \
        [](const ModelConfig& c) { return fmt_double(c.k); }}
#define BOOL_FIELD(k)                                                               \
  Field{#k, [](ModelConfig& c, const std::string& v) { c.k = parse_bool(#k, v); },   \
        [](const ModelConfig& c) { return std::string(c.k ? "true" : "false"); }}

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      Field{"arch", [](ModelConfig& c, const std::string& v) { c.arch = parse_arch(v); },
            [](const ModelConfig& c) { return arch_name(c.arch); }},
      SIZE_FIELD(d_model), SIZE_FIELD(d_hidden), SIZE_FIELD(n_head), SIZE_FIELD(n_layer),
      SIZE_FIELD(rnn_layers), SIZE_FIELD(rnn_hidden), SIZE_FIELD(batch),
      DOUBLE_FIELD(lr), DOUBLE_FIELD(smoothing),
      BOOL_FIELD(use_sememes), BOOL_FIELD(use_position), BOOL_FIELD(use_adaptive),
      BOOL_FIELD(use_char_cnn),
      SIZE_FIELD(max_sememes), SIZE_FIELD(max_def_len),
      Field{"seed",
            [](ModelConfig& c, const std::string& v) { c.seed = parse_uint<std::uint64_t>("seed", v); },
            [](const ModelConfig& c) { return std::to_string(c.seed); }},
      SIZE_FIELD(char_dim), SIZE_FIELD(char_filters),
      Field{"char_widths",
            [](ModelConfig& c, const std::string& v) {
              c.char_widths.clear();
              std::stringstream ss(v);
              std::string item;
              while (std::getline(ss, item, ','))
                c.char_widths.push_back(parse_uint<std::size_t>("char_widths", trim(item)));
            },
            [](const ModelConfig& c) {
              std::string out;
              for (std::size_t i = 0; i < c.char_widths.size(); ++i)
                out += (i ? "," : "") + std::to_string(c.char_widths[i]);
              return out;
            }},
      BOOL_FIELD(freeze_embeddings), DOUBLE_FIELD(dropout), DOUBLE_FIELD(clip_norm),
      SIZE_FIELD(epochs), SIZE_FIELD(patience), SIZE_FIELD(max_steps),
      SIZE_FIELD(warmup_steps), DOUBLE_FIELD(adam_beta1), DOUBLE_FIELD(adam_beta2),
      DOUBLE_FIELD(adam_eps), SIZE_FIELD(min_count),
  };
  return table;
}

#undef SIZE_FIELD
#undef DOUBLE_FIELD
#undef BOOL_FIELD

const Field* find_field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.name) return &f;
  return nullptr;
}

}  // namespace

std::string arch_name(Arch arch) {
  switch (arch) {
    case Arch::kBaseline: return "baseline";
    case Arch::kAam: return "aam";
    case Arch::kSaam: return "saam";
  }
  return "?";
}

Arch parse_arch(const std::string& name) {
  if (name == "baseline") return Arch::kBaseline;
  if (name == "aam") return Arch::kAam;
  if (name == "saam") return Arch::kSaam;
  throw ConfigError("unknown architecture '" + name + "' (expected baseline, aam or saam)");
}

ModelConfig ModelConfig::defaults(Arch arch) {
  ModelConfig c;
  c.arch = arch;
  c.use_sememes = arch != Arch::kBaseline;
  c.use_position = arch == Arch::kSaam;
  c.use_adaptive = arch != Arch::kBaseline;
  c.use_char_cnn = arch == Arch::kBaseline;
  return c;
}

void ModelConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(d_model > 0 && d_hidden > 0 && n_head > 0 && n_layer > 0, "model sizes must be positive");
  need(d_model % n_head == 0, "d_model (" + std::to_string(d_model) +
                                  ") must be divisible by n_head (" + std::to_string(n_head) + ")");
  need(rnn_layers > 0 && rnn_hidden > 0, "recurrent sizes must be positive");
  need(batch > 0, "batch must be positive");
  need(lr > 0, "lr must be positive");
  need(smoothing >= 0 && smoothing < 1, "smoothing must lie in [0, 1)");
  need(dropout >= 0 && dropout < 1, "dropout must lie in [0, 1)");
  need(clip_norm >= 0, "clip_norm must be non-negative (0 disables clipping)");
  need(max_sememes > 0, "max_sememes must be positive");
  need(max_def_len >= 2, "max_def_len must leave room for BOS and one token");
  need(adam_beta1 >= 0 && adam_beta1 < 1 && adam_beta2 >= 0 && adam_beta2 < 1,
       "Adam betas must lie in [0, 1)");
  need(adam_eps > 0, "adam_eps must be positive");
  need(epochs > 0, "epochs must be positive");
  need(min_count > 0, "min_count must be positive");
  const std::string name = arch_name(arch);
  switch (arch) {
    case Arch::kBaseline:
      need(!use_sememes, "baseline has no sememe input; use_sememes must be false");
      need(!use_position, "use_position applies only to saam");
      need(!use_adaptive, "baseline has no adaptive attention; use_adaptive must be false");
      if (use_char_cnn) {
        need(char_dim > 0 && char_filters > 0 && !char_widths.empty(),
             "char CNN needs char_dim, char_filters and char_widths");
        for (std::size_t w : char_widths) need(w > 0, "char widths must be positive");
      }
      break;
    case Arch::kAam:
      need(use_sememes, "aam encodes sememes; use_sememes must be true");
      need(use_adaptive, "aam is adaptive by construction; use_adaptive must be true");
      need(!use_position, "use_position applies only to saam");
      need(!use_char_cnn, "use_char_cnn applies only to baseline");
      need(rnn_hidden % 2 == 0, "aam splits rnn_hidden across two directions; it must be even");
      break;
    case Arch::kSaam:
      need(!use_char_cnn, "use_char_cnn applies only to baseline");
      break;
  }
}

ConfigValues parse_config_text(const std::string& text, const std::string& source) {
  ConfigValues out;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source + ":" + std::to_string(no) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(no) + ": empty key");
    if (!find_field(key)) {
      throw ConfigError(source + ":" + std::to_string(no) + ": unknown key '" + key + "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

ConfigValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

ModelConfig make_config(const ConfigValues& values) {
  Arch arch = Arch::kSaam;
  for (const auto& [k, v] : values)
    if (k == "arch") arch = parse_arch(v);
  ModelConfig c = ModelConfig::defaults(arch);
  for (const auto& [k, v] : values) {
    const Field* f = find_field(k);
    if (!f) throw ConfigError("unknown config key '" + k + "'");
    if (k != "arch") f->set(c, v);
  }
  c.validate();
  return c;
}

std::string config_to_text(const ModelConfig& config) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.name) + " = " + f.get(config) + "\n";
  return out;
}

}  // namespace semdef::models
