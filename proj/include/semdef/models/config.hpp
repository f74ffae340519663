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
#ifndef SEMDEF_MODELS_CONFIG_HPP_
#define SEMDEF_MODELS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace semdef::models {

enum class Arch { kBaseline, kAam, kSaam };

std::string arch_name(Arch arch);
Arch parse_arch(const std::string& name);

struct ModelConfig {
  Arch arch = Arch::kSaam;

  std::size_t d_model = 300;
  std::size_t d_hidden = 2048;
  std::size_t n_head = 5;
  std::size_t n_layer = 6;
  std::size_t rnn_layers = 2;
  std::size_t rnn_hidden = 300;

  std::size_t batch = 128;
  double lr = 1e-3;
  double smoothing = 0.1;

  bool use_sememes = true;
  bool use_position = true;
  bool use_adaptive = true;
  bool use_char_cnn = false;

  std::size_t max_sememes = 32;
  // Longest decoder prefix, BOS included.
  std::size_t max_def_len = 64;
  std::uint64_t seed = 1;

  std::size_t char_dim = 32;
  std::size_t char_filters = 100;
  std::vector<std::size_t> char_widths{2, 3, 4};
  bool freeze_embeddings = true;
  double dropout = 0.0;

  double clip_norm = 5.0;
  std::size_t epochs = 100;
  std::size_t patience = 20;
  std::size_t max_steps = 0;  // 0: no limit
  std::size_t warmup_steps = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t min_count = 1;

  // Architecture defaults for the ablation flags.
  static ModelConfig defaults(Arch arch);
  // Throws ConfigError on out-of-range values or flags that do not apply to
  // the architecture.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

// Ordered `key = value` pairs.
using ConfigValues = std::vector<std::pair<std::string, std::string>>;

// Flat `key = value` lines; `#` starts a comment.
ConfigValues parse_config_text(const std::string& text, const std::string& source = "<config>");
ConfigValues read_config_file(const std::filesystem::path& path);

// Starts from the defaults of the `arch` value (last one wins, saam when
// absent), applies every other key in order and validates. Unknown keys are
// ConfigErrors.
ModelConfig make_config(const ConfigValues& values);

// Every key, one per line; make_config(parse_config_text(..)) restores it.
std::string config_to_text(const ModelConfig& config);

}  // namespace semdef::models

#endif  // SEMDEF_MODELS_CONFIG_HPP_
