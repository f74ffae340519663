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
#include "semdef/models/model.hpp"

#include "architectures.hpp"

namespace semdef::models {

std::vector<TokenId> ModelInput::visible_sememes() const {
  if (sememe_visible.empty()) return sememes;
  std::vector<TokenId> out;
  for (std::size_t i = 0; i < sememes.size(); ++i)
    if (sememe_visible.at(i)) out.push_back(sememes[i]);
  return out;
}

ModelInput input_from_example(const data::Example& ex) {
  return ModelInput{ex.word, ex.chars, ex.sememes, {}};
}

ModelInput input_from_batch(const data::Batch& batch, std::size_t b) {
  if (b >= batch.size) throw DimensionError("batch row out of range");
  ModelInput in;
  in.word = batch.words[b];
  in.chars = batch.chars[b];
  const auto ids = batch.sememe_row(b);
  const auto mask = batch.sememe_mask_row(b);
  in.sememes.assign(ids.begin(), ids.end());
  in.sememe_visible.assign(mask.begin(), mask.end());
  return in;
}

template <typename T>
Model<T>::Model(const ModelConfig& config, VocabSizes sizes)
    : config_(config), sizes_(sizes), init_rng_(config.seed),
      dropout_rng_(config.seed ^ 0xD1B54A32D192ED03ull) {
  config_.validate();
  if (sizes_.source <= kNumSpecials || sizes_.target <= kNumSpecials) {
    throw ConfigError("source and target vocabularies need at least one non-special token");
  }
}

template <typename T>
Var<T> Model<T>::maybe_dropout(Var<T> x) const {
  if (!training_ || config_.dropout == 0.0) return x;
  return dropout(x, config_.dropout, dropout_rng_);
}

template <typename T>
void Model<T>::check_ids(std::span<const TokenId> ids, std::size_t vocab, const char* what) const {
  for (TokenId id : ids) {
    if (id >= vocab) {
      throw DataError(std::string(what) + " id " + std::to_string(id) +
                      " outside vocabulary of size " + std::to_string(vocab));
    }
  }
}

template <typename T>
std::unique_ptr<Model<T>> make_model(const ModelConfig& config, VocabSizes sizes) {
  config.validate();
  switch (config.arch) {
    case Arch::kBaseline: return make_baseline<T>(config, sizes);
    case Arch::kAam: return make_aam<T>(config, sizes);
    case Arch::kSaam: return make_saam<T>(config, sizes);
  }
  throw ConfigError("unknown architecture");
}

template class Model<float>;
template class Model<double>;
template std::unique_ptr<Model<float>> make_model(const ModelConfig&, VocabSizes);
template std::unique_ptr<Model<double>> make_model(const ModelConfig&, VocabSizes);

}  // namespace semdef::models
