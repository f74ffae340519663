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
#ifndef SEMDEF_MODELS_CHECKPOINT_HPP_
#define SEMDEF_MODELS_CHECKPOINT_HPP_

#include <filesystem>
#include <memory>

#include "semdef/data/vocab.hpp"
#include "semdef/models/model.hpp"

namespace semdef::models {

VocabSizes vocab_sizes(const data::Vocabularies& vocabs);

struct LoadedModel {
  ModelConfig config;
  data::Vocabularies vocabs;
  std::unique_ptr<Model<float>> model;
};

// Writes model.cfg, vocab.json and model.bin under `dir`, creating it.
void save_model_dir(const std::filesystem::path& dir, const Model<float>& model,
                    const data::Vocabularies& vocabs);
LoadedModel load_model_dir(const std::filesystem::path& dir);

// Copies vectors for the source and target vocabularies into `src_emb` and
// `tgt_emb`. Absent tokens get zero rows; their count is returned.
std::size_t load_pretrained_embeddings(Model<float>& model, const data::Vocabularies& vocabs,
                                       const std::filesystem::path& path);

}  // namespace semdef::models

#endif  // SEMDEF_MODELS_CHECKPOINT_HPP_
