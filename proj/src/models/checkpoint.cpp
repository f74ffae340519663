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
#include "semdef/models/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "semdef/core/checkpoint.hpp"
#include "semdef/core/error.hpp"
#include "semdef/nn/layers.hpp"

namespace semdef::models {

VocabSizes vocab_sizes(const data::Vocabularies& vocabs) {
  return VocabSizes{vocabs.source.size(), vocabs.target.size(), vocabs.chars.size()};
}

void save_model_dir(const std::filesystem::path& dir, const Model<float>& model,
                    const data::Vocabularies& vocabs) {
  const VocabSizes want = vocab_sizes(vocabs), have = model.vocab_sizes();
  if (want.source != have.source || want.target != have.target || want.chars != have.chars) {
    throw ConfigError("vocabularies do not match the model");
  }
  std::filesystem::create_directories(dir);
  {
    std::ofstream cfg(dir / "model.cfg");
    cfg << config_to_text(model.config());
    if (!cfg) throw DataError("cannot write " + (dir / "model.cfg").string());
  }
  data::save_vocabularies(dir / "vocab.json", vocabs);
  save_parameters_file(dir / "model.bin", model.params());
}

LoadedModel load_model_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("no checkpoint directory " + dir.string());
  LoadedModel out;
  out.config = make_config(read_config_file(dir / "model.cfg"));
  out.vocabs = data::load_vocabularies(dir / "vocab.json");
  out.model = make_model<float>(out.config, vocab_sizes(out.vocabs));
  load_parameters_file(dir / "model.bin", out.model->params());
  return out;
}

namespace {

std::size_t fill_table(Parameter<float>& table, const data::Vocab& vocab,
                       const std::filesystem::path& path) {
  const std::vector<std::string>& all = vocab.tokens();
  const std::vector<std::string> words(all.begin() + kNumSpecials, all.end());
  const auto vectors = nn::load_pretrained_vectors<float>(path, words, table.value.cols());
  for (std::size_t r = 0; r < words.size(); ++r)
    for (std::size_t c = 0; c < table.value.cols(); ++c)
      table.value.at(r + kNumSpecials, c) = vectors.matrix.at(r, c);
  return vectors.missing.size();
}

}  // namespace

std::size_t load_pretrained_embeddings(Model<float>& model, const data::Vocabularies& vocabs,
                                       const std::filesystem::path& path) {
  auto& params = model.params();
  return fill_table(params.at("src_emb"), vocabs.source, path) +
         fill_table(params.at("tgt_emb"), vocabs.target, path);
}

}  // namespace semdef::models
