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
#include <optional>

#include "architectures.hpp"
#include "semdef/nn/layers.hpp"

namespace semdef::models {
namespace {

// Two-layer LSTM language model seeded with the headword (and its
// character-level features) as the step-0 input.
template <typename T>
class Baseline final : public Model<T> {
 public:
  Baseline(const ModelConfig& config, VocabSizes sizes)
      : Model<T>(config, sizes),
        src_emb_(this->params_, "src_emb", sizes.source, config.d_model,
                 config.freeze_embeddings, this->init_rng_),
        tgt_emb_(this->params_, "tgt_emb", sizes.target, config.d_model,
                 config.freeze_embeddings, this->init_rng_) {
    std::size_t seed_in = config.d_model;
    if (config.use_char_cnn) {
      if (sizes.chars <= kNumSpecials) throw ConfigError("char CNN needs a character vocabulary");
      char_cnn_.emplace(this->params_, "char_cnn", sizes.chars, config.char_dim,
                        config.char_widths, config.char_filters, this->init_rng_);
      seed_in += char_cnn_->output_dim();
    }
    seed_.emplace(this->params_, "seed", seed_in, config.d_model, this->init_rng_);
    decoder_.emplace(this->params_, "decoder", config.d_model, config.rnn_hidden,
                     config.rnn_layers, this->init_rng_);
    out_.emplace(this->params_, "out", config.rnn_hidden, sizes.target, this->init_rng_);
  }

  std::vector<Var<T>> encode(Graph<T>& g, const ModelInput& in) const override {
    const TokenId word[] = {in.word};
    this->check_ids(word, this->sizes_.source, "word");
    Var<T> x = this->maybe_dropout(src_emb_.lookup(g, word));
    if (char_cnn_) {
      this->check_ids(in.chars, this->sizes_.chars, "character");
      x = concat_cols({x, (*char_cnn_)(g, in.chars)});
    }
    return {(*seed_)(x)};
  }

  Var<T> decode(Graph<T>& g, const std::vector<Var<T>>& enc, const ModelInput&,
                std::span<const TokenId> prefix, std::vector<TraceRecord>*) const override {
    if (enc.size() != 1) throw DimensionError("baseline expects one encoder tensor");
    if (prefix.empty()) throw DimensionError("empty definition prefix");
    this->check_ids(prefix, this->sizes_.target, "target");
    auto state = decoder_->step(enc[0], decoder_->zero_state(g));
    Var<T> ys = this->maybe_dropout(tgt_emb_.lookup(g, prefix));
    std::vector<Var<T>> hs;
    for (std::size_t t = 0; t < prefix.size(); ++t) {
      state = decoder_->step(slice_rows(ys, t, 1), state);
      hs.push_back(state.back().h);
    }
    return (*out_)(concat_rows(std::span<const Var<T>>(hs)));
  }

 private:
  nn::EmbeddingTable<T> src_emb_;
  nn::EmbeddingTable<T> tgt_emb_;
  std::optional<nn::CharCnn<T>> char_cnn_;
  std::optional<nn::Linear<T>> seed_;
  std::optional<nn::StackedLstm<T>> decoder_;
  std::optional<nn::Linear<T>> out_;
};

}  // namespace

template <typename T>
std::unique_ptr<Model<T>> make_baseline(const ModelConfig& config, VocabSizes sizes) {
  return std::make_unique<Baseline<T>>(config, sizes);
}

template std::unique_ptr<Model<float>> make_baseline(const ModelConfig&, VocabSizes);
template std::unique_ptr<Model<double>> make_baseline(const ModelConfig&, VocabSizes);

}  // namespace semdef::models
