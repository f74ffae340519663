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
#include "semdef/attention/adaptive.hpp"
#include "semdef/nn/layers.hpp"

namespace semdef::models {
namespace {

// Bi-LSTM over [x ; s_n] and an LSTM decoder driven by the adaptive context.
template <typename T>
class Aam final : public Model<T> {
 public:
  Aam(const ModelConfig& config, VocabSizes sizes)
      : Model<T>(config, sizes),
        src_emb_(this->params_, "src_emb", sizes.source, config.d_model,
                 config.freeze_embeddings, this->init_rng_),
        tgt_emb_(this->params_, "tgt_emb", sizes.target, config.d_model,
                 config.freeze_embeddings, this->init_rng_) {
    const std::size_t h = config.rnn_hidden;
    encoder_.emplace(this->params_, "encoder", 2 * config.d_model, h / 2, this->init_rng_);
    w_sememe_ = &this->params_.add("w_sememe", xavier_uniform<T>(2 * h, 1, this->init_rng_));
    gate_.emplace(this->params_, "gate", config.d_model + h, h, this->init_rng_);
    w_mix_ = &this->params_.add("w_mix", xavier_uniform<T>(2 * h, 1, this->init_rng_));
    decoder_.emplace(this->params_, "decoder", config.d_model + h, h, config.rnn_layers,
                     this->init_rng_);
    out_.emplace(this->params_, "out", 2 * h, sizes.target, this->init_rng_);
  }

  std::vector<Var<T>> encode(Graph<T>& g, const ModelInput& in) const override {
    const std::vector<TokenId> sememes = in.visible_sememes();
    if (sememes.empty()) throw DataError("aam needs at least one sememe");
    const TokenId word[] = {in.word};
    this->check_ids(word, this->sizes_.source, "word");
    this->check_ids(sememes, this->sizes_.source, "sememe");
    Var<T> x = this->maybe_dropout(src_emb_.lookup(g, word));
    Var<T> s = this->maybe_dropout(src_emb_.lookup(g, sememes));
    Var<T> v = concat_cols({repeat_rows(x, sememes.size()), s});
    return {(*encoder_)(v)};
  }

  Var<T> decode(Graph<T>& g, const std::vector<Var<T>>& enc, const ModelInput&,
                std::span<const TokenId> prefix,
                std::vector<TraceRecord>* trace) const override {
    if (enc.size() != 1) throw DimensionError("aam expects one encoder tensor");
    if (prefix.empty()) throw DimensionError("empty definition prefix");
    this->check_ids(prefix, this->sizes_.target, "target");
    const Var<T> h = enc[0];
    const Var<T> w_sememe = g.parameter(*w_sememe_);
    const Var<T> w_mix = g.parameter(*w_mix_);
    Var<T> ys = this->maybe_dropout(tgt_emb_.lookup(g, prefix));
    auto state = decoder_->zero_state(g);
    std::vector<Var<T>> rows;
    for (std::size_t t = 0; t < prefix.size(); ++t) {
      const Var<T> y = slice_rows(ys, t, 1);
      const Var<T> z_prev = state.back().h;
      const auto sem = attn::sememe_soft_attention(h, z_prev, w_sememe);
      const Var<T> o = attn::lm_gate_context(y, z_prev, *gate_);
      Var<T> c;
      std::optional<double> beta;
      if (this->forced_beta_) {
        const T b = static_cast<T>(*this->forced_beta_);
        c = affine(o, b) + affine(sem.context, T{1} - b);
        beta = *this->forced_beta_;
      } else {
        const auto mix = attn::adaptive_mix(o, sem.context, z_prev, w_mix);
        c = mix.c;
        beta = static_cast<double>(mix.beta.value()[0]);
      }
      state = decoder_->step(concat_cols({y, c}), state);
      rows.push_back(concat_cols({state.back().h, c}));
      if (trace) {
        const auto& a = sem.alpha.value();
        trace->push_back(TraceRecord{t, 0, beta, std::vector<double>(a.data().begin(), a.data().end())});
      }
    }
    return (*out_)(concat_rows(std::span<const Var<T>>(rows)));
  }

 private:
  nn::EmbeddingTable<T> src_emb_;
  nn::EmbeddingTable<T> tgt_emb_;
  std::optional<nn::BiLstmEncoder<T>> encoder_;
  Parameter<T>* w_sememe_ = nullptr;
  std::optional<nn::Linear<T>> gate_;
  Parameter<T>* w_mix_ = nullptr;
  std::optional<nn::StackedLstm<T>> decoder_;
  std::optional<nn::Linear<T>> out_;
};

}  // namespace

template <typename T>
std::unique_ptr<Model<T>> make_aam(const ModelConfig& config, VocabSizes sizes) {
  return std::make_unique<Aam<T>>(config, sizes);
}

template std::unique_ptr<Model<float>> make_aam(const ModelConfig&, VocabSizes);
template std::unique_ptr<Model<double>> make_aam(const ModelConfig&, VocabSizes);

}  // namespace semdef::models
