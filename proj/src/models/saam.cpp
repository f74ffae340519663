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
#include <string>

#include "architectures.hpp"
#include "semdef/attention/adaptive.hpp"
#include "semdef/nn/layers.hpp"

namespace semdef::models {
namespace {

template <typename T>
struct EncoderLayer {
  nn::MultiHeadAttention<T> attn;
  nn::LayerNorm<T> attn_norm;
  nn::PositionWiseFfn<T> ffn;
  nn::LayerNorm<T> ffn_norm;
};

template <typename T>
struct DecoderLayer {
  attn::AdaptiveMultiHeadLayer<T> adaptive;
  nn::PositionWiseFfn<T> ffn;
  nn::LayerNorm<T> ffn_norm;
};

// Transformer encoder over [x ; s_1 .. s_N] and a decoder whose layers mix the
// language-model and sememe contexts.
template <typename T>
class Saam final : public Model<T> {
 public:
  Saam(const ModelConfig& config, VocabSizes sizes)
      : Model<T>(config, sizes),
        src_emb_(this->params_, "src_emb", sizes.source, config.d_model,
                 config.freeze_embeddings, this->init_rng_),
        tgt_emb_(this->params_, "tgt_emb", sizes.target, config.d_model,
                 config.freeze_embeddings, this->init_rng_),
        src_pos_(this->params_, "src_pos", config.max_sememes + 1, config.d_model,
                 this->init_rng_),
        tgt_pos_(this->params_, "tgt_pos", config.max_def_len, config.d_model,
                 this->init_rng_) {
    const std::size_t d = config.d_model;
    auto& p = this->params_;
    auto& rng = this->init_rng_;
    for (std::size_t l = 0; l < config.n_layer; ++l) {
      const std::string e = "enc" + std::to_string(l);
      encoder_.push_back(EncoderLayer<T>{
          nn::MultiHeadAttention<T>(p, e + ".attn", d, config.n_head, rng),
          nn::LayerNorm<T>(p, e + ".attn_norm", d),
          nn::PositionWiseFfn<T>(p, e + ".ffn", d, config.d_hidden, rng),
          nn::LayerNorm<T>(p, e + ".ffn_norm", d)});
    }
    for (std::size_t l = 0; l < config.n_layer; ++l) {
      const std::string n = "dec" + std::to_string(l);
      decoder_.push_back(DecoderLayer<T>{
          attn::AdaptiveMultiHeadLayer<T>(p, n, d, config.n_head, rng),
          nn::PositionWiseFfn<T>(p, n + ".ffn", d, config.d_hidden, rng),
          nn::LayerNorm<T>(p, n + ".ffn_norm", d)});
    }
    out_.emplace(p, "out", d, sizes.target, rng);
  }

  std::vector<Var<T>> encode(Graph<T>& g, const ModelInput& in) const override {
    const std::vector<TokenId> ids = slot_ids(in);
    const TokenId word[] = {in.word};
    this->check_ids(word, this->sizes_.source, "word");
    this->check_ids(ids, this->sizes_.source, "sememe");
    const auto visible = slot_visibility(in);
    const Mask mask = nn::key_mask(ids.size(), visible);
    Var<T> v = this->maybe_dropout(src_emb_.lookup(g, ids));
    v = src_pos_.add_to(v, this->config_.use_position);
    for (const auto& layer : encoder_) {
      const Var<T> a = layer.attn_norm(v + layer.attn(v, v, v, mask).output);
      v = layer.ffn_norm(a + layer.ffn(a));
    }
    return {v};
  }

  Var<T> decode(Graph<T>& g, const std::vector<Var<T>>& enc, const ModelInput& in,
                std::span<const TokenId> prefix,
                std::vector<TraceRecord>* trace) const override {
    if (enc.size() != 1) throw DimensionError("saam expects one encoder tensor");
    if (prefix.empty()) throw DimensionError("empty definition prefix");
    if (prefix.size() > this->config_.max_def_len) {
      throw DimensionError("definition prefix of " + std::to_string(prefix.size()) +
                           " tokens exceeds max_def_len " +
                           std::to_string(this->config_.max_def_len));
    }
    this->check_ids(prefix, this->sizes_.target, "target");
    const auto visible = slot_visibility(in);
    if (visible.size() != enc[0].rows()) throw DimensionError("encoder slots do not match input");
    Var<T> z = tgt_pos_.add_to(this->maybe_dropout(tgt_emb_.lookup(g, prefix)), true);
    for (std::size_t l = 0; l < decoder_.size(); ++l) {
      const auto& layer = decoder_[l];
      const auto a = layer.adaptive(z, enc[0], visible, !this->config_.use_adaptive);
      z = layer.ffn_norm(a.output + layer.ffn(a.output));
      if (trace) record(*trace, l, a, prefix.size());
    }
    return (*out_)(z);
  }

 private:
  std::vector<TokenId> slot_ids(const ModelInput& in) const {
    std::vector<TokenId> ids{in.word};
    if (!this->config_.use_sememes) return ids;
    if (in.visible_sememes().empty()) throw DataError("saam with sememes needs at least one sememe");
    ids.insert(ids.end(), in.sememes.begin(), in.sememes.end());
    if (ids.size() > src_pos_.capacity()) {
      throw DimensionError(std::to_string(in.sememes.size()) + " sememe slots exceed max_sememes " +
                           std::to_string(this->config_.max_sememes));
    }
    return ids;
  }

  std::vector<std::uint8_t> slot_visibility(const ModelInput& in) const {
    if (!this->config_.use_sememes) return {1};
    if (!in.sememe_visible.empty() && in.sememe_visible.size() != in.sememes.size()) {
      throw DimensionError("sememe mask does not match the sememe list");
    }
    std::vector<std::uint8_t> vis(in.sememes.size() + 1, 1);
    for (std::size_t i = 0; i < in.sememe_visible.size(); ++i) vis[i + 1] = in.sememe_visible[i];
    return vis;
  }

  static void record(std::vector<TraceRecord>& trace, std::size_t layer,
                     const attn::AdaptiveLayerOutput<T>& a, std::size_t steps) {
    const std::size_t heads = a.encoder_weights.size();
    const std::size_t slots = a.encoder_weights.front().cols();
    for (std::size_t t = 0; t < steps; ++t) {
      TraceRecord r{t, layer, std::nullopt, std::vector<double>(slots, 0.0)};
      if (a.beta.valid()) r.beta = static_cast<double>(a.beta.value().at(t, 0));
      for (const auto& w : a.encoder_weights)
        for (std::size_t j = 0; j < slots; ++j)
          r.alpha[j] += static_cast<double>(w.value().at(t, j)) / static_cast<double>(heads);
      trace.push_back(std::move(r));
    }
  }

  nn::EmbeddingTable<T> src_emb_;
  nn::EmbeddingTable<T> tgt_emb_;
  nn::PositionTable<T> src_pos_;
  nn::PositionTable<T> tgt_pos_;
  std::vector<EncoderLayer<T>> encoder_;
  std::vector<DecoderLayer<T>> decoder_;
  std::optional<nn::Linear<T>> out_;
};

}  // namespace

template <typename T>
std::unique_ptr<Model<T>> make_saam(const ModelConfig& config, VocabSizes sizes) {
  return std::make_unique<Saam<T>>(config, sizes);
}

template std::unique_ptr<Model<float>> make_saam(const ModelConfig&, VocabSizes);
template std::unique_ptr<Model<double>> make_saam(const ModelConfig&, VocabSizes);

}  // namespace semdef::models
