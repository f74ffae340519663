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
#ifndef SEMDEF_MODELS_MODEL_HPP_
#define SEMDEF_MODELS_MODEL_HPP_

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "semdef/core/error.hpp"
#include "semdef/core/graph.hpp"
#include "semdef/core/ops.hpp"
#include "semdef/core/parameter.hpp"
#include "semdef/data/batch.hpp"
#include "semdef/models/config.hpp"

namespace semdef::models {

// Everything a model conditions on besides the definition prefix.
struct ModelInput {
  TokenId word = kUnk;
  std::vector<TokenId> chars;
  std::vector<TokenId> sememes;
  // One flag per sememe; empty means all visible.
  std::vector<std::uint8_t> sememe_visible;

  // Visible sememes in order.
  std::vector<TokenId> visible_sememes() const;
};

ModelInput input_from_example(const data::Example& ex);
ModelInput input_from_batch(const data::Batch& batch, std::size_t b);

// One attention snapshot: decoder step t, layer, gate value and attention
// over the encoder slots. beta is absent when the model has no gate.
struct TraceRecord {
  std::size_t t = 0;
  std::size_t layer = 0;
  std::optional<double> beta;
  std::vector<double> alpha;
};

struct VocabSizes {
  std::size_t source = 0;
  std::size_t target = 0;
  std::size_t chars = 0;
};

template <typename T>
class Model {
 public:
  Model(const ModelConfig& config, VocabSizes sizes);
  virtual ~Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  // Encoder-side tensors, built on `g`.
  virtual std::vector<Var<T>> encode(Graph<T>& g, const ModelInput& in) const = 0;
  // Teacher-forced logits [prefix.size() x V]; row t predicts the token after
  // prefix[t]. `enc` must live on `g`.
  virtual Var<T> decode(Graph<T>& g, const std::vector<Var<T>>& enc, const ModelInput& in,
                        std::span<const TokenId> prefix,
                        std::vector<TraceRecord>* trace = nullptr) const = 0;

  Var<T> logits(Graph<T>& g, const ModelInput& in, std::span<const TokenId> prefix,
                std::vector<TraceRecord>* trace = nullptr) const {
    return decode(g, encode(g, in), in, prefix, trace);
  }

  const ModelConfig& config() const { return config_; }
  const VocabSizes& vocab_sizes() const { return sizes_; }
  ParameterStore<T>& params() { return params_; }
  const ParameterStore<T>& params() const { return params_; }

  // Dropout is active only while training.
  void set_training(bool on) { training_ = on; }
  bool training() const { return training_; }

  // Pins the adaptive gate to a constant (AAM only; ignored elsewhere).
  void force_beta(std::optional<double> beta) { forced_beta_ = beta; }

 protected:
  Var<T> maybe_dropout(Var<T> x) const;
  void check_ids(std::span<const TokenId> ids, std::size_t vocab, const char* what) const;

  ModelConfig config_;
  VocabSizes sizes_;
  ParameterStore<T> params_;
  mutable Rng init_rng_;
  mutable Rng dropout_rng_;
  bool training_ = false;
  std::optional<double> forced_beta_;
};

// Builds an architecture per `config.arch` with freshly initialised weights.
template <typename T>
std::unique_ptr<Model<T>> make_model(const ModelConfig& config, VocabSizes sizes);

// Copies parameter values between models of identical layout, converting
// precision as needed.
template <typename T, typename U>
void copy_parameters(const Model<T>& from, Model<U>& to) {
  const auto& src = from.params();
  auto& dst = to.params();
  if (src.size() != dst.size()) throw ConfigError("parameter layouts differ");
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i].name != dst[i].name || src[i].value.shape() != dst[i].value.shape()) {
      throw ConfigError("parameter '" + src[i].name + "' does not match '" + dst[i].name + "'");
    }
    dst[i].value = src[i].value.template cast<U>();
  }
}

extern template class Model<float>;
extern template class Model<double>;

}  // namespace semdef::models

#endif  // SEMDEF_MODELS_MODEL_HPP_
