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
#ifndef SEMDEF_NN_LAYERS_HPP_
#define SEMDEF_NN_LAYERS_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "semdef/core/graph.hpp"
#include "semdef/core/ops.hpp"
#include "semdef/core/parameter.hpp"

namespace semdef::nn {

// V x d lookup table. Frozen tables (fixed pretrained vectors) never change.
template <typename T>
class EmbeddingTable {
 public:
  EmbeddingTable(ParameterStore<T>& store, const std::string& name,
                 std::size_t vocab, std::size_t dim, bool frozen, Rng& rng);

  Var<T> lookup(Graph<T>& g, std::span<const TokenId> ids) const;

  std::size_t vocab_size() const { return table_->value.rows(); }
  std::size_t dim() const { return table_->value.cols(); }
  bool frozen() const { return table_->frozen; }
  Parameter<T>& parameter() const { return *table_; }

 private:
  Parameter<T>* table_;
};

// Learned (max_positions x d) table; row n is added to input slot n.
template <typename T>
class PositionTable {
 public:
  PositionTable(ParameterStore<T>& store, const std::string& name,
                std::size_t max_positions, std::size_t dim, Rng& rng);

  // v + rows [0, rows(v)) of the table, or v itself when disabled.
  Var<T> add_to(Var<T> v, bool enabled) const;

  std::size_t capacity() const { return table_->value.rows(); }
  Parameter<T>& parameter() const { return *table_; }

 private:
  Parameter<T>* table_;
};

// y = x W + b.
template <typename T>
class Linear {
 public:
  Linear(ParameterStore<T>& store, const std::string& name, std::size_t in,
         std::size_t out, Rng& rng, bool bias = true);

  Var<T> operator()(Var<T> x) const;

  Parameter<T>& weight() const { return *weight_; }
  Parameter<T>* bias() const { return bias_; }

 private:
  Parameter<T>* weight_;
  Parameter<T>* bias_ = nullptr;
};

template <typename T>
class LayerNorm {
 public:
  LayerNorm(ParameterStore<T>& store, const std::string& name, std::size_t dim);
  Var<T> operator()(Var<T> x) const;

 private:
  Parameter<T>* gain_;
  Parameter<T>* bias_;
};

// Character-level CNN word encoder: one bank of filters per width, tanh,
// max-pooled over time, banks concatenated in construction order.
template <typename T>
class CharCnn {
 public:
  CharCnn(ParameterStore<T>& store, const std::string& name,
          std::size_t charset_size, std::size_t char_dim,
          std::vector<std::size_t> widths, std::size_t filters, Rng& rng);

  // [1 x output_dim()]. Words shorter than a width are zero-padded.
  Var<T> operator()(Graph<T>& g, std::span<const TokenId> chars) const;

  std::size_t output_dim() const { return widths_.size() * filters_; }
  const std::vector<std::size_t>& widths() const { return widths_; }
  Parameter<T>& char_table() const { return chars_.parameter(); }
  Parameter<T>& filter(std::size_t bank) const { return *banks_[bank]; }
  Parameter<T>& filter_bias(std::size_t bank) const { return *bank_bias_[bank]; }

 private:
  EmbeddingTable<T> chars_;
  std::vector<std::size_t> widths_;
  std::size_t filters_;
  std::vector<Parameter<T>*> banks_;
  std::vector<Parameter<T>*> bank_bias_;
};

template <typename T>
struct LstmState {
  Var<T> h;  // [1 x H]
  Var<T> c;  // [1 x H]
};

// Standard LSTM cell with gate order (input, forget, candidate, output).
template <typename T>
class LstmCell {
 public:
  LstmCell(ParameterStore<T>& store, const std::string& name, std::size_t input,
           std::size_t hidden, Rng& rng);

  LstmState<T> zero_state(Graph<T>& g) const;
  LstmState<T> step(Var<T> x, const LstmState<T>& prev) const;
  // Same as step() with x W_x already computed ([1 x 4H]).
  LstmState<T> step_projected(Var<T> xw, const LstmState<T>& prev) const;
  // x W_x for a whole sequence at once: [N x in] -> [N x 4H].
  Var<T> project_inputs(Var<T> xs) const;

  std::size_t input_size() const { return input_w_->value.rows(); }
  std::size_t hidden_size() const { return hidden_; }
  Parameter<T>& input_weight() const { return *input_w_; }
  Parameter<T>& hidden_weight() const { return *hidden_w_; }
  Parameter<T>& bias() const { return *bias_; }

 private:
  std::size_t hidden_;
  Parameter<T>* input_w_;
  Parameter<T>* hidden_w_;
  Parameter<T>* bias_;
};

// Multi-layer LSTM; layer k+1 reads the hidden state of layer k.
template <typename T>
class StackedLstm {
 public:
  StackedLstm(ParameterStore<T>& store, const std::string& name,
              std::size_t input, std::size_t hidden, std::size_t layers,
              Rng& rng);

  std::vector<LstmState<T>> zero_state(Graph<T>& g) const;
  std::vector<LstmState<T>> step(Var<T> x,
                                 const std::vector<LstmState<T>>& prev) const;

  std::size_t layers() const { return cells_.size(); }
  const LstmCell<T>& cell(std::size_t k) const { return cells_[k]; }

 private:
  std::vector<LstmCell<T>> cells_;
};

// Bidirectional encoder: forward and backward LSTMs (separate weights) over
// the same inputs, concatenated per position as [fwd ; bwd].
template <typename T>
class BiLstmEncoder {
 public:
  BiLstmEncoder(ParameterStore<T>& store, const std::string& name,
                std::size_t input, std::size_t hidden_per_direction, Rng& rng);

  // [N x in] -> [N x 2H]. N = 0 is a DimensionError.
  Var<T> operator()(Var<T> v) const;

  std::size_t output_dim() const { return 2 * forward_.hidden_size(); }
  const LstmCell<T>& forward_cell() const { return forward_; }
  const LstmCell<T>& backward_cell() const { return backward_; }

 private:
  LstmCell<T> forward_;
  LstmCell<T> backward_;
};

// Causal mask for `n` query positions over the same `n` keys.
Mask causal_mask(std::size_t n);
// Every query row sees exactly the visible keys.
Mask key_mask(std::size_t queries, const std::vector<std::uint8_t>& key_visible);

template <typename T>
struct AttentionOutput {
  Var<T> output;                // [T x d]
  std::vector<Var<T>> weights;  // per head, [T x M]
};

// Scaled dot-product attention with `heads` heads of width d / heads, heads
// concatenated then projected.
template <typename T>
class MultiHeadAttention {
 public:
  MultiHeadAttention(ParameterStore<T>& store, const std::string& name,
                     std::size_t dim, std::size_t heads, Rng& rng);

  // queries [T x d], keys/values [M x d]; `visible` is T x M (empty = all).
  AttentionOutput<T> operator()(Var<T> queries, Var<T> keys, Var<T> values,
                                const Mask& visible) const;

  std::size_t heads() const { return heads_; }
  std::size_t dim() const { return dim_; }
  const Linear<T>& query_proj() const { return q_; }
  const Linear<T>& key_proj() const { return k_; }
  const Linear<T>& value_proj() const { return v_; }
  const Linear<T>& out_proj() const { return o_; }

 private:
  std::size_t dim_;
  std::size_t heads_;
  Linear<T> q_, k_, v_, o_;
};

// Linear -> ReLU -> Linear, applied to each row independently.
template <typename T>
class PositionWiseFfn {
 public:
  PositionWiseFfn(ParameterStore<T>& store, const std::string& name,
                  std::size_t dim, std::size_t hidden, Rng& rng);
  Var<T> operator()(Var<T> x) const;

  const Linear<T>& inner() const { return inner_; }
  const Linear<T>& outer() const { return outer_; }

 private:
  Linear<T> inner_;
  Linear<T> outer_;
};

template <typename T>
struct PretrainedVectors {
  Tensor<T> matrix;                  // one row per requested token
  std::vector<std::string> missing;  // tokens absent from the file (zero rows)
};

// Text embeddings: "token v1 ... vd" per line, optional "V d" header line.
// Rows follow the order of `tokens`.
template <typename T>
PretrainedVectors<T> load_pretrained_vectors(const std::filesystem::path& path,
                                             std::span<const std::string> tokens,
                                             std::size_t dim);

}  // namespace semdef::nn

#endif  // SEMDEF_NN_LAYERS_HPP_
