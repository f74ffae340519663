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
#ifndef SEMDEF_ATTENTION_ADAPTIVE_HPP_
#define SEMDEF_ATTENTION_ADAPTIVE_HPP_

#include <string>
#include <vector>

#include "semdef/core/graph.hpp"
#include "semdef/core/ops.hpp"
#include "semdef/nn/layers.hpp"

namespace semdef::attn {

template <typename T>
struct SememeAttention {
  Var<T> context;  // [1 x 2H]
  Var<T> alpha;    // [1 x N]
};

// alpha_n = softmax_n(w^T [h_n ; z_prev]), context = sum_n alpha_n h_n.
// h: [N x 2H], z_prev: [1 x d], w: [(2H + d) x 1].
template <typename T>
SememeAttention<T> sememe_soft_attention(Var<T> h, Var<T> z_prev, Var<T> w);

// sigmoid(W_g [y_prev ; z_prev] + b_g) * tanh(z_prev), all rows [1 x .].
template <typename T>
Var<T> lm_gate_context(Var<T> y_prev, Var<T> z_prev, const nn::Linear<T>& gate);

template <typename T>
struct AdaptiveContext {
  Var<T> c;      // beta * o + (1 - beta) * c_hat, [R x d]
  Var<T> beta;   // [R x 1]
  Var<T> alpha;  // attention behind c_hat (may be unset)
};

// Row-wise two-way softmax between e_o = w^T [o ; z_ref] and
// e_c = w^T [c_hat ; z_ref]. o, c_hat: [R x d]; z_ref: [R x d_z];
// w: [(d + d_z) x 1].
template <typename T>
AdaptiveContext<T> adaptive_mix(Var<T> o, Var<T> c_hat, Var<T> z_ref, Var<T> w);

template <typename T>
struct AdaptiveLayerOutput {
  Var<T> output;   // [t x d]
  Var<T> lm;       // o after residual + norm, [t x d]
  Var<T> sememe;   // c_hat, [t x d]
  Var<T> mixed;    // beta * o + (1 - beta) * c_hat, unset when ablated
  Var<T> beta;     // [t x 1], unset when ablated
  std::vector<Var<T>> self_weights;     // per head, [t x t]
  std::vector<Var<T>> encoder_weights;  // per head, [t x M]
};

// Decoder sublayer that mixes masked self-attention (o) with attention over
// the encoder (c_hat). With `ablate` set, the mix is replaced by the usual
// sequential composition LN(o + c_hat).
template <typename T>
class AdaptiveMultiHeadLayer {
 public:
  AdaptiveMultiHeadLayer(ParameterStore<T>& store, const std::string& name,
                         std::size_t dim, std::size_t heads, Rng& rng);

  // z: [t x d] decoder states from the layer below, positions 0..t-1.
  // enc: [M x d]. key_visible: M flags (empty = all visible).
  AdaptiveLayerOutput<T> operator()(Var<T> z, Var<T> enc,
                                    const std::vector<std::uint8_t>& key_visible,
                                    bool ablate) const;

  const nn::MultiHeadAttention<T>& self_attention() const { return self_; }
  const nn::MultiHeadAttention<T>& encoder_attention() const { return enc_; }
  Parameter<T>& mix_weight() const { return *w_c_; }

 private:
  nn::MultiHeadAttention<T> self_;
  nn::LayerNorm<T> self_norm_;
  nn::MultiHeadAttention<T> enc_;
  Parameter<T>* w_c_;
  nn::LayerNorm<T> out_norm_;
};

}  // namespace semdef::attn

#endif  // SEMDEF_ATTENTION_ADAPTIVE_HPP_
