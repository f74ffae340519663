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
#include "semdef/attention/adaptive.hpp"

namespace semdef::attn {

template <typename T>
SememeAttention<T> sememe_soft_attention(Var<T> h, Var<T> z_prev, Var<T> w) {
  const std::size_t n = h.rows();
  if (z_prev.rows() != 1) throw DimensionError("sememe attention expects one decoder state");
  if (w.rows() != h.cols() + z_prev.cols() || w.cols() != 1) {
    throw DimensionError("sememe attention weight has shape " + shape_str(w.shape()));
  }
  Var<T> scores = matmul(concat_cols({h, repeat_rows(z_prev, n)}), w);
  Var<T> alpha = softmax(reshape(scores, {1, n}));
  return {matmul(alpha, h), alpha};
}

template <typename T>
Var<T> lm_gate_context(Var<T> y_prev, Var<T> z_prev, const nn::Linear<T>& gate) {
  Var<T> g = sigmoid(gate(concat_cols({y_prev, z_prev})));
  return mul(g, tanh(z_prev));
}

template <typename T>
AdaptiveContext<T> adaptive_mix(Var<T> o, Var<T> c_hat, Var<T> z_ref, Var<T> w) {
  if (o.shape() != c_hat.shape()) {
    throw DimensionError("adaptive mix of " + shape_str(o.shape()) + " and " +
                         shape_str(c_hat.shape()));
  }
  if (z_ref.rows() != o.rows()) throw DimensionError("adaptive mix reference rows differ");
  if (w.rows() != o.cols() + z_ref.cols() || w.cols() != 1) {
    throw DimensionError("adaptive mix weight has shape " + shape_str(w.shape()));
  }
  Var<T> e_o = matmul(concat_cols({o, z_ref}), w);
  Var<T> e_c = matmul(concat_cols({c_hat, z_ref}), w);
  // exp(e_o) / (exp(e_o) + exp(e_c)).
  Var<T> beta = sigmoid(sub(e_o, e_c));
  Var<T> c = add(scale_rows(o, beta), scale_rows(c_hat, affine(beta, T{-1}, T{1})));
  return {c, beta, Var<T>{}};
}

template <typename T>
AdaptiveMultiHeadLayer<T>::AdaptiveMultiHeadLayer(ParameterStore<T>& store,
                                                  const std::string& name,
                                                  std::size_t dim, std::size_t heads,
                                                  Rng& rng)
    : self_(store, name + ".self", dim, heads, rng),
      self_norm_(store, name + ".self_norm", dim),
      enc_(store, name + ".enc", dim, heads, rng),
      w_c_(&store.add(name + ".w_c", xavier_uniform<T>(2 * dim, 1, rng))),
      out_norm_(store, name + ".out_norm", dim) {}

template <typename T>
AdaptiveLayerOutput<T> AdaptiveMultiHeadLayer<T>::operator()(
    Var<T> z, Var<T> enc, const std::vector<std::uint8_t>& key_visible,
    bool ablate) const {
  const std::size_t t = z.rows();
  if (!key_visible.empty() && key_visible.size() != enc.rows()) {
    throw DimensionError("encoder mask has " + std::to_string(key_visible.size()) +
                         " flags for " + std::to_string(enc.rows()) + " slots");
  }
  AdaptiveLayerOutput<T> out;
  auto self = self_(z, z, z, nn::causal_mask(t));
  out.self_weights = std::move(self.weights);
  out.lm = self_norm_(add(z, self.output));
  const Mask enc_mask = key_visible.empty() ? Mask{} : nn::key_mask(t, key_visible);
  auto cross = enc_(out.lm, enc, enc, enc_mask);
  out.encoder_weights = std::move(cross.weights);
  out.sememe = cross.output;
  if (ablate) {
    out.output = out_norm_(add(out.lm, out.sememe));
    return out;
  }
  Graph<T>& g = z.graph();
  auto mix = adaptive_mix(out.lm, out.sememe, z, g.parameter(*w_c_));
  out.mixed = mix.c;
  out.beta = mix.beta;
  out.output = out_norm_(add(z, mix.c));
  return out;
}

#define SEMDEF_INSTANTIATE_ADAPTIVE(T)                                          \
  template SememeAttention<T> sememe_soft_attention(Var<T>, Var<T>, Var<T>);    \
  template Var<T> lm_gate_context(Var<T>, Var<T>, const nn::Linear<T>&);        \
  template AdaptiveContext<T> adaptive_mix(Var<T>, Var<T>, Var<T>, Var<T>);     \
  template class AdaptiveMultiHeadLayer<T>;

SEMDEF_INSTANTIATE_ADAPTIVE(float)
SEMDEF_INSTANTIATE_ADAPTIVE(double)

#undef SEMDEF_INSTANTIATE_ADAPTIVE

}  // namespace semdef::attn
