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
#include "semdef/nn/layers.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace semdef::nn {

template <typename T>
EmbeddingTable<T>::EmbeddingTable(ParameterStore<T>& store,
                                  const std::string& name, std::size_t vocab,
                                  std::size_t dim, bool frozen, Rng& rng)
    : table_(&store.add(name,
                        normal_tensor<T>({vocab, dim},
                                         1.0 / std::sqrt(static_cast<double>(dim)),
                                         rng),
                        frozen)) {}

template <typename T>
Var<T> EmbeddingTable<T>::lookup(Graph<T>& g, std::span<const TokenId> ids) const {
  return semdef::lookup(g, *table_, ids);
}

template <typename T>
PositionTable<T>::PositionTable(ParameterStore<T>& store, const std::string& name,
                                std::size_t max_positions, std::size_t dim,
                                Rng& rng)
    : table_(&store.add(name,
                        normal_tensor<T>({max_positions, dim},
                                         1.0 / std::sqrt(static_cast<double>(dim)),
                                         rng))) {}

template <typename T>
Var<T> PositionTable<T>::add_to(Var<T> v, bool enabled) const {
  const std::size_t n = v.rows();
  if (n > capacity()) {
    throw DimensionError("sequence of " + std::to_string(n) +
                         " slots exceeds position table of " +
                         std::to_string(capacity()));
  }
  if (v.cols() != table_->value.cols()) {
    throw DimensionError("position table width does not match input");
  }
  if (!enabled) return v;
  return add(v, slice_rows(v.graph().parameter(*table_), 0, n));
}

template <typename T>
Linear<T>::Linear(ParameterStore<T>& store, const std::string& name,
                  std::size_t in, std::size_t out, Rng& rng, bool bias)
    : weight_(&store.add(name + ".weight", xavier_uniform<T>(in, out, rng))) {
  if (bias) bias_ = &store.add(name + ".bias", Tensor<T>({out}));
}

template <typename T>
Var<T> Linear<T>::operator()(Var<T> x) const {
  Graph<T>& g = x.graph();
  Var<T> y = matmul(x, g.parameter(*weight_));
  if (bias_) y = add_bias(y, g.parameter(*bias_));
  return y;
}

template <typename T>
LayerNorm<T>::LayerNorm(ParameterStore<T>& store, const std::string& name,
                        std::size_t dim)
    : gain_(&store.add(name + ".gain", Tensor<T>({dim}, T{1}))),
      bias_(&store.add(name + ".bias", Tensor<T>({dim}))) {}

template <typename T>
Var<T> LayerNorm<T>::operator()(Var<T> x) const {
  Graph<T>& g = x.graph();
  return layer_norm(x, g.parameter(*gain_), g.parameter(*bias_));
}

template <typename T>
CharCnn<T>::CharCnn(ParameterStore<T>& store, const std::string& name,
                    std::size_t charset_size, std::size_t char_dim,
                    std::vector<std::size_t> widths, std::size_t filters,
                    Rng& rng)
    : chars_(store, name + ".chars", charset_size, char_dim, false, rng),
      widths_(std::move(widths)),
      filters_(filters) {
  if (widths_.empty() || filters_ == 0) {
    throw ConfigError("char CNN needs at least one width and one filter");
  }
  for (std::size_t w : widths_) {
    if (w == 0) throw ConfigError("char CNN width must be positive");
    const std::string bank = name + ".w" + std::to_string(w);
    banks_.push_back(
        &store.add(bank + ".weight", xavier_uniform<T>(w * char_dim, filters_, rng)));
    bank_bias_.push_back(&store.add(bank + ".bias", Tensor<T>({filters_})));
  }
}

template <typename T>
Var<T> CharCnn<T>::operator()(Graph<T>& g, std::span<const TokenId> chars) const {
  if (chars.empty()) throw DimensionError("char CNN needs at least one character");
  Var<T> emb = chars_.lookup(g, chars);
  std::vector<Var<T>> pooled;
  pooled.reserve(widths_.size());
  for (std::size_t k = 0; k < widths_.size(); ++k) {
    const std::size_t w = widths_[k];
    Var<T> seq = emb;
    if (seq.rows() < w) {
      seq = concat_rows({seq, g.constant(Tensor<T>({w - seq.rows(), seq.cols()}))});
    }
    Var<T> windows = unfold_rows(seq, w);
    Var<T> conv = add_bias(matmul(windows, g.parameter(*banks_[k])),
                           g.parameter(*bank_bias_[k]));
    pooled.push_back(max_rows(tanh(conv)));
  }
  return concat_cols(std::span<const Var<T>>(pooled));
}

template <typename T>
LstmCell<T>::LstmCell(ParameterStore<T>& store, const std::string& name,
                      std::size_t input, std::size_t hidden, Rng& rng)
    : hidden_(hidden),
      input_w_(&store.add(name + ".input_weight",
                          xavier_uniform<T>(input, 4 * hidden, rng))),
      hidden_w_(&store.add(name + ".hidden_weight",
                           xavier_uniform<T>(hidden, 4 * hidden, rng))),
      bias_(&store.add(name + ".bias", Tensor<T>({4 * hidden}))) {
  // Forget gate starts open.
  for (std::size_t j = hidden; j < 2 * hidden; ++j) bias_->value[j] = T{1};
}

template <typename T>
LstmState<T> LstmCell<T>::zero_state(Graph<T>& g) const {
  return {g.constant(Tensor<T>({1, hidden_})), g.constant(Tensor<T>({1, hidden_}))};
}

template <typename T>
Var<T> LstmCell<T>::project_inputs(Var<T> xs) const {
  return matmul(xs, xs.graph().parameter(*input_w_));
}

template <typename T>
LstmState<T> LstmCell<T>::step(Var<T> x, const LstmState<T>& prev) const {
  return step_projected(project_inputs(x), prev);
}

template <typename T>
LstmState<T> LstmCell<T>::step_projected(Var<T> xw, const LstmState<T>& prev) const {
  Graph<T>& g = xw.graph();
  const std::size_t H = hidden_;
  Var<T> pre = add_bias(add(xw, matmul(prev.h, g.parameter(*hidden_w_))),
                        g.parameter(*bias_));
  Var<T> i = sigmoid(slice_cols(pre, 0, H));
  Var<T> f = sigmoid(slice_cols(pre, H, H));
  Var<T> cand = tanh(slice_cols(pre, 2 * H, H));
  Var<T> o = sigmoid(slice_cols(pre, 3 * H, H));
  Var<T> c = add(mul(f, prev.c), mul(i, cand));
  Var<T> h = mul(o, tanh(c));
  return {h, c};
}

template <typename T>
StackedLstm<T>::StackedLstm(ParameterStore<T>& store, const std::string& name,
                            std::size_t input, std::size_t hidden,
                            std::size_t layers, Rng& rng) {
  if (layers == 0) throw ConfigError("LSTM needs at least one layer");
  for (std::size_t k = 0; k < layers; ++k) {
    cells_.emplace_back(store, name + ".l" + std::to_string(k),
                        k == 0 ? input : hidden, hidden, rng);
  }
}

template <typename T>
std::vector<LstmState<T>> StackedLstm<T>::zero_state(Graph<T>& g) const {
  std::vector<LstmState<T>> s;
  for (const auto& cell : cells_) s.push_back(cell.zero_state(g));
  return s;
}

template <typename T>
std::vector<LstmState<T>> StackedLstm<T>::step(
    Var<T> x, const std::vector<LstmState<T>>& prev) const {
  std::vector<LstmState<T>> next;
  next.reserve(cells_.size());
  Var<T> in = x;
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    next.push_back(cells_[k].step(in, prev[k]));
    in = next.back().h;
  }
  return next;
}

template <typename T>
BiLstmEncoder<T>::BiLstmEncoder(ParameterStore<T>& store, const std::string& name,
                                std::size_t input, std::size_t hidden, Rng& rng)
    : forward_(store, name + ".fwd", input, hidden, rng),
      backward_(store, name + ".bwd", input, hidden, rng) {}

template <typename T>
Var<T> BiLstmEncoder<T>::operator()(Var<T> v) const {
  Graph<T>& g = v.graph();
  const std::size_t n = v.rows();
  if (n == 0) throw DimensionError("bidirectional encoder over an empty sequence");
  Var<T> fwd_in = forward_.project_inputs(v);
  Var<T> bwd_in = backward_.project_inputs(v);
  std::vector<Var<T>> fwd(n), bwd(n);
  LstmState<T> s = forward_.zero_state(g);
  for (std::size_t t = 0; t < n; ++t) {
    s = forward_.step_projected(slice_rows(fwd_in, t, 1), s);
    fwd[t] = s.h;
  }
  s = backward_.zero_state(g);
  for (std::size_t t = n; t-- > 0;) {
    s = backward_.step_projected(slice_rows(bwd_in, t, 1), s);
    bwd[t] = s.h;
  }
  return concat_cols({concat_rows(std::span<const Var<T>>(fwd)),
                      concat_rows(std::span<const Var<T>>(bwd))});
}

Mask causal_mask(std::size_t n) {
  Mask m(n * n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m[i * n + j] = 1;
  return m;
}

Mask key_mask(std::size_t queries, const std::vector<std::uint8_t>& key_visible) {
  Mask m;
  m.reserve(queries * key_visible.size());
  for (std::size_t i = 0; i < queries; ++i)
    m.insert(m.end(), key_visible.begin(), key_visible.end());
  return m;
}

template <typename T>
MultiHeadAttention<T>::MultiHeadAttention(ParameterStore<T>& store,
                                          const std::string& name,
                                          std::size_t dim, std::size_t heads,
                                          Rng& rng)
    : dim_(dim),
      heads_(heads),
      q_(store, name + ".q", dim, dim, rng),
      k_(store, name + ".k", dim, dim, rng),
      v_(store, name + ".v", dim, dim, rng),
      o_(store, name + ".o", dim, dim, rng) {
  if (heads == 0 || dim % heads != 0) {
    throw ConfigError("model width " + std::to_string(dim) +
                      " is not divisible by " + std::to_string(heads) + " heads");
  }
}

template <typename T>
AttentionOutput<T> MultiHeadAttention<T>::operator()(Var<T> queries, Var<T> keys,
                                                     Var<T> values,
                                                     const Mask& visible) const {
  const std::size_t n_q = queries.rows(), n_k = keys.rows();
  if (values.rows() != n_k) throw DimensionError("attention keys/values differ in length");
  if (!visible.empty() && visible.size() != n_q * n_k) {
    throw DimensionError("attention mask has " + std::to_string(visible.size()) +
                         " entries, expected " + std::to_string(n_q * n_k));
  }
  const std::size_t dk = dim_ / heads_;
  const T scale = T{1} / std::sqrt(static_cast<T>(dk));
  Var<T> q = q_(queries), k = k_(keys), v = v_(values);
  AttentionOutput<T> out;
  std::vector<Var<T>> heads;
  for (std::size_t h = 0; h < heads_; ++h) {
    Var<T> qh = slice_cols(q, h * dk, dk);
    Var<T> kh = slice_cols(k, h * dk, dk);
    Var<T> vh = slice_cols(v, h * dk, dk);
    Var<T> scores = affine(matmul(qh, transpose(kh)), scale);
    Var<T> w = masked_softmax(scores, visible);
    out.weights.push_back(w);
    heads.push_back(matmul(w, vh));
  }
  Var<T> cat = heads_ == 1 ? heads[0] : concat_cols(std::span<const Var<T>>(heads));
  out.output = o_(cat);
  return out;
}

template <typename T>
PositionWiseFfn<T>::PositionWiseFfn(ParameterStore<T>& store,
                                    const std::string& name, std::size_t dim,
                                    std::size_t hidden, Rng& rng)
    : inner_(store, name + ".inner", dim, hidden, rng),
      outer_(store, name + ".outer", hidden, dim, rng) {}

template <typename T>
Var<T> PositionWiseFfn<T>::operator()(Var<T> x) const {
  return outer_(relu(inner_(x)));
}

template <typename T>
PretrainedVectors<T> load_pretrained_vectors(const std::filesystem::path& path,
                                             std::span<const std::string> tokens,
                                             std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  std::unordered_map<std::string, std::size_t> wanted;
  for (std::size_t i = 0; i < tokens.size(); ++i) wanted.emplace(tokens[i], i);

  PretrainedVectors<T> out;
  out.matrix = Tensor<T>({tokens.size(), dim});
  std::vector<bool> found(tokens.size(), false);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    std::vector<double> values;
    double v;
    while (fields >> v) values.push_back(v);
    if (!fields.eof()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": malformed embedding value");
    }
    if (line_no == 1 && values.size() == 1 &&
        token.find_first_not_of("0123456789") == std::string::npos) {
      continue;  // "V d" header
    }
    if (values.size() != dim) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(dim) + " values, found " +
                      std::to_string(values.size()));
    }
    auto it = wanted.find(token);
    if (it == wanted.end() || found[it->second]) continue;
    found[it->second] = true;
    for (std::size_t j = 0; j < dim; ++j)
      out.matrix.at(it->second, j) = static_cast<T>(values[j]);
  }
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (!found[i]) out.missing.push_back(tokens[i]);
  return out;
}

#define SEMDEF_INSTANTIATE_LAYERS(T)                                          \
  template class EmbeddingTable<T>;                                           \
  template class PositionTable<T>;                                            \
  template class Linear<T>;                                                   \
  template class LayerNorm<T>;                                                \
  template class CharCnn<T>;                                                  \
  template class LstmCell<T>;                                                 \
  template class StackedLstm<T>;                                              \
  template class BiLstmEncoder<T>;                                            \
  template class MultiHeadAttention<T>;                                       \
  template class PositionWiseFfn<T>;                                          \
  template PretrainedVectors<T> load_pretrained_vectors(                      \
      const std::filesystem::path&, std::span<const std::string>, std::size_t);

SEMDEF_INSTANTIATE_LAYERS(float)
SEMDEF_INSTANTIATE_LAYERS(double)

#undef SEMDEF_INSTANTIATE_LAYERS

}  // namespace semdef::nn
