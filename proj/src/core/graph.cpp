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
#include "semdef/core/graph.hpp"

#include <string>

namespace semdef {

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConstant: return "constant";
    case OpKind::kInput: return "input";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kAffine: return "affine";
    case OpKind::kAddBias: return "add_bias";
    case OpKind::kScaleRows: return "scale_rows";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kRelu: return "relu";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLayerNorm: return "layer_norm";
    case OpKind::kConcatCols: return "concat_cols";
    case OpKind::kConcatRows: return "concat_rows";
    case OpKind::kSliceRows: return "slice_rows";
    case OpKind::kSliceCols: return "slice_cols";
    case OpKind::kRepeatRows: return "repeat_rows";
    case OpKind::kUnfoldRows: return "unfold_rows";
    case OpKind::kMaxRows: return "max_rows";
    case OpKind::kSum: return "sum";
    case OpKind::kLookup: return "lookup";
    case OpKind::kDropout: return "dropout";
    case OpKind::kReshape: return "reshape";
    case OpKind::kCrossEntropy: return "cross_entropy";
  }
  return "unknown";
}

template <typename T>
Var<T> Graph<T>::constant(Tensor<T> value) {
  return record(OpKind::kConstant, {}, std::move(value), nullptr);
}

template <typename T>
Var<T> Graph<T>::input(Tensor<T> value) {
  Var<T> v = record(OpKind::kInput, {}, std::move(value), nullptr);
  nodes_[v.id()].requires_grad = track_gradients_;
  return v;
}

template <typename T>
Var<T> Graph<T>::parameter(Parameter<T>& param) {
  if (auto it = param_nodes_.find(&param); it != param_nodes_.end()) {
    return make(it->second);
  }
  if (!param.value.all_finite()) {
    throw NumericError("parameter '" + param.name + "' holds non-finite values");
  }
  Node node;
  node.op = OpKind::kParameter;
  node.external = &param.value;
  node.param = &param;
  node.requires_grad = track_gradients_ && !param.frozen;
  nodes_.push_back(std::move(node));
  const std::size_t id = nodes_.size() - 1;
  param_nodes_.emplace(&param, id);
  return make(id);
}

template <typename T>
Var<T> Graph<T>::record(OpKind kind, std::vector<std::size_t> inputs,
                        Tensor<T> value, BackwardFn backward,
                        bool reads_trainable) {
  if (!value.all_finite()) {
    throw NumericError("non-finite value produced by " +
                       std::string(op_name(kind)) + " with shape " +
                       shape_str(value.shape()));
  }
  Node node;
  node.op = kind;
  node.value = std::move(value);
  bool needs = reads_trainable;
  for (std::size_t in : inputs) needs = needs || nodes_[in].requires_grad;
  node.requires_grad = track_gradients_ && needs;
  if (node.requires_grad) node.backward = std::move(backward);
  node.inputs = std::move(inputs);
  nodes_.push_back(std::move(node));
  return make(nodes_.size() - 1);
}

template <typename T>
Tensor<T>& Graph<T>::grad_slot(std::size_t id) {
  Node& n = nodes_[id];
  if (n.param) return n.param->grad;
  if (n.grad.empty()) n.grad = Tensor<T>(n.value.shape());
  return n.grad;
}

template <typename T>
const Tensor<T>& Graph<T>::upstream(std::size_t id) const {
  const Node& n = nodes_[id];
  return n.param ? n.param->grad : n.grad;
}

template <typename T>
bool Graph<T>::has_grad(Var<T> v) const {
  const Node& n = nodes_[v.id()];
  return n.param ? n.requires_grad : !n.grad.empty();
}

template <typename T>
const Tensor<T>& Graph<T>::grad(Var<T> v) const {
  if (!has_grad(v)) {
    throw DimensionError("node " + std::to_string(v.id()) + " (" +
                         std::string(op_name(nodes_[v.id()].op)) +
                         ") has no gradient");
  }
  return upstream(v.id());
}

template <typename T>
void Graph<T>::backward(Var<T> loss) {
  if (!track_gradients_) {
    throw DimensionError("backward on a graph that does not track gradients");
  }
  if (backward_done_) throw DimensionError("backward already ran on this graph");
  if (value(loss).size() != 1) {
    throw DimensionError("backward needs a scalar loss, got shape " +
                         shape_str(value(loss).shape()));
  }
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  // Every node that requires a gradient gets a slot, reached or not.
  for (std::size_t i = 0; i <= loss.id(); ++i) {
    if (nodes_[i].requires_grad) grad_slot(i);
  }
  grad_slot(loss.id())[0] += T{1};
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.backward) continue;
    if (!upstream(i).all_finite()) {
      throw NumericError("non-finite gradient at " +
                         std::string(op_name(n.op)) + " node " +
                         std::to_string(i));
    }
    n.backward(*this, i);
  }
}

template class Graph<float>;
template class Graph<double>;

}  // namespace semdef
