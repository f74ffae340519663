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
#ifndef SEMDEF_CORE_GRAPH_HPP_
#define SEMDEF_CORE_GRAPH_HPP_

#include <cstddef>
#include <deque>
#include <functional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semdef/core/parameter.hpp"
#include "semdef/core/tensor.hpp"

namespace semdef {

enum class OpKind {
  kConstant,
  kInput,
  kParameter,
  kMatMul,
  kTranspose,
  kAdd,
  kSub,
  kMul,
  kAffine,
  kAddBias,
  kScaleRows,
  kSigmoid,
  kTanh,
  kRelu,
  kSoftmax,
  kLayerNorm,
  kConcatCols,
  kConcatRows,
  kSliceRows,
  kSliceCols,
  kRepeatRows,
  kUnfoldRows,
  kMaxRows,
  kSum,
  kLookup,
  kDropout,
  kReshape,
  kCrossEntropy,
};

std::string_view op_name(OpKind kind);

template <typename T>
class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
template <typename T>
class Var {
 public:
  Var() = default;

  bool valid() const { return graph_ != nullptr; }
  Graph<T>& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  const Tensor<T>& value() const { return graph_->value(id_); }
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  friend class Graph<T>;
  Var(Graph<T>* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph<T>* graph_ = nullptr;
  std::size_t id_ = 0;
};

// Tape of operations for reverse-mode differentiation.
//
// Nodes are appended in evaluation order, so the tape is topologically sorted
// and acyclic by construction. A graph built with `track_gradients = false`
// records values only, which is what decoding uses.
//
// Parameter leaves accumulate straight into `Parameter::grad`; callers zero
// those between steps. `backward` may run once per graph.
template <typename T>
class Graph {
 public:
  // Receives the graph and the id of the node whose gradient is ready.
  using BackwardFn = std::function<void(Graph&, std::size_t)>;

  explicit Graph(bool track_gradients = true)
      : track_gradients_(track_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool tracking() const { return track_gradients_; }
  std::size_t size() const { return nodes_.size(); }

  Var<T> constant(Tensor<T> value);
  // Differentiable leaf that owns its value; its gradient is read via grad().
  Var<T> input(Tensor<T> value);
  // Leaf bound to a parameter. Repeated calls return the same node.
  Var<T> parameter(Parameter<T>& param);

  const Tensor<T>& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.value;
  }
  const Tensor<T>& value(Var<T> v) const { return value(v.id()); }

  bool has_grad(Var<T> v) const;
  const Tensor<T>& grad(Var<T> v) const;
  OpKind op(Var<T> v) const { return nodes_[v.id()].op; }
  const std::vector<std::size_t>& inputs(Var<T> v) const {
    return nodes_[v.id()].inputs;
  }
  bool requires_grad(std::size_t id) const {
    return nodes_[id].requires_grad;
  }
  bool requires_grad(Var<T> v) const { return requires_grad(v.id()); }

  // Seeds d(loss)/d(loss) = 1 and runs every recorded backward rule in
  // reverse order.
  void backward(Var<T> loss);

  // Appends an op record. The node requires a gradient when any input does or
  // when `reads_trainable` is set (ops that read a parameter directly).
  // Throws NumericError if `value` has a non-finite entry.
  Var<T> record(OpKind kind, std::vector<std::size_t> inputs, Tensor<T> value,
                BackwardFn backward, bool reads_trainable = false);

  // Gradient accumulator of a node, zero-initialised on first use.
  Tensor<T>& grad_slot(std::size_t id);
  // Gradient arriving at a node during backward.
  const Tensor<T>& upstream(std::size_t id) const;

  // Sparse accumulation target for ops that read a parameter directly.
  Parameter<T>* bound_parameter(std::size_t id) const {
    return nodes_[id].param;
  }

 private:
  struct Node {
    OpKind op = OpKind::kConstant;
    std::vector<std::size_t> inputs;
    Tensor<T> value;
    const Tensor<T>* external = nullptr;
    Parameter<T>* param = nullptr;
    Tensor<T> grad;
    BackwardFn backward;
    bool requires_grad = false;
  };

  Var<T> make(std::size_t id) { return Var<T>(this, id); }

  bool track_gradients_;
  bool backward_done_ = false;
  std::deque<Node> nodes_;
  std::unordered_map<const Parameter<T>*, std::size_t> param_nodes_;
};

extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace semdef

#endif  // SEMDEF_CORE_GRAPH_HPP_
