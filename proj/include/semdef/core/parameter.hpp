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
#ifndef SEMDEF_CORE_PARAMETER_HPP_
#define SEMDEF_CORE_PARAMETER_HPP_

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "semdef/core/random.hpp"
#include "semdef/core/tensor.hpp"

namespace semdef {

// A trainable tensor together with its gradient accumulator. Frozen
// parameters never receive gradient and are skipped by the optimizer.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool frozen = false;

  void zero_grad() { grad.fill(T{0}); }
};

// Owns every parameter of a model. Iteration order is insertion order, which
// fixes the optimizer and checkpoint layouts.
template <typename T>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) noexcept = default;
  ParameterStore& operator=(ParameterStore&&) noexcept = default;

  Parameter<T>& add(const std::string& name, Tensor<T> init,
                    bool frozen = false) {
    if (index_.count(name)) {
      throw ConfigError("duplicate parameter name '" + name + "'");
    }
    auto p = std::make_unique<Parameter<T>>();
    p->name = name;
    p->grad = Tensor<T>::zeros_like(init);
    p->value = std::move(init);
    p->frozen = frozen;
    index_.emplace(name, params_.size());
    params_.push_back(std::move(p));
    return *params_.back();
  }

  Parameter<T>* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }
  const Parameter<T>* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }

  Parameter<T>& at(const std::string& name) {
    Parameter<T>* p = find(name);
    if (!p) throw ConfigError("unknown parameter '" + name + "'");
    return *p;
  }

  std::size_t size() const { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p->zero_grad();
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Xavier/Glorot uniform over a fan_in x fan_out matrix.
template <typename T>
Tensor<T> xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor<T> t({fan_in, fan_out});
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
Tensor<T> uniform_tensor(Shape shape, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

template <typename T>
Tensor<T> normal_tensor(Shape shape, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor<T> t(std::move(shape));
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

}  // namespace semdef

#endif  // SEMDEF_CORE_PARAMETER_HPP_
