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
#include "semdef/core/adam.hpp"

#include <cmath>

namespace semdef {

template <typename T>
Adam<T>::Adam(ParameterStore<T>& params, AdamOptions options)
    : params_(&params), options_(options) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const auto& p : params) {
    m_.push_back(Tensor<T>::zeros_like(p->value));
    v_.push_back(Tensor<T>::zeros_like(p->value));
  }
}

template <typename T>
void Adam<T>::step() {
  if (params_->size() != m_.size()) {
    throw DimensionError("parameter store changed size after Adam was built");
  }
  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double step_size = options_.lr / correction1;
  for (std::size_t k = 0; k < params_->size(); ++k) {
    Parameter<T>& p = (*params_)[k];
    if (p.frozen) continue;
    Tensor<T>& m = m_[k];
    Tensor<T>& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      const double mi = b1 * m[i] + (1.0 - b1) * g;
      const double vi = b2 * v[i] + (1.0 - b2) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double denom = std::sqrt(vi / correction2) + options_.eps;
      p.value[i] = static_cast<T>(p.value[i] - step_size * mi / denom);
    }
  }
}

template <typename T>
double clip_grad_norm(ParameterStore<T>& params, double max_norm) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (p->frozen) continue;
    for (T g : p->grad.data()) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const T scale = static_cast<T>(max_norm / norm);
    for (auto& p : params) {
      if (p->frozen) continue;
      for (T& g : p->grad.data()) g *= scale;
    }
  }
  return norm;
}

template class Adam<float>;
template class Adam<double>;
template double clip_grad_norm(ParameterStore<float>&, double);
template double clip_grad_norm(ParameterStore<double>&, double);

}  // namespace semdef
