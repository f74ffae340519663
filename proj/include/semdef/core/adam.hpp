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
#ifndef SEMDEF_CORE_ADAM_HPP_
#define SEMDEF_CORE_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "semdef/core/parameter.hpp"

namespace semdef {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction. Moments are allocated for every parameter the
// store holds when the optimizer is built; frozen parameters are never
// touched.
template <typename T>
class Adam {
 public:
  Adam(ParameterStore<T>& params, AdamOptions options);

  // One update from the gradients currently held by the parameters.
  void step();

  // Overrides the learning rate for subsequent steps (warmup schedules).
  void set_lr(double lr) { options_.lr = lr; }
  const AdamOptions& options() const { return options_; }
  std::uint64_t steps() const { return t_; }

  const Tensor<T>& first_moment(std::size_t i) const { return m_[i]; }
  const Tensor<T>& second_moment(std::size_t i) const { return v_[i]; }

 private:
  ParameterStore<T>* params_;
  AdamOptions options_;
  std::uint64_t t_ = 0;
  std::vector<Tensor<T>> m_;
  std::vector<Tensor<T>> v_;
};

// Rescales all non-frozen gradients so their global L2 norm is at most
// `max_norm`. Returns the norm before clipping. max_norm <= 0 disables it.
template <typename T>
double clip_grad_norm(ParameterStore<T>& params, double max_norm);

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace semdef

#endif  // SEMDEF_CORE_ADAM_HPP_
