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
#ifndef SEMDEF_SRC_MODELS_ARCHITECTURES_HPP_
#define SEMDEF_SRC_MODELS_ARCHITECTURES_HPP_

#include <memory>

#include "semdef/models/model.hpp"

namespace semdef::models {

template <typename T>
std::unique_ptr<Model<T>> make_baseline(const ModelConfig& config, VocabSizes sizes);
template <typename T>
std::unique_ptr<Model<T>> make_aam(const ModelConfig& config, VocabSizes sizes);
template <typename T>
std::unique_ptr<Model<T>> make_saam(const ModelConfig& config, VocabSizes sizes);

}  // namespace semdef::models

#endif  // SEMDEF_SRC_MODELS_ARCHITECTURES_HPP_
