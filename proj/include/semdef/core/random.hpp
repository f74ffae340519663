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
#ifndef SEMDEF_CORE_RANDOM_HPP_
#define SEMDEF_CORE_RANDOM_HPP_

#include <cstdint>
#include <iterator>
#include <random>
#include <utility>

namespace semdef {

using Rng = std::mt19937_64;

// Fisher-Yates driven by raw engine output, so the permutation for a seed is
// the same on every standard library.
template <typename It>
void portable_shuffle(It first, It last, Rng& rng) {
  const auto n = static_cast<std::uint64_t>(std::distance(first, last));
  for (std::uint64_t i = n; i > 1; --i) {
    const std::uint64_t j = rng() % i;
    using std::swap;
    swap(first[i - 1], first[j]);
  }
}

}  // namespace semdef

#endif  // SEMDEF_CORE_RANDOM_HPP_
