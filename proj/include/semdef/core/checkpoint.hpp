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
#ifndef SEMDEF_CORE_CHECKPOINT_HPP_
#define SEMDEF_CORE_CHECKPOINT_HPP_

// Flat binary parameter container. All integers and values little-endian.
//
//   u32 format_version            (kCheckpointVersion)
//   u32 value_bytes               (4 = float32, 8 = float64)
//   u64 parameter_count
//   per parameter:
//     u32 name_length, name bytes (UTF-8)
//     u32 rank, u64 extents[rank]
//     value_bytes * prod(extents) raw values

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "semdef/core/parameter.hpp"

namespace semdef {

inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> value;
};

template <typename T>
void write_parameters(std::ostream& out, const ParameterStore<T>& params);

// Reads every record of a container written with the same value width.
template <typename T>
std::vector<NamedTensor<T>> read_parameters(std::istream& in);

// Copies stored values into `params`. Names and shapes must match one to one.
template <typename T>
void load_parameters(std::istream& in, ParameterStore<T>& params);

template <typename T>
void save_parameters_file(const std::filesystem::path& path,
                          const ParameterStore<T>& params);
template <typename T>
void load_parameters_file(const std::filesystem::path& path,
                          ParameterStore<T>& params);

}  // namespace semdef

#endif  // SEMDEF_CORE_CHECKPOINT_HPP_
