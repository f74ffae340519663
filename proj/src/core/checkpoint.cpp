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
#include "semdef/core/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace semdef {
namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename U>
void put(std::ostream& out, U value) {
  unsigned char bytes[sizeof(U)];
  std::memcpy(bytes, &value, sizeof(U));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(U));
  }
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U get(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(U));
  if (!in) throw DataError("checkpoint truncated");
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(U));
  }
  U value;
  std::memcpy(&value, bytes, sizeof(U));
  return value;
}

}  // namespace

template <typename T>
void write_parameters(std::ostream& out, const ParameterStore<T>& params) {
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, sizeof(T));
  put<std::uint64_t>(out, params.size());
  for (const auto& p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rank()));
    for (std::size_t e : p->value.shape()) put<std::uint64_t>(out, e);
    for (T v : p->value.data()) put<T>(out, v);
  }
  if (!out) throw DataError("failed writing checkpoint");
}

template <typename T>
std::vector<NamedTensor<T>> read_parameters(std::istream& in) {
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto width = get<std::uint32_t>(in);
  if (width != sizeof(T)) {
    throw DataError("checkpoint stores " + std::to_string(width) +
                    "-byte values, expected " + std::to_string(sizeof(T)));
  }
  const auto count = get<std::uint64_t>(in);
  std::vector<NamedTensor<T>> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    const auto name_len = get<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw DataError("checkpoint truncated in parameter name");
    const auto rank = get<std::uint32_t>(in);
    if (rank == 0 || rank > 8) {
      throw DataError("parameter '" + name + "' has invalid rank " +
                      std::to_string(rank));
    }
    Shape shape(rank);
    for (auto& e : shape) e = get<std::uint64_t>(in);
    std::vector<T> values(numel(shape));
    for (T& v : values) v = get<T>(in);
    out.push_back({std::move(name), Tensor<T>(std::move(shape), std::move(values))});
  }
  return out;
}

template <typename T>
void load_parameters(std::istream& in, ParameterStore<T>& params) {
  auto records = read_parameters<T>(in);
  if (records.size() != params.size()) {
    throw DataError("checkpoint holds " + std::to_string(records.size()) +
                    " parameters, model expects " + std::to_string(params.size()));
  }
  for (auto& rec : records) {
    Parameter<T>* p = params.find(rec.name);
    if (!p) throw DataError("checkpoint parameter '" + rec.name + "' is unknown");
    if (p->value.shape() != rec.value.shape()) {
      throw DataError("checkpoint parameter '" + rec.name + "' has shape " +
                      shape_str(rec.value.shape()) + ", model expects " +
                      shape_str(p->value.shape()));
    }
    p->value = std::move(rec.value);
  }
}

template <typename T>
void save_parameters_file(const std::filesystem::path& path,
                          const ParameterStore<T>& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_parameters(out, params);
}

template <typename T>
void load_parameters_file(const std::filesystem::path& path,
                          ParameterStore<T>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  load_parameters(in, params);
}

#define SEMDEF_INSTANTIATE_CHECKPOINT(T)                                      \
  template void write_parameters(std::ostream&, const ParameterStore<T>&);    \
  template std::vector<NamedTensor<T>> read_parameters(std::istream&);        \
  template void load_parameters(std::istream&, ParameterStore<T>&);           \
  template void save_parameters_file(const std::filesystem::path&,            \
                                     const ParameterStore<T>&);               \
  template void load_parameters_file(const std::filesystem::path&,            \
                                     ParameterStore<T>&);

SEMDEF_INSTANTIATE_CHECKPOINT(float)
SEMDEF_INSTANTIATE_CHECKPOINT(double)

#undef SEMDEF_INSTANTIATE_CHECKPOINT

}  // namespace semdef
