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
#ifndef SEMDEF_DATA_BATCH_HPP_
#define SEMDEF_DATA_BATCH_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "semdef/core/tokens.hpp"
#include "semdef/data/vocab.hpp"

namespace semdef::data {

// An id-mapped entry. `definition` excludes BOS and EOS.
struct Example {
  TokenId word = kUnk;
  std::vector<TokenId> chars;
  std::vector<TokenId> sememes;
  std::vector<TokenId> definition;
};

// Truncates to the first max_sememes sememes and max_def_tokens tokens.
Example encode_entry(const Entry& e, const Vocabularies& vocabs,
                     std::size_t max_sememes, std::size_t max_def_tokens);
std::vector<Example> encode_entries(const std::vector<Entry>& entries,
                                    const Vocabularies& vocabs,
                                    std::size_t max_sememes,
                                    std::size_t max_def_tokens);

// Row-major padded matrices. Sememes are padded to the widest row in the
// batch; definitions are BOS y_1..y_n EOS padded to the longest + 2.
struct Batch {
  std::size_t size = 0;
  std::size_t sememe_width = 0;
  std::size_t def_width = 0;
  std::vector<TokenId> words;
  std::vector<std::vector<TokenId>> chars;
  std::vector<TokenId> sememes;
  std::vector<std::uint8_t> sememe_mask;
  std::vector<TokenId> definitions;
  std::vector<std::uint8_t> definition_mask;

  std::span<const TokenId> sememe_row(std::size_t b) const {
    return {sememes.data() + b * sememe_width, sememe_width};
  }
  std::span<const std::uint8_t> sememe_mask_row(std::size_t b) const {
    return {sememe_mask.data() + b * sememe_width, sememe_width};
  }
  std::span<const TokenId> definition_row(std::size_t b) const {
    return {definitions.data() + b * def_width, def_width};
  }
  // Unpadded row length, BOS and EOS included.
  std::size_t definition_length(std::size_t b) const;
};

Batch make_batch(std::span<const Example> examples);

// All batches of one epoch, the last one partial. With `shuffle`, the order
// is a permutation drawn from (seed, epoch).
std::vector<Batch> epoch_batches(const std::vector<Example>& examples,
                                 std::size_t batch_size, std::uint64_t seed,
                                 std::size_t epoch, bool shuffle = true);

}  // namespace semdef::data

#endif  // SEMDEF_DATA_BATCH_HPP_
