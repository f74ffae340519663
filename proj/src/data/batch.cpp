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
#include "semdef/data/batch.hpp"

#include <algorithm>
#include <numeric>

#include "semdef/core/error.hpp"
#include "semdef/core/random.hpp"

namespace semdef::data {

Example encode_entry(const Entry& e, const Vocabularies& vocabs, std::size_t max_sememes,
                     std::size_t max_def_tokens) {
  Example ex;
  ex.word = vocabs.source.id(e.word);
  ex.chars = vocabs.chars.encode(utf8_chars(e.word));
  const std::size_t ns = std::min(e.sememes.size(), max_sememes);
  ex.sememes = vocabs.source.encode({e.sememes.begin(), e.sememes.begin() + ns});
  const std::size_t nd = std::min(e.definition.size(), max_def_tokens);
  ex.definition = vocabs.target.encode({e.definition.begin(), e.definition.begin() + nd});
  return ex;
}

std::vector<Example> encode_entries(const std::vector<Entry>& entries,
                                    const Vocabularies& vocabs, std::size_t max_sememes,
                                    std::size_t max_def_tokens) {
  std::vector<Example> out;
  out.reserve(entries.size());
  for (const auto& e : entries)
    out.push_back(encode_entry(e, vocabs, max_sememes, max_def_tokens));
  return out;
}

std::size_t Batch::definition_length(std::size_t b) const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < def_width; ++j) n += definition_mask[b * def_width + j] != 0;
  return n;
}

Batch make_batch(std::span<const Example> examples) {
  if (examples.empty()) throw DataError("empty batch");
  Batch batch;
  batch.size = examples.size();
  for (const auto& ex : examples) {
    if (ex.definition.empty()) throw DataError("example with an empty definition");
    batch.sememe_width = std::max(batch.sememe_width, ex.sememes.size());
    batch.def_width = std::max(batch.def_width, ex.definition.size() + 2);
  }
  batch.sememes.assign(batch.size * batch.sememe_width, kPad);
  batch.sememe_mask.assign(batch.size * batch.sememe_width, 0);
  batch.definitions.assign(batch.size * batch.def_width, kPad);
  batch.definition_mask.assign(batch.size * batch.def_width, 0);
  for (std::size_t b = 0; b < batch.size; ++b) {
    const Example& ex = examples[b];
    batch.words.push_back(ex.word);
    batch.chars.push_back(ex.chars);
    for (std::size_t n = 0; n < ex.sememes.size(); ++n) {
      batch.sememes[b * batch.sememe_width + n] = ex.sememes[n];
      batch.sememe_mask[b * batch.sememe_width + n] = 1;
    }
    TokenId* row = batch.definitions.data() + b * batch.def_width;
    std::uint8_t* mask = batch.definition_mask.data() + b * batch.def_width;
    row[0] = kBos;
    std::copy(ex.definition.begin(), ex.definition.end(), row + 1);
    row[ex.definition.size() + 1] = kEos;
    std::fill(mask, mask + ex.definition.size() + 2, 1);
  }
  return batch;
}

std::vector<Batch> epoch_batches(const std::vector<Example>& examples,
                                 std::size_t batch_size, std::uint64_t seed,
                                 std::size_t epoch, bool shuffle) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  if (shuffle) {
    Rng rng(seed ^ (0x9E3779B97F4A7C15ull * (epoch + 1)));
    portable_shuffle(order.begin(), order.end(), rng);
  }
  std::vector<Batch> out;
  std::vector<Example> chunk;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    chunk.clear();
    for (std::size_t i = start; i < std::min(order.size(), start + batch_size); ++i)
      chunk.push_back(examples[order[i]]);
    out.push_back(make_batch(chunk));
  }
  return out;
}

}  // namespace semdef::data
