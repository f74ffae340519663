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
#ifndef SEMDEF_DATA_VOCAB_HPP_
#define SEMDEF_DATA_VOCAB_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "semdef/core/tokens.hpp"
#include "semdef/data/dataset.hpp"

namespace semdef::data {

inline constexpr const char* kSpecialTokens[kNumSpecials] = {"<pad>", "<s>", "</s>",
                                                            "<unk>"};

// Token <-> id map. Ids below kNumSpecials are the reserved specials; unknown
// tokens map to kUnk.
class Vocab {
 public:
  Vocab();
  // `tokens` are the non-special entries in id order.
  explicit Vocab(const std::vector<std::string>& tokens);

  // Tokens seen at least min_count times, most frequent first, ties in byte
  // order.
  static Vocab build(const std::vector<std::vector<std::string>>& sequences,
                     std::size_t min_count);

  TokenId id(const std::string& token) const;
  bool contains(const std::string& token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }
  // Every token, specials included, in id order.
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::vector<TokenId> encode(const std::vector<std::string>& tokens) const;
  // Drops PAD and BOS and stops at the first EOS.
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

Vocab build_vocab(const std::vector<Entry>& entries, std::size_t min_count);  // definitions
Vocab build_source_vocab(const std::vector<Entry>& entries, std::size_t min_count);
Vocab build_char_vocab(const std::vector<Entry>& entries);

// Source side (words and sememes), target side (definitions) and the
// characters of headwords.
struct Vocabularies {
  Vocab source;
  Vocab target;
  Vocab chars;

  static Vocabularies build(const std::vector<Entry>& entries, std::size_t min_count);
  bool operator==(const Vocabularies&) const = default;
};

std::string vocabularies_to_json(const Vocabularies& v);
Vocabularies vocabularies_from_json(const std::string& text);
void save_vocabularies(const std::filesystem::path& path, const Vocabularies& v);
Vocabularies load_vocabularies(const std::filesystem::path& path);

}  // namespace semdef::data

#endif  // SEMDEF_DATA_VOCAB_HPP_
