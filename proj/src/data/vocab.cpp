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
#include "semdef/data/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "semdef/core/error.hpp"

namespace semdef::data {
namespace {

using ordered_json = nlohmann::ordered_json;

bool is_special(const std::string& token) {
  for (const char* s : kSpecialTokens)
    if (token == s) return true;
  return false;
}

}  // namespace

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(const std::vector<std::string>& tokens) {
  for (const char* s : kSpecialTokens) {
    index_.emplace(s, static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(s);
  }
  for (const auto& t : tokens) {
    if (is_special(t)) throw DataError("vocabulary token '" + t + "' is reserved");
    if (!index_.emplace(t, static_cast<TokenId>(tokens_.size())).second) {
      throw DataError("duplicate vocabulary token '" + t + "'");
    }
    tokens_.push_back(t);
  }
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& sequences,
                   std::size_t min_count) {
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& seq : sequences)
    for (const auto& t : seq)
      if (!is_special(t)) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [tok, n] : counts)
    if (n >= std::max<std::size_t>(min_count, 1)) ranked.emplace_back(tok, n);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& r : ranked) tokens.push_back(std::move(r.first));
  return Vocab(tokens);
}

TokenId Vocab::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnk : it->second;
}

bool Vocab::contains(const std::string& token) const { return index_.count(token) > 0; }

const std::string& Vocab::token(TokenId id) const {
  if (id >= tokens_.size()) {
    throw DataError("token id " + std::to_string(id) + " outside vocabulary of " +
                    std::to_string(tokens_.size()));
  }
  return tokens_[id];
}

std::vector<TokenId> Vocab::encode(const std::vector<std::string>& tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocab::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  for (TokenId id : ids) {
    if (id == kEos) break;
    if (id == kPad || id == kBos) continue;
    out.push_back(token(id));
  }
  return out;
}

Vocab build_vocab(const std::vector<Entry>& entries, std::size_t min_count) {
  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(entries.size());
  for (const auto& e : entries) seqs.push_back(e.definition);
  return Vocab::build(seqs, min_count);
}

Vocab build_source_vocab(const std::vector<Entry>& entries, std::size_t min_count) {
  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(entries.size());
  for (const auto& e : entries) {
    seqs.push_back(e.sememes);
    seqs.back().push_back(e.word);
  }
  return Vocab::build(seqs, min_count);
}

Vocab build_char_vocab(const std::vector<Entry>& entries) {
  std::vector<std::vector<std::string>> seqs;
  seqs.reserve(entries.size());
  for (const auto& e : entries) seqs.push_back(utf8_chars(e.word));
  return Vocab::build(seqs, 1);
}

Vocabularies Vocabularies::build(const std::vector<Entry>& entries, std::size_t min_count) {
  return {build_source_vocab(entries, min_count), build_vocab(entries, min_count),
          build_char_vocab(entries)};
}

std::string vocabularies_to_json(const Vocabularies& v) {
  auto body = [](const Vocab& vocab) {
    return std::vector<std::string>(vocab.tokens().begin() + kNumSpecials,
                                    vocab.tokens().end());
  };
  ordered_json obj;
  obj["source"] = body(v.source);
  obj["target"] = body(v.target);
  obj["chars"] = body(v.chars);
  return obj.dump(1);
}

Vocabularies vocabularies_from_json(const std::string& text) {
  try {
    auto obj = nlohmann::json::parse(text);
    auto field = [&](const char* key) {
      return Vocab(obj.at(key).get<std::vector<std::string>>());
    };
    return {field("source"), field("target"), field("chars")};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed vocabulary file: ") + e.what());
  }
}

void save_vocabularies(const std::filesystem::path& path, const Vocabularies& v) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << vocabularies_to_json(v) << '\n';
}

Vocabularies load_vocabularies(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return vocabularies_from_json(ss.str());
}

}  // namespace semdef::data
