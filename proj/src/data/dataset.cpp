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
#include "semdef/data/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "semdef/core/error.hpp"
#include "semdef/core/random.hpp"

namespace semdef::data {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

json parse_line(const std::string& line, const std::string& source, std::size_t no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(where(source, no) + "malformed JSON (" + e.what() + ")");
  }
  if (!obj.is_object()) throw DataError(where(source, no) + "expected a JSON object");
  return obj;
}

std::string string_field(const json& obj, const char* key, const std::string& source,
                         std::size_t no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw DataError(where(source, no) + "missing \"" + key + "\"");
  if (!it->is_string()) throw DataError(where(source, no) + "\"" + key + "\" must be a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const json& value, const std::string& what,
                                     const std::string& source, std::size_t no) {
  if (!value.is_array()) throw DataError(where(source, no) + what + " must be a list");
  std::vector<std::string> out;
  for (const auto& item : value) {
    if (!item.is_string()) throw DataError(where(source, no) + what + " holds a non-string");
    out.push_back(item.get<std::string>());
  }
  return out;
}

// Definitions may be a whitespace-joined string or a token list.
std::vector<std::string> definition_field(const json& obj, const std::string& source,
                                          std::size_t no) {
  auto it = obj.find("definition");
  if (it == obj.end()) throw DataError(where(source, no) + "missing \"definition\"");
  std::vector<std::string> tokens = it->is_string()
                                        ? split_tokens(it->get<std::string>())
                                        : string_list(*it, "\"definition\"", source, no);
  if (tokens.empty()) throw DataError(where(source, no) + "empty definition");
  return tokens;
}

template <typename F>
void for_each_line(std::istream& in, F&& f) {
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (blank(line)) continue;
    f(line, no);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

}  // namespace

std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const auto space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !space(text[j])) ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> utf8_chars(const std::string& word) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const auto lead = static_cast<unsigned char>(word[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) len = 4;
    else if (lead >= 0xE0) len = 3;
    else if (lead >= 0xC0) len = 2;
    if (lead >= 0xF8 || (lead >= 0x80 && lead < 0xC0)) len = 1;
    if (i + len > word.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(word[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.push_back(word.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<Entry> read_entries(std::istream& in, const std::string& source) {
  std::vector<Entry> out;
  for_each_line(in, [&](const std::string& line, std::size_t no) {
    json obj = parse_line(line, source, no);
    Entry e;
    e.word = string_field(obj, "word", source, no);
    if (e.word.empty()) throw DataError(where(source, no) + "empty word");
    auto it = obj.find("sememes");
    if (it == obj.end()) throw DataError(where(source, no) + "missing \"sememes\"");
    e.sememes = string_list(*it, "\"sememes\"", source, no);
    e.definition = definition_field(obj, source, no);
    out.push_back(std::move(e));
  });
  return out;
}

std::vector<Entry> parse_dataset(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_entries(in, path.string());
}

std::string serialize_entry(const Entry& e) {
  ordered_json obj;
  obj["word"] = e.word;
  obj["sememes"] = e.sememes;
  obj["definition"] = join_tokens(e.definition);
  return obj.dump();
}

void write_entries(std::ostream& out, const std::vector<Entry>& entries) {
  for (const auto& e : entries) out << serialize_entry(e) << '\n';
}

void save_dataset(const std::filesystem::path& path, const std::vector<Entry>& entries) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_entries(out, entries);
  if (!out) throw DataError("failed writing " + path.string());
}

void SememeLexicon::add(const std::string& word,
                        std::vector<std::vector<std::string>> senses) {
  auto [it, inserted] = groups.try_emplace(word);
  if (inserted) order.push_back(word);
  for (auto& s : senses) it->second.push_back(std::move(s));
}

const std::vector<std::vector<std::string>>* SememeLexicon::find(
    const std::string& word) const {
  auto it = groups.find(word);
  return it == groups.end() ? nullptr : &it->second;
}

SememeLexicon read_lexicon(std::istream& in, const std::string& source) {
  SememeLexicon lex;
  for_each_line(in, [&](const std::string& line, std::size_t no) {
    json obj = parse_line(line, source, no);
    const std::string word = string_field(obj, "word", source, no);
    auto it = obj.find("groups");
    if (it == obj.end() || !it->is_array()) {
      throw DataError(where(source, no) + "missing \"groups\" list");
    }
    std::vector<std::vector<std::string>> senses;
    for (const auto& g : *it) {
      senses.push_back(string_list(g, "sememe group", source, no));
      if (senses.back().empty()) throw DataError(where(source, no) + "empty sememe group");
    }
    lex.add(word, std::move(senses));
  });
  return lex;
}

SememeLexicon parse_lexicon(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_lexicon(in, path.string());
}

std::vector<Definition> read_definitions(std::istream& in, const std::string& source) {
  std::vector<Definition> out;
  for_each_line(in, [&](const std::string& line, std::size_t no) {
    json obj = parse_line(line, source, no);
    out.push_back({string_field(obj, "word", source, no), definition_field(obj, source, no)});
  });
  return out;
}

std::vector<Definition> parse_definitions(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_definitions(in, path.string());
}

AlignReport align_entries(const std::vector<Definition>& definitions,
                          const SememeLexicon& lexicon,
                          const SememeLexicon& token_lexicon) {
  AlignReport report;
  for (const auto& def : definitions) {
    const auto* senses = lexicon.find(def.word);
    if (!senses || senses->empty()) {
      ++report.missing_word;
      continue;
    }
    std::unordered_set<std::string> evidence;
    for (const auto& tok : def.tokens) {
      if (const auto* tok_senses = token_lexicon.find(tok)) {
        for (const auto& g : *tok_senses) evidence.insert(g.begin(), g.end());
      }
    }
    std::size_t best = 0, best_overlap = 0;
    for (std::size_t k = 0; k < senses->size(); ++k) {
      std::unordered_set<std::string> seen;
      for (const auto& s : (*senses)[k])
        if (evidence.count(s)) seen.insert(s);
      if (seen.size() > best_overlap) {
        best_overlap = seen.size();
        best = k;
      }
    }
    if (best_overlap == 0) {
      ++report.no_overlap;
      continue;
    }
    report.entries.push_back({def.word, (*senses)[best], def.tokens});
  }
  return report;
}

FilterReport filter_entries(const std::vector<Entry>& entries,
                            const std::set<std::string>& function_words,
                            const std::set<std::string>& excluded_pos,
                            const std::unordered_map<std::string, std::string>& pos_map) {
  FilterReport report;
  for (const auto& e : entries) {
    bool self_reference = false;
    for (const auto& tok : e.definition) self_reference = self_reference || tok == e.word;
    if (self_reference) {
      ++report.contains_word;
      continue;
    }
    if (function_words.count(e.word)) {
      ++report.function_word;
      continue;
    }
    auto pos = pos_map.find(e.word);
    if (pos != pos_map.end() && excluded_pos.count(pos->second)) {
      ++report.excluded_pos;
      continue;
    }
    report.kept.push_back(e);
  }
  return report;
}

std::set<std::string> read_word_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto toks = split_tokens(line);
    if (!toks.empty()) out.insert(toks.front());
  }
  return out;
}

std::unordered_map<std::string, std::string> read_pos_map(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::unordered_map<std::string, std::string> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto toks = split_tokens(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) throw DataError(where(path.string(), no) + "expected \"word pos\"");
    out[toks[0]] = toks[1];
  }
  return out;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<unsigned, 3> ratios) {
  const std::uint64_t total = std::uint64_t{ratios[0]} + ratios[1] + ratios[2];
  if (total == 0) throw ConfigError("split ratios sum to zero");
  // Round half up: floor((2 n r + R) / 2R).
  auto share = [&](unsigned r) {
    return static_cast<std::size_t>((2 * std::uint64_t{n} * r + total) / (2 * total));
  };
  const std::size_t train = share(ratios[0]), valid = share(ratios[1]);
  if (train + valid > n) return {train, n - train, 0};
  return {train, valid, n - train - valid};
}

SplitResult split_dataset(const std::vector<Entry>& entries, std::uint64_t seed,
                          std::array<unsigned, 3> ratios) {
  std::vector<std::string> words;
  std::unordered_map<std::string, std::size_t> slot;
  for (const auto& e : entries)
    if (slot.emplace(e.word, words.size()).second) words.push_back(e.word);
  const std::size_t min_words = std::size_t{ratios[0]} + ratios[1] + ratios[2];
  if (words.size() < min_words) {
    throw DataError("split needs at least " + std::to_string(min_words) +
                    " unique words, found " + std::to_string(words.size()));
  }
  Rng rng(seed);
  portable_shuffle(words.begin(), words.end(), rng);
  const auto sizes = split_sizes(words.size(), ratios);
  std::unordered_map<std::string, int> part;
  for (std::size_t i = 0; i < words.size(); ++i)
    part[words[i]] = i < sizes[0] ? 0 : (i < sizes[0] + sizes[1] ? 1 : 2);
  SplitResult out;
  for (const auto& e : entries) {
    switch (part[e.word]) {
      case 0: out.train.push_back(e); break;
      case 1: out.valid.push_back(e); break;
      default: out.test.push_back(e); break;
    }
  }
  return out;
}

}  // namespace semdef::data
