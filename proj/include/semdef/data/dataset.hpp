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
#ifndef SEMDEF_DATA_DATASET_HPP_
#define SEMDEF_DATA_DATASET_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace semdef::data {

// One (word, sememes, definition) record.
struct Entry {
  std::string word;
  std::vector<std::string> sememes;
  std::vector<std::string> definition;

  bool operator==(const Entry&) const = default;
};

// Splits on runs of ASCII whitespace.
std::vector<std::string> split_tokens(const std::string& text);
std::string join_tokens(const std::vector<std::string>& tokens);
// UTF-8 code points of `word`, each as its own string. Invalid bytes are
// passed through one at a time.
std::vector<std::string> utf8_chars(const std::string& word);

// JSON lines with keys word / sememes / definition. Errors carry the 1-based
// line number. Blank lines are skipped.
std::vector<Entry> read_entries(std::istream& in, const std::string& source = "<stream>");
std::vector<Entry> parse_dataset(const std::filesystem::path& path);
std::string serialize_entry(const Entry& e);
void write_entries(std::ostream& out, const std::vector<Entry>& entries);
void save_dataset(const std::filesystem::path& path, const std::vector<Entry>& entries);

// word -> sememe groups, one group per sense.
struct SememeLexicon {
  std::unordered_map<std::string, std::vector<std::vector<std::string>>> groups;
  // Words in file order, for stable re-serialisation.
  std::vector<std::string> order;

  void add(const std::string& word, std::vector<std::vector<std::string>> senses);
  const std::vector<std::vector<std::string>>* find(const std::string& word) const;
};

// {"word": w, "groups": [[...], ...]} per line.
SememeLexicon read_lexicon(std::istream& in, const std::string& source = "<stream>");
SememeLexicon parse_lexicon(const std::filesystem::path& path);

// A headword with one tokenised definition.
struct Definition {
  std::string word;
  std::vector<std::string> tokens;
};

// {"word": w, "definition": "tok tok ..."} per line.
std::vector<Definition> read_definitions(std::istream& in,
                                         const std::string& source = "<stream>");
std::vector<Definition> parse_definitions(const std::filesystem::path& path);

struct AlignReport {
  std::vector<Entry> entries;
  std::size_t missing_word = 0;  // headword not in the lexicon
  std::size_t no_overlap = 0;    // no group shares a sememe with the definition
};

// Picks, for each definition, the headword sense sharing the most sememes
// with the union of all senses of the definition's tokens. Ties go to the
// first listed sense.
AlignReport align_entries(const std::vector<Definition>& definitions,
                          const SememeLexicon& lexicon,
                          const SememeLexicon& token_lexicon);

struct FilterReport {
  std::vector<Entry> kept;
  std::size_t contains_word = 0;
  std::size_t function_word = 0;
  std::size_t excluded_pos = 0;
};

// Rules are checked in the order of the counters above; an entry is counted
// under the first rule it violates.
FilterReport filter_entries(const std::vector<Entry>& entries,
                            const std::set<std::string>& function_words,
                            const std::set<std::string>& excluded_pos,
                            const std::unordered_map<std::string, std::string>& pos_map);

std::set<std::string> read_word_list(const std::filesystem::path& path);
// "word<TAB or space>pos" per line.
std::unordered_map<std::string, std::string> read_pos_map(const std::filesystem::path& path);

struct SplitResult {
  std::vector<Entry> train, valid, test;
};

// Word-disjoint split. Unique words (first-occurrence order) are shuffled
// with the seed; the first round(n*r0/R) go to train, the next
// round(n*r1/R) to valid and the rest to test. Entries keep input order.
SplitResult split_dataset(const std::vector<Entry>& entries, std::uint64_t seed,
                          std::array<unsigned, 3> ratios = {18, 1, 1});
// Word counts the split would produce for `n` unique words.
std::array<std::size_t, 3> split_sizes(std::size_t n, std::array<unsigned, 3> ratios);

}  // namespace semdef::data

#endif  // SEMDEF_DATA_DATASET_HPP_
