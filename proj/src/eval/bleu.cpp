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
#include "semdef/eval/bleu.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "semdef/core/error.hpp"

namespace semdef::eval {
namespace {

using Ngrams = std::map<std::vector<std::string>, std::size_t>;

Ngrams count_ngrams(const std::vector<std::string>& words, std::size_t n) {
  Ngrams out;
  for (std::size_t i = 0; i + n <= words.size(); ++i)
    ++out[std::vector<std::string>(words.begin() + i, words.begin() + i + n)];
  return out;
}

// The reference script substitutes this for log(0).
double script_log(double x) { return x == 0 ? -9999999999.0 : std::log(x); }

std::vector<std::vector<std::string>> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::vector<std::string> toks;
    for (std::string w; words >> w;) toks.push_back(w);
    out.push_back(std::move(toks));
  }
  return out;
}

}  // namespace

BleuResult bleu_corpus(const std::vector<std::vector<std::string>>& candidates,
                       const std::vector<std::vector<std::string>>& references) {
  if (candidates.empty()) throw DataError("BLEU of an empty corpus");
  if (candidates.size() != references.size()) {
    throw DataError("BLEU needs one reference per candidate (" + std::to_string(candidates.size()) +
                    " candidates, " + std::to_string(references.size()) + " references)");
  }
  std::array<std::size_t, 4> correct{}, total{};
  BleuResult r;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const auto& cand = candidates[s];
    const auto& ref = references[s];
    r.hyp_len += cand.size();
    r.ref_len += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const Ngrams ref_counts = count_ngrams(ref, n);
      for (const auto& [gram, count] : count_ngrams(cand, n)) {
        total[n - 1] += count;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) correct[n - 1] += std::min(count, it->second);
      }
    }
  }
  for (std::size_t n = 0; n < 4; ++n)
    r.precisions[n] = total[n] ? static_cast<double>(correct[n]) / static_cast<double>(total[n]) : 0.0;
  if (r.ref_len == 0 || r.hyp_len == 0) {
    r.brevity_penalty = 0;
    r.bleu = 0;
    return r;
  }
  if (r.hyp_len < r.ref_len) {
    r.brevity_penalty = std::exp(1.0 - static_cast<double>(r.ref_len) / static_cast<double>(r.hyp_len));
  }
  double log_sum = 0;
  for (double p : r.precisions) log_sum += script_log(p);
  r.bleu = 100.0 * r.brevity_penalty * std::exp(log_sum / 4.0);
  return r;
}

BleuResult bleu_files(const std::string& candidate_path, const std::string& reference_path) {
  return bleu_corpus(read_lines(candidate_path), read_lines(reference_path));
}

std::string format_bleu(const BleuResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "BLEU = %.2f, %.1f/%.1f/%.1f/%.1f (BP=%.3f, ratio=%.3f, hyp_len=%zu, ref_len=%zu)",
                r.bleu, 100 * r.precisions[0], 100 * r.precisions[1], 100 * r.precisions[2],
                100 * r.precisions[3], r.brevity_penalty, r.ratio(), r.hyp_len, r.ref_len);
  return buf;
}

}  // namespace semdef::eval
