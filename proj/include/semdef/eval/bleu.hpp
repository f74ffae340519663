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
#ifndef SEMDEF_EVAL_BLEU_HPP_
#define SEMDEF_EVAL_BLEU_HPP_

#include <array>
#include <string>
#include <vector>

namespace semdef::eval {

struct BleuResult {
  double bleu = 0;                     // in [0, 100]
  std::array<double, 4> precisions{};  // modified n-gram precisions
  double brevity_penalty = 1;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  double ratio() const { return ref_len ? static_cast<double>(hyp_len) / ref_len : 0.0; }
};

// Corpus BLEU-4 with one reference per candidate, unsmoothed, following the
// Moses multi-bleu script. Throws DataError on empty or mismatched input.
BleuResult bleu_corpus(const std::vector<std::vector<std::string>>& candidates,
                       const std::vector<std::vector<std::string>>& references);

// Reads parallel tokenised files, one sentence per line.
BleuResult bleu_files(const std::string& candidate_path, const std::string& reference_path);

// "BLEU = 12.34, 50.0/20.0/10.0/5.0 (BP=1.000, ratio=1.000, hyp_len=9, ref_len=9)"
std::string format_bleu(const BleuResult& r);

}  // namespace semdef::eval

#endif  // SEMDEF_EVAL_BLEU_HPP_
