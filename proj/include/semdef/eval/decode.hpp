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
#ifndef SEMDEF_EVAL_DECODE_HPP_
#define SEMDEF_EVAL_DECODE_HPP_

#include <vector>

#include "semdef/models/model.hpp"

namespace semdef::eval {

inline constexpr std::size_t kDefaultMaxLen = 50;

struct Hypothesis {
  std::vector<TokenId> tokens;  // generated ids, EOS included when reached
  double log_prob = 0;          // sum of the chosen stepwise log-probabilities
  bool finished = false;        // EOS emitted or length cap hit

  // Tokens without the trailing EOS.
  std::vector<TokenId> definition() const;
};

// Encodes the input once and serves next-token log-probabilities for any
// prefix. PAD and BOS are never generatable (log-prob -inf).
template <typename T>
class StepScorer {
 public:
  StepScorer(const models::Model<T>& model, const models::ModelInput& in);

  std::vector<double> log_probs(const std::vector<TokenId>& generated) const;
  // Length cap that keeps BOS + generated within the model's decoder.
  std::size_t clamp_length(std::size_t max_len) const;

 private:
  const models::Model<T>& model_;
  models::ModelInput input_;
  std::vector<Tensor<T>> encoded_;
};

// Argmax at every step, ties to the lowest id.
template <typename T>
Hypothesis greedy_decode(const models::Model<T>& model, const models::ModelInput& in,
                         std::size_t max_len = kDefaultMaxLen);

struct BeamOptions {
  std::size_t beam = 4;
  std::size_t max_len = kDefaultMaxLen;
  bool length_norm = false;  // rank finished hypotheses by log_prob / length
};

// Beam search over log-probabilities. The result never scores below the
// greedy hypothesis under the ranking in use.
template <typename T>
Hypothesis beam_decode(const models::Model<T>& model, const models::ModelInput& in,
                       const BeamOptions& options);

// Ranking score of a hypothesis.
double hypothesis_score(const Hypothesis& h, bool length_norm);

}  // namespace semdef::eval

#endif  // SEMDEF_EVAL_DECODE_HPP_
