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
#include "semdef/eval/decode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semdef/core/error.hpp"

namespace semdef::eval {

std::vector<TokenId> Hypothesis::definition() const {
  std::vector<TokenId> out = tokens;
  if (!out.empty() && out.back() == kEos) out.pop_back();
  return out;
}

double hypothesis_score(const Hypothesis& h, bool length_norm) {
  if (!length_norm || h.tokens.empty()) return h.log_prob;
  return h.log_prob / static_cast<double>(h.tokens.size());
}

template <typename T>
StepScorer<T>::StepScorer(const models::Model<T>& model, const models::ModelInput& in)
    : model_(model), input_(in) {
  Graph<T> g(false);
  for (const auto& v : model.encode(g, in)) encoded_.push_back(v.value());
}

template <typename T>
std::vector<double> StepScorer<T>::log_probs(const std::vector<TokenId>& generated) const {
  Graph<T> g(false);
  std::vector<Var<T>> enc;
  for (const auto& t : encoded_) enc.push_back(g.constant(t));
  std::vector<TokenId> prefix{kBos};
  prefix.insert(prefix.end(), generated.begin(), generated.end());
  const Tensor<T>& logits = model_.decode(g, enc, input_, prefix).value();
  const std::size_t r = logits.rows() - 1, v = logits.cols();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t c = kEos; c < v; ++c) mx = std::max(mx, static_cast<double>(logits.at(r, c)));
  double z = 0;
  for (std::size_t c = kEos; c < v; ++c) z += std::exp(static_cast<double>(logits.at(r, c)) - mx);
  const double log_z = mx + std::log(z);
  // PAD and BOS are excluded from the normaliser as well.
  std::vector<double> out(v, -std::numeric_limits<double>::infinity());
  for (std::size_t c = kEos; c < v; ++c) out[c] = static_cast<double>(logits.at(r, c)) - log_z;
  return out;
}

template <typename T>
std::size_t StepScorer<T>::clamp_length(std::size_t max_len) const {
  if (max_len == 0) throw ConfigError("max_len must be positive");
  if (model_.config().arch == models::Arch::kSaam) {
    return std::min(max_len, model_.config().max_def_len);
  }
  return max_len;
}

template <typename T>
Hypothesis greedy_decode(const models::Model<T>& model, const models::ModelInput& in,
                         std::size_t max_len) {
  const StepScorer<T> scorer(model, in);
  max_len = scorer.clamp_length(max_len);
  Hypothesis h;
  while (!h.finished) {
    const auto lp = scorer.log_probs(h.tokens);
    std::size_t best = kEos;
    for (std::size_t c = kEos + 1; c < lp.size(); ++c)
      if (lp[c] > lp[best]) best = c;
    h.tokens.push_back(static_cast<TokenId>(best));
    h.log_prob += lp[best];
    h.finished = best == kEos || h.tokens.size() >= max_len;
  }
  return h;
}

namespace {

// Higher score first, then lexicographically smaller ids.
bool better(const Hypothesis& a, const Hypothesis& b, bool norm) {
  const double sa = hypothesis_score(a, norm), sb = hypothesis_score(b, norm);
  if (sa != sb) return sa > sb;
  return a.tokens < b.tokens;
}

}  // namespace

template <typename T>
Hypothesis beam_decode(const models::Model<T>& model, const models::ModelInput& in,
                       const BeamOptions& options) {
  if (options.beam == 0) throw ConfigError("beam must be at least 1");
  const StepScorer<T> scorer(model, in);
  const std::size_t max_len = scorer.clamp_length(options.max_len);
  std::vector<Hypothesis> alive{Hypothesis{}}, finished;
  while (!alive.empty()) {
    std::vector<Hypothesis> candidates;
    for (const auto& h : alive) {
      const auto lp = scorer.log_probs(h.tokens);
      for (std::size_t c = kEos; c < lp.size(); ++c) {
        Hypothesis next = h;
        next.tokens.push_back(static_cast<TokenId>(c));
        next.log_prob += lp[c];
        next.finished = c == kEos || next.tokens.size() >= max_len;
        candidates.push_back(std::move(next));
      }
    }
    // Candidates share a length here, so raw log-probabilities rank them.
    std::sort(candidates.begin(), candidates.end(),
              [](const Hypothesis& a, const Hypothesis& b) { return better(a, b, false); });
    if (candidates.size() > options.beam) candidates.resize(options.beam);
    alive.clear();
    for (auto& h : candidates) (h.finished ? finished : alive).push_back(std::move(h));
    if (!options.length_norm && !finished.empty() && !alive.empty()) {
      // Log-probabilities only fall as hypotheses grow.
      double best_done = finished.front().log_prob;
      for (const auto& h : finished) best_done = std::max(best_done, h.log_prob);
      double best_alive = alive.front().log_prob;
      for (const auto& h : alive) best_alive = std::max(best_alive, h.log_prob);
      if (best_done >= best_alive) break;
    }
  }
  Hypothesis best = greedy_decode(model, in, max_len);
  for (const auto& h : finished)
    if (better(h, best, options.length_norm)) best = h;
  return best;
}

template class StepScorer<float>;
template class StepScorer<double>;
template Hypothesis greedy_decode(const models::Model<float>&, const models::ModelInput&, std::size_t);
template Hypothesis greedy_decode(const models::Model<double>&, const models::ModelInput&, std::size_t);
template Hypothesis beam_decode(const models::Model<float>&, const models::ModelInput&, const BeamOptions&);
template Hypothesis beam_decode(const models::Model<double>&, const models::ModelInput&, const BeamOptions&);

}  // namespace semdef::eval
