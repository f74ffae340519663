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
// Acceptance suite: one PASS/FAIL line per criterion.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "semdef/attention/adaptive.hpp"
#include "semdef/cli/cli.hpp"
#include "semdef/core/error.hpp"
#include "semdef/core/random.hpp"
#include "semdef/data/batch.hpp"
#include "semdef/data/dataset.hpp"
#include "semdef/data/vocab.hpp"
#include "semdef/eval/bleu.hpp"
#include "semdef/eval/decode.hpp"
#include "semdef/models/checkpoint.hpp"
#include "semdef/models/training.hpp"
#include "semdef/nn/layers.hpp"
#include "support/gradcheck.hpp"
#include "support/synthetic.hpp"

namespace semdef::acceptance {
namespace {

using models::Arch;
using models::ModelConfig;
using models::ModelInput;
using testing::check_parameters;
using testing::GradCheckResult;
using testing::probe_loss;
using testing::random_tensor;
using D = double;

// Pinned tolerances and limits.
constexpr double kGradTol = 1e-4;
constexpr int kGradSeeds = 20;
constexpr double kGradSeconds = 120;
constexpr double kNormTol = 1e-6;
constexpr double kPaddingTol = 1e-6;
constexpr double kOverfitTokenAcc = 0.99;
constexpr std::size_t kOverfitExact = 30;
constexpr std::size_t kOverfitTriples = 32;
constexpr std::size_t kOverfitVocab = 60;
constexpr double kOverfitSeconds = 300;
constexpr std::size_t kSignalClasses = 4;
constexpr double kSignalAcc = 0.95;
constexpr double kSignalChanceSlack = 0.05;
constexpr double kSignalSeconds = 300;
constexpr double kBleuGolden = 49.73;  // perl multi-bleu.perl bleu_ref.txt < bleu_hyp.txt
constexpr double kBleuTol = 0.01;
constexpr std::size_t kAlignLexicons = 1000;
constexpr std::size_t kTableWords = 30052;
constexpr std::size_t kTableSplit[3] = {27047, 1503, 1502};

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ModelConfig tiny(Arch arch, std::uint64_t seed) {
  ModelConfig c = ModelConfig::defaults(arch);
  c.d_model = 8;
  c.d_hidden = 16;
  c.n_head = 2;
  c.n_layer = 2;
  c.rnn_layers = 2;
  c.rnn_hidden = 8;
  c.max_sememes = 6;
  c.max_def_len = 8;
  c.char_dim = 4;
  c.char_filters = 3;
  c.char_widths = {2, 3};
  c.freeze_embeddings = false;
  c.seed = seed;
  return c;
}

const Arch kArchs[] = {Arch::kBaseline, Arch::kAam, Arch::kSaam};
constexpr models::VocabSizes kSizes{12, 14, 10};

TokenId draw(Rng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<TokenId>(lo + rng() % (hi - lo));
}

ModelInput random_input(Rng& rng, const models::VocabSizes& s, std::size_t sememes) {
  ModelInput in;
  in.word = draw(rng, kNumSpecials, s.source);
  for (std::size_t k = 1 + rng() % 4; k > 0; --k) in.chars.push_back(draw(rng, kNumSpecials, s.chars));
  for (std::size_t k = 0; k < sememes; ++k) in.sememes.push_back(draw(rng, kNumSpecials, s.source));
  return in;
}

std::vector<TokenId> random_prefix(Rng& rng, std::size_t len, std::size_t target) {
  std::vector<TokenId> p{kBos};
  while (p.size() < len) p.push_back(draw(rng, kEos, target));
  return p;
}

template <typename T>
Tensor<T> logits_of(const models::Model<T>& m, const ModelInput& in, const std::vector<TokenId>& prefix) {
  Graph<T> g(false);
  return m.logits(g, in, prefix).value();
}

double max_abs_diff(const Tensor<D>& a, const Tensor<D>& b) {
  if (a.shape() != b.shape()) return std::numeric_limits<double>::infinity();
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

// ======================================================== 1. gradients

struct GradTally {
  double worst = 0;
  std::size_t checks = 0;
  std::string where;

  void add(const std::string& name, const GradCheckResult& r) {
    checks += r.checked;
    if (r.max_rel_error > worst) {
      worst = r.max_rel_error;
      where = name + " " + r.worst;
    }
  }
};

// Inputs are registered as trainable parameters so one check covers both.
Var<D> leaf(Graph<D>& g, ParameterStore<D>& s, const std::string& name) { return g.parameter(s.at(name)); }

void layer_gradients(std::uint64_t seed, GradTally& tally) {
  Rng rng(seed);
  auto check = [&](const std::string& name, ParameterStore<D>& store, const testing::ParamLoss& f) {
    Rng pick(seed * 31 + 7);
    tally.add(name, check_parameters(store, f, pick));
  };
  {
    ParameterStore<D> s;
    nn::EmbeddingTable<D> emb(s, "emb", 6, 4, false, rng);
    const std::vector<TokenId> ids{1, 3, 3, 5};
    check("embedding", s, [&](Graph<D>& g) { return probe_loss(emb.lookup(g, ids), seed); });
  }
  {
    ParameterStore<D> s;
    nn::PositionTable<D> pos(s, "pos", 5, 3, rng);
    s.add("x", random_tensor({4, 3}, rng));
    check("position", s, [&](Graph<D>& g) { return probe_loss(pos.add_to(leaf(g, s, "x"), true), seed); });
  }
  {
    ParameterStore<D> s;
    nn::Linear<D> lin(s, "lin", 4, 3, rng);
    nn::LayerNorm<D> ln(s, "ln", 3);
    for (std::size_t i = 0; i < 3; ++i) {
      s.at("ln.gain").value[i] = 1 + 0.3 * i;
      s.at("ln.bias").value[i] = 0.1 * i;
    }
    s.add("x", random_tensor({3, 4}, rng));
    check("linear+layer_norm", s, [&](Graph<D>& g) { return probe_loss(ln(lin(leaf(g, s, "x"))), seed); });
  }
  {
    ParameterStore<D> s;
    nn::CharCnn<D> cnn(s, "cnn", 7, 3, {1, 2, 3}, 4, rng);
    const std::vector<TokenId> chars{4, 6, 5, 4, 6};
    check("char_cnn", s, [&](Graph<D>& g) { return probe_loss(cnn(g, chars), seed); });
  }
  {
    ParameterStore<D> s;
    nn::StackedLstm<D> lstm(s, "lstm", 3, 4, 2, rng);
    s.add("x", random_tensor({5, 3}, rng));
    check("lstm", s, [&](Graph<D>& g) {
      auto st = lstm.zero_state(g);
      const Var<D> x = leaf(g, s, "x");
      std::vector<Var<D>> hs;
      for (std::size_t t = 0; t < 5; ++t) {
        st = lstm.step(slice_rows(x, t, 1), st);
        hs.push_back(st.back().h);
        hs.push_back(st.back().c);
      }
      return probe_loss(concat_rows(std::span<const Var<D>>(hs)), seed);
    });
  }
  {
    ParameterStore<D> s;
    nn::BiLstmEncoder<D> enc(s, "bilstm", 3, 2, rng);
    s.add("x", random_tensor({4, 3}, rng));
    check("bilstm", s, [&](Graph<D>& g) { return probe_loss(enc(leaf(g, s, "x")), seed); });
  }
  {
    ParameterStore<D> s;
    nn::MultiHeadAttention<D> mha(s, "mha", 4, 2, rng);
    nn::PositionWiseFfn<D> ffn(s, "ffn", 4, 6, rng);
    s.add("q", random_tensor({3, 4}, rng));
    s.add("kv", random_tensor({5, 4}, rng));
    const Mask mask = nn::key_mask(3, {1, 1, 0, 1, 1});
    check("multi_head_attention+ffn", s, [&](Graph<D>& g) {
      const Var<D> kv = leaf(g, s, "kv");
      return probe_loss(ffn(mha(leaf(g, s, "q"), kv, kv, mask).output), seed);
    });
  }
  {
    ParameterStore<D> s;
    nn::Linear<D> gate(s, "gate", 3 + 4, 4, rng);
    s.add("h", random_tensor({3, 4}, rng));
    s.add("z", random_tensor({1, 4}, rng));
    s.add("y", random_tensor({1, 3}, rng));
    s.add("w_hat", random_tensor({8, 1}, rng));
    s.add("w_c", random_tensor({8, 1}, rng));
    check("sememe_attention+gate+mix", s, [&](Graph<D>& g) {
      const Var<D> z = leaf(g, s, "z");
      const auto a = attn::sememe_soft_attention(leaf(g, s, "h"), z, leaf(g, s, "w_hat"));
      const Var<D> o = attn::lm_gate_context(leaf(g, s, "y"), z, gate);
      const auto mix = attn::adaptive_mix(o, a.context, z, leaf(g, s, "w_c"));
      return probe_loss(concat_cols({mix.c, mix.beta, a.alpha}), seed);
    });
  }
  for (bool ablate : {false, true}) {
    ParameterStore<D> s;
    attn::AdaptiveMultiHeadLayer<D> layer(s, "layer", 4, 2, rng);
    s.add("z", random_tensor({3, 4}, rng));
    s.add("h", random_tensor({4, 4}, rng));
    check(ablate ? "adaptive_layer(ablated)" : "adaptive_layer", s, [&](Graph<D>& g) {
      return probe_loss(layer(leaf(g, s, "z"), leaf(g, s, "h"), {1, 1, 1, 0}, ablate).output, seed);
    });
  }
}

data::Example random_example(Rng& rng, const models::VocabSizes& s) {
  ModelInput in = random_input(rng, s, 1 + rng() % 3);
  data::Example ex{in.word, in.chars, in.sememes, {}};
  for (std::size_t k = 1 + rng() % 4; k > 0; --k) ex.definition.push_back(draw(rng, kNumSpecials, s.target));
  return ex;
}

Verdict criterion_gradients() {
  Stopwatch clock;
  GradTally tally;
  for (int seed = 0; seed < kGradSeeds; ++seed) {
    layer_gradients(static_cast<std::uint64_t>(seed), tally);
    for (Arch arch : kArchs) {
      auto m = models::make_model<D>(tiny(arch, seed), kSizes);
      Rng rng(seed);
      const std::vector<data::Example> exs{random_example(rng, kSizes), random_example(rng, kSizes)};
      const data::Batch batch = data::make_batch(exs);
      tally.add(models::arch_name(arch), check_parameters(
                                             m->params(),
                                             [&](Graph<D>& g) { return models::batch_loss(g, *m, batch, 0.1).loss; },
                                             rng, 3));
    }
  }
  const double secs = clock.seconds();
  Verdict v;
  v.require(tally.worst < kGradTol, "max rel error " + fmt("%.3g", tally.worst) + " at " + tally.where);
  v.require(secs < kGradSeconds, "took " + fmt("%.1f", secs) + " s");
  v.detail = "max rel error " + fmt("%.2e", tally.worst) + " over " + std::to_string(tally.checks) +
             " checks (14 layer groups + 3 models, d=8, 2 heads, 2 layers, " + std::to_string(kGradSeeds) +
             " seeds), " + fmt("%.1f", secs) + " s" + (v.detail.empty() ? "" : " -- " + v.detail);
  return v;
}

// ======================================================== 2. invariants

Verdict criterion_invariants() {
  Verdict v;
  double norm_err = 0, row_err = 0, pad_err = 0, shift_err = 0;
  double beta_lo = 1, beta_hi = 0;
  std::size_t causal_violations = 0, negatives = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    // Attention weights: multi-head (masked) and sememe attention.
    {
      ParameterStore<D> s;
      nn::MultiHeadAttention<D> mha(s, "mha", 8, 2, rng);
      Graph<D> g(false);
      const Var<D> q = g.constant(random_tensor({4, 8}, rng, -3, 3));
      const Var<D> kv = g.constant(random_tensor({6, 8}, rng, -3, 3));
      for (const auto& w : mha(q, kv, kv, nn::key_mask(4, {1, 0, 1, 1, 0, 1})).weights) {
        for (std::size_t r = 0; r < w.rows(); ++r) {
          double total = 0;
          for (std::size_t c = 0; c < w.cols(); ++c) total += w.value().at(r, c);
          norm_err = std::max(norm_err, std::abs(total - 1));
        }
      }
      const auto a = attn::sememe_soft_attention(g.constant(random_tensor({5, 4}, rng, -3, 3)),
                                                 g.constant(random_tensor({1, 3}, rng)),
                                                 g.constant(random_tensor({7, 1}, rng, -3, 3)));
      double total = 0;
      for (double x : a.alpha.value().data()) total += x;
      norm_err = std::max(norm_err, std::abs(total - 1));
    }
    // beta in (0, 1); the context terms shared by both scores cancel.
    {
      Graph<D> g(false);
      const Var<D> o = g.constant(random_tensor({3, 4}, rng, -2, 2));
      const Var<D> c = g.constant(random_tensor({3, 4}, rng, -2, 2));
      const Var<D> w = g.constant(random_tensor({9, 1}, rng, -2, 2));
      const auto m1 = attn::adaptive_mix(o, c, g.constant(random_tensor({3, 5}, rng, -5, 5)), w);
      const auto m2 = attn::adaptive_mix(o, c, g.constant(random_tensor({3, 5}, rng, -5, 5)), w);
      for (std::size_t r = 0; r < 3; ++r) {
        const double b = m1.beta.value()[r];
        beta_lo = std::min(beta_lo, b);
        beta_hi = std::max(beta_hi, b);
        shift_err = std::max(shift_err, std::abs(b - m2.beta.value()[r]));
      }
    }
    // Model outputs.
    for (Arch arch : kArchs) {
      auto m = models::make_model<D>(tiny(arch, seed), kSizes);
      const ModelInput in = random_input(rng, kSizes, 3);
      const auto prefix = random_prefix(rng, 6, kSizes.target);
      Graph<D> g(false);
      const auto& p = softmax(m->logits(g, in, prefix)).value();
      for (std::size_t r = 0; r < p.rows(); ++r) {
        double total = 0;
        for (std::size_t c = 0; c < p.cols(); ++c) {
          negatives += p.at(r, c) < 0;
          total += p.at(r, c);
        }
        row_err = std::max(row_err, std::abs(total - 1));
      }
      if (arch != Arch::kSaam) continue;
      std::vector<models::TraceRecord> trace;
      {
        Graph<D> h(false);
        m->logits(h, in, prefix, &trace);
      }
      for (const auto& r : trace) {
        beta_lo = std::min(beta_lo, *r.beta);
        beta_hi = std::max(beta_hi, *r.beta);
        double total = 0;
        for (double a : r.alpha) total += a;
        norm_err = std::max(norm_err, std::abs(total - 1));
      }
      // Causality: rows before t ignore tokens from t on.
      const auto base = logits_of(*m, in, prefix);
      for (std::size_t t = 1; t < prefix.size(); ++t) {
        auto q = prefix;
        for (std::size_t u = t; u < q.size(); ++u) q[u] = draw(rng, kEos, kSizes.target);
        const auto other = logits_of(*m, in, q);
        for (std::size_t r = 0; r < t; ++r)
          for (std::size_t c = 0; c < base.cols(); ++c) causal_violations += base.at(r, c) != other.at(r, c);
      }
      // Padding: masked slots appended to the sememe list.
      ModelInput padded = in;
      padded.sememe_visible.assign(in.sememes.size(), 1);
      for (int k = 0; k < 3; ++k) {
        padded.sememes.push_back(draw(rng, 0, kSizes.source));
        padded.sememe_visible.push_back(0);
      }
      pad_err = std::max(pad_err, max_abs_diff(base, logits_of(*m, padded, prefix)));
    }
  }
  v.require(norm_err <= kNormTol, "attention normalisation off by " + fmt("%.3g", norm_err));
  v.require(beta_lo > 0 && beta_hi < 1, "beta left (0, 1)");
  v.require(shift_err <= 1e-12, "beta moved by " + fmt("%.3g", shift_err) + " under a shared score shift");
  v.require(causal_violations == 0, std::to_string(causal_violations) + " causal violations");
  v.require(pad_err <= kPaddingTol, "padding changed logits by " + fmt("%.3g", pad_err));
  v.require(row_err <= kNormTol && negatives == 0, "probability rows off by " + fmt("%.3g", row_err));
  const std::string summary = "attention sums within " + fmt("%.1e", norm_err) + ", beta in [" +
                              fmt("%.2e", beta_lo) + ", 1 - " + fmt("%.2e", 1 - beta_hi) + "], shift drift " +
                              fmt("%.1e", shift_err) + ", causal violations " +
                              std::to_string(causal_violations) + ", padding drift " + fmt("%.1e", pad_err) +
                              ", probability rows within " + fmt("%.1e", row_err);
  v.detail = summary + (v.detail.empty() ? "" : " -- " + v.detail);
  return v;
}

// ======================================================== 3 and 7. overfit

struct Corpus {
  std::vector<data::Entry> entries;
  data::Vocabularies vocabs;
  std::vector<data::Example> examples;
};

Corpus overfit_corpus(std::uint64_t seed) {
  Rng rng(seed);
  Corpus c;
  for (std::size_t i = 0; i < kOverfitTriples; ++i) {
    data::Entry e;
    e.word = "词" + std::to_string(i);
    for (std::size_t k = 1 + rng() % 3; k > 0; --k) e.sememes.push_back("S" + std::to_string(rng() % 12));
    for (std::size_t k = 2 + rng() % 4; k > 0; --k) e.definition.push_back("t" + std::to_string(rng() % 20));
    c.entries.push_back(std::move(e));
  }
  c.vocabs = data::Vocabularies::build(c.entries, 1);
  c.examples = data::encode_entries(c.entries, c.vocabs, 8, 7);
  return c;
}

ModelConfig overfit_config(Arch arch) {
  ModelConfig c = ModelConfig::defaults(arch);
  c.d_model = 32;
  c.d_hidden = 64;
  c.n_head = 4;
  c.n_layer = 2;
  c.rnn_layers = 2;
  c.rnn_hidden = 64;
  c.max_sememes = 8;
  c.max_def_len = 8;
  c.batch = kOverfitTriples;
  c.lr = 5e-3;
  c.epochs = arch == Arch::kSaam ? 300 : 500;
  c.freeze_embeddings = false;
  c.seed = 2026;
  return c;
}

struct OverfitRun {
  std::vector<double> curve;
  std::vector<std::vector<TokenId>> generated;
  double token_accuracy = 0;
  std::size_t exact = 0;
  std::size_t steps = 0;
  double seconds = 0;
};

OverfitRun overfit_run(Arch arch, const Corpus& corpus) {
  Stopwatch clock;
  const ModelConfig cfg = overfit_config(arch);
  auto m = models::make_model<float>(cfg, models::vocab_sizes(corpus.vocabs));
  OverfitRun run;
  const auto result = models::train(*m, corpus.examples);
  for (const auto& r : result.log) run.curve.push_back(r.train_loss);
  run.steps = result.steps;
  run.token_accuracy = models::evaluate(*m, corpus.examples, cfg.batch).token_accuracy;
  for (const auto& ex : corpus.examples) {
    run.generated.push_back(eval::greedy_decode(*m, models::input_from_example(ex)).definition());
    run.exact += run.generated.back() == ex.definition;
  }
  run.seconds = clock.seconds();
  return run;
}

Verdict criterion_overfit(const Corpus& corpus, std::map<Arch, OverfitRun>& runs) {
  Verdict v;
  const std::size_t vs = corpus.vocabs.source.size(), vt = corpus.vocabs.target.size();
  v.require(vs <= kOverfitVocab && vt <= kOverfitVocab, "vocabulary too large");
  std::string summary = std::to_string(kOverfitTriples) + " triples, vocab " + std::to_string(vs) + "/" +
                        std::to_string(vt);
  for (Arch arch : {Arch::kAam, Arch::kSaam}) {
    const OverfitRun run = overfit_run(arch, corpus);
    const std::string n = models::arch_name(arch);
    v.require(run.token_accuracy >= kOverfitTokenAcc, n + " token accuracy " + fmt("%.4f", run.token_accuracy));
    v.require(run.exact >= kOverfitExact, n + " exact " + std::to_string(run.exact));
    v.require(run.seconds < kOverfitSeconds, n + " took " + fmt("%.1f", run.seconds) + " s");
    summary += "; " + n + ": token accuracy " + fmt("%.4f", run.token_accuracy) + ", greedy exact " +
               std::to_string(run.exact) + "/" + std::to_string(kOverfitTriples) + " after " +
               std::to_string(run.steps) + " steps, " + fmt("%.1f", run.seconds) + " s";
    runs[arch] = run;
  }
  v.detail = summary + (v.detail.empty() ? "" : " -- " + v.detail);
  return v;
}

Verdict criterion_determinism(const Corpus& corpus, const std::map<Arch, OverfitRun>& first) {
  Verdict v;
  std::string summary;
  for (Arch arch : {Arch::kAam, Arch::kSaam}) {
    const OverfitRun again = overfit_run(arch, corpus);
    const OverfitRun& a = first.at(arch);
    const std::string n = models::arch_name(arch);
    v.require(a.curve == again.curve, n + " loss curves differ");
    v.require(a.generated == again.generated, n + " generated text differs");
    summary += (summary.empty() ? "" : "; ") + n + ": " + std::to_string(a.curve.size()) +
               "-step loss curve and " + std::to_string(a.generated.size()) + " generations " +
               (a.curve == again.curve && a.generated == again.generated ? "identical" : "differ");
  }
  v.detail = summary + (v.detail.empty() ? "" : " -- " + v.detail);
  return v;
}

// ======================================================== 4. sememe signal

struct SignalData {
  std::vector<data::Entry> train, test;
};

// The definition is D_k for the single key sememe K_k among distractors.
// Test headwords never occur in training.
SignalData signal_data(std::uint64_t seed) {
  Rng rng(seed);
  SignalData d;
  auto make = [&](const std::string& word, std::size_t k) {
    data::Entry e;
    e.word = word;
    e.sememes = {"K" + std::to_string(k)};
    std::set<std::size_t> used;
    while (used.size() < 2) used.insert(rng() % 8);
    for (std::size_t x : used) e.sememes.push_back("X" + std::to_string(x));
    portable_shuffle(e.sememes.begin(), e.sememes.end(), rng);
    e.definition = {"D" + std::to_string(k)};
    return e;
  };
  for (std::size_t i = 0; i < 800; ++i) d.train.push_back(make("w" + std::to_string(rng() % 150), i % kSignalClasses));
  for (std::size_t i = 0; i < 400; ++i) d.test.push_back(make("held" + std::to_string(i), i % kSignalClasses));
  return d;
}

double signal_accuracy(bool use_sememes, const SignalData& d, std::size_t& steps) {
  ModelConfig c = ModelConfig::defaults(Arch::kSaam);
  c.use_sememes = use_sememes;
  c.d_model = 32;
  c.d_hidden = 64;
  c.n_head = 4;
  c.n_layer = 2;
  c.max_sememes = 8;
  c.max_def_len = 4;
  c.batch = 32;
  c.lr = 3e-3;
  c.epochs = 12;
  c.min_count = 2;
  c.freeze_embeddings = false;
  c.seed = 44;
  const auto vocabs = data::Vocabularies::build(d.train, c.min_count);
  auto m = models::make_model<float>(c, models::vocab_sizes(vocabs));
  steps = models::train(*m, data::encode_entries(d.train, vocabs, c.max_sememes, 3)).steps;
  std::size_t hits = 0;
  for (const auto& e : d.test) {
    const auto ex = data::encode_entry(e, vocabs, c.max_sememes, 3);
    const auto h = eval::greedy_decode(*m, models::input_from_example(ex), 3);
    hits += h.tokens.front() == ex.definition.front();
  }
  return static_cast<double>(hits) / static_cast<double>(d.test.size());
}

Verdict criterion_sememe_signal() {
  Stopwatch clock;
  const SignalData d = signal_data(4);
  std::size_t steps_with = 0, steps_without = 0;
  const double with = signal_accuracy(true, d, steps_with);
  const double without = signal_accuracy(false, d, steps_without);
  const double secs = clock.seconds();
  const double chance = 1.0 / kSignalClasses;
  Verdict v;
  v.require(with >= kSignalAcc, "with sememes " + fmt("%.4f", with));
  v.require(without <= chance + kSignalChanceSlack, "without sememes " + fmt("%.4f", without));
  v.require(secs < kSignalSeconds, "took " + fmt("%.1f", secs) + " s");
  v.detail = "K=" + std::to_string(kSignalClasses) + ", " + std::to_string(d.test.size()) +
             " held-out headwords: saam " + fmt("%.4f", with) + " (>= " + fmt("%.2f", kSignalAcc) +
             "), -sememes " + fmt("%.4f", without) + " (<= " + fmt("%.2f", chance + kSignalChanceSlack) + "), " +
             std::to_string(steps_with) + " steps each, " + fmt("%.1f", secs) + " s" +
             (v.detail.empty() ? "" : " -- " + v.detail);
  return v;
}

// ======================================================== 5. ablation mechanics

struct Scratch {
  std::filesystem::path dir;
  Scratch() {
    dir = std::filesystem::temp_directory_path() / ("semdef_acceptance_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
  }
  ~Scratch() { std::filesystem::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "semdef");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

// Trains through the command line with one ablation flag and reloads it.
models::LoadedModel cli_model(const Scratch& s, const std::string& flag) {
  const std::string out = s.path("ckpt" + flag);
  const int code = cli({"train", "--config", s.path("tiny.cfg"), "--data", s.path("train.jsonl"), "--out", out, flag});
  if (code != cli::kExitOk) throw DataError("train " + flag + " exited with " + std::to_string(code));
  return models::load_model_dir(out);
}

Verdict criterion_ablations() {
  Verdict v;
  Scratch s;
  {
    std::mt19937_64 rng(5);
    std::vector<data::Entry> entries;
    for (auto& e : testing::random_entries(rng, 80))
      if (!e.sememes.empty()) entries.push_back(std::move(e));
    data::save_dataset(s.path("train.jsonl"), entries);
    std::ofstream cfg(s.path("tiny.cfg"));
    cfg << "arch = saam\nd_model = 8\nd_hidden = 16\nn_head = 2\nn_layer = 2\nepochs = 2\nbatch = 8\n"
           "max_sememes = 8\nfreeze_embeddings = false\n";
  }
  std::size_t pos_mismatch = 0, sem_mismatch = 0, cmp = 0;
  double adaptive_err = 0;
  bool beta_gone = true;

  // --no-position: the source table is never added.
  {
    const auto m = cli_model(s, "--no-position");
    v.require(!m.config.use_position, "--no-position not stored");
    Graph<float> g(false);
    const Var<float> x = slice_rows(g.constant(m.model->params().at("src_emb").value), kNumSpecials, 5);
    ParameterStore<float> scratch;
    Rng rng(1);
    nn::PositionTable<float> table(scratch, "pos", 8, m.config.d_model, rng);
    pos_mismatch += !(table.add_to(x, false).value() == x.value());
    // Same weights with the flag off and a zero table give identical logits.
    ModelConfig on = m.config;
    on.use_position = true;
    auto with = models::make_model<float>(on, models::vocab_sizes(m.vocabs));
    models::copy_parameters(*m.model, *with);
    with->params().at("src_pos").value.fill(0.0f);
    Rng r(2);
    for (int trial = 0; trial < 20; ++trial) {
      const models::VocabSizes sz = models::vocab_sizes(m.vocabs);
      const ModelInput in = random_input(r, sz, 1 + trial % 5);
      const auto p = random_prefix(r, 5, sz.target);
      pos_mismatch += !(logits_of(*m.model, in, p) == logits_of(*with, in, p));
      ++cmp;
    }
  }
  // --no-sememes: logits ignore the sememe list entirely.
  {
    const auto m = cli_model(s, "--no-sememes");
    v.require(!m.config.use_sememes, "--no-sememes not stored");
    const models::VocabSizes sz = models::vocab_sizes(m.vocabs);
    Rng r(3);
    for (int trial = 0; trial < 20; ++trial) {
      ModelInput a = random_input(r, sz, 0), b = a;
      b.sememes = random_input(r, sz, 1 + trial % 6).sememes;
      const auto p = random_prefix(r, 5, sz.target);
      sem_mismatch += !(logits_of(*m.model, a, p) == logits_of(*m.model, b, p));
    }
  }
  // --no-adaptive: every decoder sublayer is LN(o + c_hat) with no gate.
  {
    const auto m = cli_model(s, "--no-adaptive");
    v.require(!m.config.use_adaptive, "--no-adaptive not stored");
    models::ModelConfig dc = m.config;
    auto model = models::make_model<D>(dc, models::vocab_sizes(m.vocabs));
    models::copy_parameters(*m.model, *model);
    const std::size_t d = dc.d_model;
    // Crafted inputs: random decoder states against a random encoder memory.
    ParameterStore<D> ref;
    Rng rng(4);
    attn::AdaptiveMultiHeadLayer<D> layer(ref, "dec0", d, dc.n_head, rng);
    for (auto& p : ref) p->value = model->params().at(p->name).value;
    nn::MultiHeadAttention<D> self(ref, "std.self", d, dc.n_head, rng), cross(ref, "std.enc", d, dc.n_head, rng);
    nn::LayerNorm<D> n1(ref, "std.n1", d), n2(ref, "std.n2", d);
    auto copy = [&](const std::string& from, const std::string& to) {
      for (auto& p : ref)
        if (p->name.rfind(to, 0) == 0) p->value = model->params().at(from + p->name.substr(to.size())).value;
    };
    copy("dec0.self", "std.self");
    copy("dec0.enc", "std.enc");
    copy("dec0.self_norm", "std.n1");
    copy("dec0.out_norm", "std.n2");
    for (int trial = 0; trial < 20; ++trial) {
      Graph<D> g(false);
      const Var<D> z = g.constant(random_tensor({5, d}, rng, -2, 2));
      const Var<D> h = g.constant(random_tensor({4, d}, rng, -2, 2));
      const std::vector<std::uint8_t> vis{1, 1, 0, 1};
      const auto out = layer(z, h, vis, true);
      beta_gone = beta_gone && !out.beta.valid() && !out.mixed.valid();
      const Var<D> o = n1(z + self(z, z, z, nn::causal_mask(5)).output);
      const Var<D> standard = n2(o + cross(o, h, h, nn::key_mask(5, vis)).output);
      adaptive_err = std::max(adaptive_err, max_abs_diff(out.output.value(), standard.value()));
    }
    std::vector<models::TraceRecord> trace;
    Rng r(6);
    const models::VocabSizes sz = models::vocab_sizes(m.vocabs);
    Graph<float> g(false);
    m.model->logits(g, random_input(r, sz, 2), random_prefix(r, 4, sz.target), &trace);
    for (const auto& t : trace) beta_gone = beta_gone && !t.beta.has_value();
  }
  v.require(pos_mismatch == 0, "--no-position mismatches: " + std::to_string(pos_mismatch));
  v.require(sem_mismatch == 0, "--no-sememes mismatches: " + std::to_string(sem_mismatch));
  v.require(adaptive_err <= 1e-12, "--no-adaptive differs from the standard sublayer by " + fmt("%.3g", adaptive_err));
  v.require(beta_gone, "--no-adaptive still produces a gate");
  v.detail = "--no-position exact identity (" + std::to_string(cmp) + " comparisons against a zeroed table, " +
             std::to_string(pos_mismatch) + " mismatches); --no-sememes exact invariance over 20 sememe lists (" +
             std::to_string(sem_mismatch) + " mismatches); --no-adaptive equals LN(o + MHA(o, H, H)) within " +
             fmt("%.1e", adaptive_err) + ", gate " + (beta_gone ? "absent" : "present") +
             (v.detail.empty() ? "" : " -- " + v.detail);
  return v;
}

// ======================================================== 6. oracles

data::SememeLexicon lexicon_of(const std::map<std::string, std::vector<std::vector<std::string>>>& m) {
  data::SememeLexicon lex;
  for (const auto& [w, g] : m) lex.add(w, g);
  return lex;
}

// Brute force: full set arithmetic over every sense.
std::vector<data::Entry> align_oracle(const testing::AlignmentInstance& inst) {
  std::vector<data::Entry> out;
  for (const auto& def : inst.definitions) {
    auto it = inst.lexicon.find(def.word);
    if (it == inst.lexicon.end()) continue;
    std::set<std::string> evidence;
    for (const auto& t : def.tokens) {
      auto jt = inst.token_lexicon.find(t);
      if (jt == inst.token_lexicon.end()) continue;
      for (const auto& g : jt->second) evidence.insert(g.begin(), g.end());
    }
    std::size_t best = 0, best_i = 0;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      const std::set<std::string> group(it->second[i].begin(), it->second[i].end());
      std::vector<std::string> common;
      std::set_intersection(group.begin(), group.end(), evidence.begin(), evidence.end(), std::back_inserter(common));
      if (common.size() > best) {
        best = common.size();
        best_i = i;
      }
    }
    if (best == 0) continue;
    out.push_back(data::Entry{def.word, it->second[best_i], def.tokens});
  }
  return out;
}

double sequence_log_prob(const models::Model<D>& m, const ModelInput& in, const std::vector<TokenId>& tokens) {
  std::vector<TokenId> prefix{kBos};
  prefix.insert(prefix.end(), tokens.begin(), tokens.end() - 1);
  const auto logits = logits_of(m, in, prefix);
  long double total = 0;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    long double z = 0;
    for (std::size_t c = kEos; c < logits.cols(); ++c) z += std::exp(static_cast<long double>(logits.at(t, c)));
    total += logits.at(t, tokens[t]) - std::log(z);
  }
  return static_cast<double>(total);
}

void enumerate(std::size_t vocab, std::size_t max_len, std::vector<TokenId>& cur,
               const std::function<void(const std::vector<TokenId>&)>& visit) {
  for (TokenId c = kEos; c < vocab; ++c) {
    cur.push_back(c);
    if (c == kEos || cur.size() == max_len) {
      visit(cur);
    } else {
      enumerate(vocab, max_len, cur, visit);
    }
    cur.pop_back();
  }
}

Verdict criterion_oracles() {
  Verdict v;
  // Alignment.
  std::size_t align_mismatch = 0, ties = 0, skips = 0;
  std::mt19937_64 arng(2026);
  for (std::size_t i = 0; i < kAlignLexicons; ++i) {
    const auto inst = testing::random_alignment_instance(arng);
    const auto report = data::align_entries(inst.definitions, lexicon_of(inst.lexicon), lexicon_of(inst.token_lexicon));
    const auto want = align_oracle(inst);
    align_mismatch += report.entries != want;
    ties += inst.has_tie;
    skips += report.missing_word + report.no_overlap > 0;
  }
  v.require(align_mismatch == 0, std::to_string(align_mismatch) + " alignment mismatches");
  v.require(ties > 0 && skips > 0, "alignment instances never exercised ties or skips");

  // Beam against exhaustive search: four generatable ids, three steps.
  const models::VocabSizes small{10, 6, 8};
  std::size_t beam_mismatch = 0, instances = 0, greedy_worse = 0;
  for (Arch arch : kArchs) {
    for (int seed = 0; seed < 20; ++seed) {
      auto m = models::make_model<D>(tiny(arch, seed), small);
      Rng rng(seed + 1000);
      std::uniform_real_distribution<double> u(-2, 2);
      for (auto& x : m->params().at("out.weight").value.data()) x = u(rng);
      const ModelInput in = random_input(rng, small, 2);
      std::vector<TokenId> best, cur;
      double best_lp = -std::numeric_limits<double>::infinity();
      enumerate(small.target, 3, cur, [&](const std::vector<TokenId>& seq) {
        const double lp = sequence_log_prob(*m, in, seq);
        if (lp > best_lp) {
          best_lp = lp;
          best = seq;
        }
      });
      const auto h = eval::beam_decode(*m, in, eval::BeamOptions{64, 3, false});
      beam_mismatch += h.tokens != best || std::abs(h.log_prob - best_lp) > 1e-9;
      greedy_worse += eval::greedy_decode(*m, in, 3).tokens != best;
      ++instances;
    }
  }
  v.require(beam_mismatch == 0, std::to_string(beam_mismatch) + " beam/exhaustive mismatches");

  // BLEU golden fixture.
  const std::string fixtures = SEMDEF_FIXTURE_DIR;
  const double bleu = eval::bleu_files(fixtures + "/bleu_hyp.txt", fixtures + "/bleu_ref.txt").bleu;
  v.require(std::abs(bleu - kBleuGolden) <= kBleuTol, "BLEU " + fmt("%.4f", bleu));

  // Split on the corpus word count.
  std::vector<data::Entry> entries;
  for (std::size_t w = 0; w < kTableWords; ++w) {
    for (std::size_t k = 0; k < 1 + w % 4; ++k) entries.push_back(data::Entry{"w" + std::to_string(w), {"s"}, {"d"}});
  }
  const auto split = data::split_dataset(entries, 7);
  std::set<std::string> parts[3];
  for (const auto& e : split.train) parts[0].insert(e.word);
  for (const auto& e : split.valid) parts[1].insert(e.word);
  for (const auto& e : split.test) parts[2].insert(e.word);
  std::size_t overlap = 0;
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b)
      for (const auto& w : parts[a]) overlap += parts[b].count(w);
  bool sizes_ok = split.train.size() + split.valid.size() + split.test.size() == entries.size();
  for (int i = 0; i < 3; ++i) {
    const long diff = static_cast<long>(parts[i].size()) - static_cast<long>(kTableSplit[i]);
    sizes_ok = sizes_ok && std::abs(diff) <= 1;
  }
  v.require(overlap == 0, std::to_string(overlap) + " words shared across partitions");
  v.require(sizes_ok, "split word counts " + std::to_string(parts[0].size()) + "/" + std::to_string(parts[1].size()) +
                          "/" + std::to_string(parts[2].size()));

  v.detail = "align exact on " + std::to_string(kAlignLexicons) + " lexicons (" + std::to_string(ties) + " with ties, " +
             std::to_string(skips) + " with skips, " + std::to_string(align_mismatch) + " mismatches); beam=64 vs " +
             "exhaustive on " + std::to_string(instances) + " V=4 L=3 instances: " + std::to_string(beam_mismatch) +
             " mismatches (greedy suboptimal on " + std::to_string(greedy_worse) + "); BLEU " + fmt("%.2f", bleu) +
             " vs golden " + fmt("%.2f", kBleuGolden) + "; split " + std::to_string(parts[0].size()) + "/" +
             std::to_string(parts[1].size()) + "/" + std::to_string(parts[2].size()) + " words, disjoint" +
             (v.detail.empty() ? "" : " -- " + v.detail);
  return v;
}

// ======================================================== driver

bool report(int n, const char* name, const std::function<Verdict()>& f) {
  Verdict v;
  try {
    v = f();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("threw: ") + e.what();
  }
  std::printf("%s %d %s: %s\n", v.pass ? "PASS" : "FAIL", n, name, v.detail.c_str());
  std::fflush(stdout);
  return v.pass;
}

}  // namespace
}  // namespace semdef::acceptance

int main() {
  using namespace semdef::acceptance;
  bool ok = true;
  ok &= report(1, "gradient suite", criterion_gradients);
  ok &= report(2, "invariant suite", criterion_invariants);
  const Corpus corpus = overfit_corpus(32);
  std::map<Arch, OverfitRun> runs;
  ok &= report(3, "overfit", [&] { return criterion_overfit(corpus, runs); });
  ok &= report(4, "sememe signal", criterion_sememe_signal);
  ok &= report(5, "ablation mechanics", criterion_ablations);
  ok &= report(6, "oracle equivalences", criterion_oracles);
  ok &= report(7, "determinism", [&] { return criterion_determinism(corpus, runs); });
  return ok ? 0 : 1;
}
