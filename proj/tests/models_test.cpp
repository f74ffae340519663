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
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "semdef/core/error.hpp"
#include "semdef/models/checkpoint.hpp"
#include "semdef/models/config.hpp"
#include "semdef/models/model.hpp"
#include "semdef/models/training.hpp"
#include "support/gradcheck.hpp"

namespace semdef::models {
namespace {

using semdef::testing::check_parameters;
using D = double;

constexpr double kGradTol = 1e-4;
constexpr int kSeeds = 20;
constexpr VocabSizes kSizes{12, 14, 10};

ModelConfig tiny(Arch arch, std::uint64_t seed = 1) {
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

TokenId draw(Rng& rng, std::size_t lo, std::size_t hi) {
  return static_cast<TokenId>(lo + rng() % (hi - lo));
}

ModelInput random_input(Rng& rng, std::size_t n_sememes) {
  ModelInput in;
  in.word = draw(rng, kNumSpecials, kSizes.source);
  for (std::size_t k = 1 + rng() % 5; k > 0; --k) in.chars.push_back(draw(rng, kNumSpecials, kSizes.chars));
  for (std::size_t k = 0; k < n_sememes; ++k) in.sememes.push_back(draw(rng, kNumSpecials, kSizes.source));
  return in;
}

std::vector<TokenId> random_prefix(Rng& rng, std::size_t len) {
  std::vector<TokenId> p{kBos};
  while (p.size() < len) p.push_back(draw(rng, kEos, kSizes.target));
  return p;
}

data::Example random_example(Rng& rng) {
  ModelInput in = random_input(rng, 1 + rng() % 3);
  data::Example ex{in.word, in.chars, in.sememes, {}};
  for (std::size_t k = 1 + rng() % 4; k > 0; --k) ex.definition.push_back(draw(rng, kNumSpecials, kSizes.target));
  return ex;
}

template <typename T>
Tensor<T> logits_of(const Model<T>& m, const ModelInput& in, const std::vector<TokenId>& prefix,
                    std::vector<TraceRecord>* trace = nullptr) {
  Graph<T> g(false);
  return m.logits(g, in, prefix, trace).value();
}

double max_abs_diff(const Tensor<D>& a, const Tensor<D>& b) {
  EXPECT_EQ(a.shape(), b.shape());
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

void randomise(ParameterStore<D>& params, Rng& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto& p : params)
    for (auto& v : p->value.data()) v = u(rng);
}

std::vector<double> log_softmax_row(const Tensor<D>& logits, std::size_t r) {
  long double mx = logits.at(r, 0);
  for (std::size_t c = 1; c < logits.cols(); ++c) mx = std::max<long double>(mx, logits.at(r, c));
  long double z = 0;
  for (std::size_t c = 0; c < logits.cols(); ++c) z += std::exp(logits.at(r, c) - mx);
  std::vector<double> out(logits.cols());
  for (std::size_t c = 0; c < logits.cols(); ++c)
    out[c] = static_cast<double>(logits.at(r, c) - mx - std::log(z));
  return out;
}

// ---------------------------------------------------------------- distributions

TEST(AllModels, OutputRowsAreDistributions) {
  for (Arch arch : kArchs) {
    for (int seed = 0; seed < kSeeds; ++seed) {
      auto m = make_model<float>(tiny(arch, seed), kSizes);
      Rng rng(seed);
      const ModelInput in = random_input(rng, 3);
      const auto prefix = random_prefix(rng, 6);
      Graph<float> g(false);
      const auto& p = softmax(m->logits(g, in, prefix)).value();
      ASSERT_EQ(p.rows(), prefix.size());
      ASSERT_EQ(p.cols(), kSizes.target);
      for (std::size_t r = 0; r < p.rows(); ++r) {
        double total = 0;
        for (std::size_t c = 0; c < p.cols(); ++c) {
          EXPECT_GE(p.at(r, c), 0.0f);
          total += p.at(r, c);
        }
        EXPECT_NEAR(total, 1.0, 1e-6) << arch_name(arch) << " seed " << seed;
      }
    }
  }
}

TEST(AllModels, ChainRuleMatchesStepwiseScoring) {
  for (Arch arch : kArchs) {
    for (int seed = 0; seed < kSeeds; ++seed) {
      auto m = make_model<D>(tiny(arch, seed), kSizes);
      Rng rng(100 + seed);
      const ModelInput in = random_input(rng, 2);
      const auto y = random_prefix(rng, 7);  // BOS y1..y6
      const auto full = logits_of(*m, in, std::vector<TokenId>(y.begin(), y.end() - 1));
      double joint = 0, product = 1;
      for (std::size_t t = 0; t + 1 < y.size(); ++t) {
        joint += log_softmax_row(full, t)[y[t + 1]];
        const auto step = logits_of(*m, in, std::vector<TokenId>(y.begin(), y.begin() + t + 1));
        product *= std::exp(log_softmax_row(step, t)[y[t + 1]]);
      }
      EXPECT_NEAR(std::exp(joint), product, 1e-6) << arch_name(arch);
      EXPECT_NEAR(joint, std::log(product), 1e-9) << arch_name(arch);
    }
  }
}

TEST(AllModels, RejectsOutOfVocabularyIds) {
  for (Arch arch : kArchs) {
    auto m = make_model<D>(tiny(arch), kSizes);
    Rng rng(3);
    ModelInput in = random_input(rng, 2);
    EXPECT_THROW(logits_of(*m, in, {kBos, static_cast<TokenId>(kSizes.target)}), DataError);
    ModelInput bad = in;
    bad.word = static_cast<TokenId>(kSizes.source);
    EXPECT_THROW(logits_of(*m, bad, {kBos}), DataError);
  }
}

// ---------------------------------------------------------------- baseline

TEST(Baseline, CharCnnAblationMattersExactlyWhenItsOutputIsNonzero) {
  ModelConfig with = tiny(Arch::kBaseline);
  ModelConfig without = with;
  without.use_char_cnn = false;
  for (int seed = 0; seed < kSeeds; ++seed) {
    with.seed = seed;
    auto a = make_model<D>(with, kSizes);
    auto b = make_model<D>(without, kSizes);
    for (auto& p : b->params()) {
      const auto& src = a->params().at(p->name).value;
      for (std::size_t r = 0; r < p->value.rows(); ++r)
        for (std::size_t c = 0; c < p->value.cols(); ++c) p->value.at(r, c) = src.at(r, c);
    }
    Rng rng(seed);
    const ModelInput in = random_input(rng, 0);
    const auto prefix = random_prefix(rng, 5);
    EXPECT_GT(max_abs_diff(logits_of(*a, in, prefix), logits_of(*b, in, prefix)), 1e-9);
    // Zero filters make every feature tanh(0) = 0.
    for (auto& p : a->params())
      if (p->name.rfind("char_cnn.w", 0) == 0) p->value.fill(0.0);
    EXPECT_EQ(logits_of(*a, in, prefix), logits_of(*b, in, prefix));
  }
}

// ---------------------------------------------------------------- aam

TEST(Aam, GatePinnedToLanguageModelIgnoresSememes) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    auto m = make_model<D>(tiny(Arch::kAam, seed), kSizes);
    Rng rng(seed);
    ModelInput a = random_input(rng, 3);
    ModelInput b = a;
    b.sememes = {draw(rng, kNumSpecials, kSizes.source)};
    const auto prefix = random_prefix(rng, 6);
    EXPECT_GT(max_abs_diff(logits_of(*m, a, prefix), logits_of(*m, b, prefix)), 1e-9);
    m->force_beta(1.0);
    EXPECT_EQ(logits_of(*m, a, prefix), logits_of(*m, b, prefix));
    std::vector<TraceRecord> trace;
    logits_of(*m, a, prefix, &trace);
    for (const auto& r : trace) EXPECT_EQ(*r.beta, 1.0);
  }
}

TEST(Aam, SememeOrderReachesLogitsThroughTheRecurrentEncoder) {
  int changed = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    auto m = make_model<D>(tiny(Arch::kAam, seed), kSizes);
    Rng rng(seed);
    ModelInput a = random_input(rng, 3);
    while (a.sememes[0] == a.sememes[2]) a.sememes[2] = draw(rng, kNumSpecials, kSizes.source);
    ModelInput b = a;
    std::swap(b.sememes[0], b.sememes[2]);
    const auto prefix = random_prefix(rng, 4);
    if (max_abs_diff(logits_of(*m, a, prefix), logits_of(*m, b, prefix)) > 1e-9) ++changed;
  }
  EXPECT_EQ(changed, kSeeds);
}

TEST(Aam, TraceHoldsNormalisedAttentionAndOpenGate) {
  auto m = make_model<D>(tiny(Arch::kAam), kSizes);
  Rng rng(4);
  const ModelInput in = random_input(rng, 4);
  std::vector<TraceRecord> trace;
  logits_of(*m, in, random_prefix(rng, 5), &trace);
  ASSERT_EQ(trace.size(), 5u);
  for (std::size_t t = 0; t < trace.size(); ++t) {
    EXPECT_EQ(trace[t].t, t);
    ASSERT_EQ(trace[t].alpha.size(), 4u);
    double total = 0;
    for (double a : trace[t].alpha) total += a;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_GT(*trace[t].beta, 0.0);
    EXPECT_LT(*trace[t].beta, 1.0);
  }
}

TEST(Aam, NeedsAtLeastOneSememe) {
  auto m = make_model<D>(tiny(Arch::kAam), kSizes);
  Rng rng(5);
  ModelInput in = random_input(rng, 0);
  EXPECT_THROW(logits_of(*m, in, {kBos}), DataError);
  in.sememes = {5, 6};
  in.sememe_visible = {0, 0};
  EXPECT_THROW(logits_of(*m, in, {kBos}), DataError);
}

// ---------------------------------------------------------------- saam

TEST(Saam, LogitsAreCausalInThePrefix) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    auto m = make_model<D>(tiny(Arch::kSaam, seed), kSizes);
    Rng rng(seed);
    const ModelInput in = random_input(rng, 3);
    const auto p = random_prefix(rng, 7);
    const auto base = logits_of(*m, in, p);
    for (std::size_t t = 1; t < p.size(); ++t) {
      auto q = p;
      for (std::size_t u = t; u < q.size(); ++u) q[u] = draw(rng, kEos, kSizes.target);
      const auto changed = logits_of(*m, in, q);
      for (std::size_t r = 0; r < t; ++r)
        for (std::size_t c = 0; c < base.cols(); ++c) ASSERT_EQ(base.at(r, c), changed.at(r, c));
    }
  }
}

TEST(Saam, NoPositionEqualsZeroSourcePositionTable) {
  ModelConfig off = tiny(Arch::kSaam);
  off.use_position = false;
  for (int seed = 0; seed < kSeeds; ++seed) {
    off.seed = seed;
    ModelConfig on = off;
    on.use_position = true;
    auto a = make_model<D>(off, kSizes);
    auto b = make_model<D>(on, kSizes);
    Rng rng(seed);
    const ModelInput in = random_input(rng, 4);
    const auto p = random_prefix(rng, 5);
    EXPECT_GT(max_abs_diff(logits_of(*a, in, p), logits_of(*b, in, p)), 1e-9);
    b->params().at("src_pos").value.fill(0.0);
    EXPECT_EQ(logits_of(*a, in, p), logits_of(*b, in, p));
  }
}

TEST(Saam, NoSememesIsExactlyInvariantToTheSememeList) {
  ModelConfig c = tiny(Arch::kSaam);
  c.use_sememes = false;
  for (int seed = 0; seed < kSeeds; ++seed) {
    c.seed = seed;
    auto m = make_model<D>(c, kSizes);
    Rng rng(seed);
    ModelInput a = random_input(rng, 0);
    ModelInput b = a;
    b.sememes = {5, 7, 9};
    const auto p = random_prefix(rng, 6);
    EXPECT_EQ(logits_of(*m, a, p), logits_of(*m, b, p));
  }
}

TEST(Saam, ChangingOneSememeChangesTheLogits) {
  int changed = 0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    auto m = make_model<D>(tiny(Arch::kSaam, seed), kSizes);
    Rng rng(seed);
    ModelInput a = random_input(rng, 3);
    ModelInput b = a;
    b.sememes[1] = b.sememes[1] == 4 ? 5 : 4;
    const auto p = random_prefix(rng, 4);
    if (max_abs_diff(logits_of(*m, a, p), logits_of(*m, b, p)) > 1e-9) ++changed;
  }
  EXPECT_EQ(changed, kSeeds);
}

TEST(Saam, MaskedSememeSlotsAreInert) {
  for (int seed = 0; seed < kSeeds; ++seed) {
    auto m = make_model<D>(tiny(Arch::kSaam, seed), kSizes);
    Rng rng(seed);
    const ModelInput a = random_input(rng, 2);
    ModelInput b = a;
    b.sememe_visible = {1, 1};
    for (int k = 0; k < 3; ++k) {
      b.sememes.push_back(draw(rng, 0, kSizes.source));
      b.sememe_visible.push_back(0);
    }
    const auto p = random_prefix(rng, 6);
    EXPECT_LE(max_abs_diff(logits_of(*m, a, p), logits_of(*m, b, p)), 1e-6);
  }
}

TEST(Saam, RejectsOverlongInputs) {
  auto m = make_model<D>(tiny(Arch::kSaam), kSizes);
  Rng rng(6);
  const ModelInput in = random_input(rng, 2);
  EXPECT_NO_THROW(logits_of(*m, in, random_prefix(rng, 8)));
  EXPECT_THROW(logits_of(*m, in, random_prefix(rng, 9)), DimensionError);
  EXPECT_THROW(logits_of(*m, random_input(rng, 7), {kBos}), DimensionError);
  EXPECT_THROW(logits_of(*m, random_input(rng, 0), {kBos}), DataError);
}

TEST(Saam, TraceAveragesHeadsOverEncoderSlots) {
  auto m = make_model<D>(tiny(Arch::kSaam), kSizes);
  Rng rng(7);
  const ModelInput in = random_input(rng, 3);
  std::vector<TraceRecord> trace;
  logits_of(*m, in, random_prefix(rng, 4), &trace);
  ASSERT_EQ(trace.size(), 2u * 4u);
  for (const auto& r : trace) {
    ASSERT_EQ(r.alpha.size(), 4u);
    double total = 0;
    for (double a : r.alpha) total += a;
    EXPECT_NEAR(total, 1.0, 1e-12);
    ASSERT_TRUE(r.beta.has_value());
    EXPECT_GT(*r.beta, 0.0);
    EXPECT_LT(*r.beta, 1.0);
  }
}

// Straight-line long double re-implementation of a one-layer, one-head model.
using LD = long double;
using Mat = std::vector<std::vector<LD>>;

Mat mat_of(const Tensor<D>& t) {
  Mat m(t.rows(), std::vector<LD>(t.cols()));
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) m[r][c] = t.at(r, c);
  return m;
}

Mat mm(const Mat& a, const Mat& b) {
  Mat out(a.size(), std::vector<LD>(b[0].size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

Mat plus(Mat a, const Mat& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
  return a;
}

struct Oracle {
  const ParameterStore<D>& p;

  Mat table(const std::string& name) const { return mat_of(p.find(name)->value); }
  std::vector<LD> vec(const std::string& name) const {
    const auto& t = p.find(name)->value;
    return std::vector<LD>(t.data().begin(), t.data().end());
  }
  Mat linear(const Mat& x, const std::string& name) const {
    Mat y = mm(x, table(name + ".weight"));
    const auto b = vec(name + ".bias");
    for (auto& row : y)
      for (std::size_t j = 0; j < row.size(); ++j) row[j] += b[j];
    return y;
  }
  Mat norm(const Mat& x, const std::string& name) const {
    const auto g = vec(name + ".gain"), b = vec(name + ".bias");
    Mat y = x;
    for (auto& row : y) {
      LD mean = 0, var = 0;
      for (LD v : row) mean += v;
      mean /= row.size();
      for (LD v : row) var += (v - mean) * (v - mean);
      var /= row.size();
      for (std::size_t j = 0; j < row.size(); ++j)
        row[j] = (row[j] - mean) / std::sqrt(var + 1e-5L) * g[j] + b[j];
    }
    return y;
  }
  // visible(i, j) decides whether query i sees key j.
  template <typename F>
  Mat attend(const Mat& qs, const Mat& ks, const std::string& name, F visible) const {
    const Mat q = linear(qs, name + ".q"), k = linear(ks, name + ".k"), v = linear(ks, name + ".v");
    const LD scale = 1 / std::sqrt(static_cast<LD>(q[0].size()));
    Mat ctx(q.size(), std::vector<LD>(v[0].size(), 0));
    for (std::size_t i = 0; i < q.size(); ++i) {
      std::vector<LD> w(k.size(), 0);
      LD total = 0;
      for (std::size_t j = 0; j < k.size(); ++j) {
        if (!visible(i, j)) continue;
        LD s = 0;
        for (std::size_t c = 0; c < q[i].size(); ++c) s += q[i][c] * k[j][c];
        w[j] = std::exp(s * scale);
        total += w[j];
      }
      for (std::size_t j = 0; j < k.size(); ++j)
        for (std::size_t c = 0; c < v[j].size(); ++c) ctx[i][c] += w[j] / total * v[j][c];
    }
    return linear(ctx, name + ".o");
  }
  Mat ffn(const Mat& x, const std::string& name) const {
    Mat h = linear(x, name + ".inner");
    for (auto& row : h)
      for (auto& v : row) v = std::max<LD>(v, 0);
    return linear(h, name + ".outer");
  }
  Mat rows(const std::string& name, const std::vector<TokenId>& ids) const {
    const Mat t = table(name);
    Mat out;
    for (TokenId id : ids) out.push_back(t[id]);
    return out;
  }

  Mat logits(const std::vector<TokenId>& slots, const std::vector<TokenId>& prefix, bool position,
             bool adaptive) const {
    Mat v = rows("src_emb", slots);
    if (position) {
      const Mat pos = table("src_pos");
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = plus({v[i]}, {pos[i]})[0];
    }
    auto all = [](std::size_t, std::size_t) { return true; };
    const Mat a = norm(plus(v, attend(v, v, "enc0.attn", all)), "enc0.attn_norm");
    const Mat h = norm(plus(a, ffn(a, "enc0.ffn")), "enc0.ffn_norm");

    Mat z = rows("tgt_emb", prefix);
    const Mat tpos = table("tgt_pos");
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = plus({z[i]}, {tpos[i]})[0];
    const Mat lm = norm(plus(z, attend(z, z, "dec0.self", [](std::size_t i, std::size_t j) { return j <= i; })),
                        "dec0.self_norm");
    const Mat chat = attend(lm, h, "dec0.enc", all);
    Mat out;
    if (adaptive) {
      const auto w = vec("dec0.w_c");
      const std::size_t d = z[0].size();
      Mat c = lm;
      for (std::size_t t = 0; t < z.size(); ++t) {
        LD eo = 0, ec = 0;
        for (std::size_t j = 0; j < d; ++j) {
          eo += lm[t][j] * w[j] + z[t][j] * w[d + j];
          ec += chat[t][j] * w[j] + z[t][j] * w[d + j];
        }
        const LD beta = std::exp(eo) / (std::exp(eo) + std::exp(ec));
        for (std::size_t j = 0; j < d; ++j) c[t][j] = beta * lm[t][j] + (1 - beta) * chat[t][j];
      }
      out = norm(plus(z, c), "dec0.out_norm");
    } else {
      out = norm(plus(lm, chat), "dec0.out_norm");
    }
    const Mat top = norm(plus(out, ffn(out, "dec0.ffn")), "dec0.ffn_norm");
    return linear(top, "out");
  }
};

TEST(Saam, OneLayerOneHeadMatchesStraightLineOracle) {
  for (bool adaptive : {true, false}) {
    for (bool position : {true, false}) {
      for (int seed = 0; seed < kSeeds; ++seed) {
        ModelConfig c = tiny(Arch::kSaam, seed);
        c.d_model = 4;
        c.d_hidden = 6;
        c.n_head = 1;
        c.n_layer = 1;
        c.use_adaptive = adaptive;
        c.use_position = position;
        auto m = make_model<D>(c, kSizes);
        Rng rng(seed);
        randomise(m->params(), rng);
        const ModelInput in = random_input(rng, 3);
        const auto prefix = random_prefix(rng, 5);
        const auto got = logits_of(*m, in, prefix);
        std::vector<TokenId> slots{in.word};
        slots.insert(slots.end(), in.sememes.begin(), in.sememes.end());
        const Mat want = Oracle{m->params()}.logits(slots, prefix, position, adaptive);
        for (std::size_t r = 0; r < got.rows(); ++r)
          for (std::size_t k = 0; k < got.cols(); ++k)
            ASSERT_NEAR(got.at(r, k), static_cast<double>(want[r][k]), 1e-9)
                << "adaptive=" << adaptive << " position=" << position << " seed " << seed;
      }
    }
  }
}

// ---------------------------------------------------------------- gradients

TEST(AllModels, BatchLossGradientsMatchFiniteDifferences) {
  for (Arch arch : kArchs) {
    for (int seed = 0; seed < kSeeds; ++seed) {
      auto m = make_model<D>(tiny(arch, seed), kSizes);
      Rng rng(seed);
      const std::vector<data::Example> exs{random_example(rng), random_example(rng)};
      const data::Batch batch = data::make_batch(exs);
      auto r = check_parameters(
          m->params(), [&](Graph<D>& g) { return batch_loss(g, *m, batch, 0.1).loss; }, rng, 3);
      EXPECT_GT(r.checked, 0u);
      EXPECT_LT(r.max_rel_error, kGradTol) << arch_name(arch) << " seed " << seed << " " << r.worst;
    }
  }
}

// ---------------------------------------------------------------- loss

TEST(BatchLoss, IsTheTokenWeightedMeanOfPerExampleLosses) {
  for (Arch arch : kArchs) {
    auto m = make_model<D>(tiny(arch), kSizes);
    Rng rng(8);
    const std::vector<data::Example> exs{random_example(rng), random_example(rng),
                                         random_example(rng)};
    Graph<D> g(false);
    const auto all = batch_loss(g, *m, data::make_batch(exs), 0.1);
    double weighted = 0;
    std::size_t tokens = 0, correct = 0;
    for (const auto& ex : exs) {
      Graph<D> h(false);
      const auto one = batch_loss(h, *m, data::make_batch(std::span(&ex, 1)), 0.1);
      EXPECT_EQ(one.tokens, ex.definition.size() + 1);
      weighted += one.loss.value().item() * one.tokens;
      tokens += one.tokens;
      correct += one.correct;
    }
    EXPECT_EQ(all.tokens, tokens);
    EXPECT_EQ(all.correct, correct);
    EXPECT_NEAR(all.loss.value().item(), weighted / tokens, 1e-12);
  }
}

// ---------------------------------------------------------------- training

std::vector<data::Example> tiny_corpus(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<data::Example> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(random_example(rng));
  return out;
}

TEST(Train, SmoothedLossStrictlyDecreasesOverTheFirstTenSteps) {
  for (Arch arch : kArchs) {
    ModelConfig c = tiny(arch);
    c.lr = 1e-3;
    c.batch = 16;
    c.epochs = 10;
    auto m = make_model<float>(c, kSizes);
    const auto corpus = tiny_corpus(9, 8);
    const auto result = train(*m, corpus);
    ASSERT_EQ(result.log.size(), 10u);
    for (std::size_t i = 1; i < result.log.size(); ++i)
      EXPECT_LT(result.log[i].train_loss, result.log[i - 1].train_loss) << arch_name(arch) << " step " << i;
  }
}

TEST(Train, FixedSeedGivesIdenticalLossCurves) {
  for (Arch arch : kArchs) {
    ModelConfig c = tiny(arch, 11);
    c.batch = 3;
    c.epochs = 3;
    c.dropout = 0.1;
    const auto corpus = tiny_corpus(10, 10);
    auto run = [&](const ModelConfig& cfg) {
      auto m = make_model<float>(cfg, kSizes);
      std::vector<double> curve;
      for (const auto& r : train(*m, corpus).log) curve.push_back(r.train_loss);
      return curve;
    };
    const auto first = run(c);
    EXPECT_EQ(first.size(), 12u);
    EXPECT_EQ(first, run(c));
    ModelConfig other = c;
    other.seed = 12;
    EXPECT_NE(first, run(other));
  }
}

TEST(Train, KeepsTheBestValidationWeights) {
  ModelConfig c = tiny(Arch::kSaam);
  c.batch = 4;
  c.epochs = 40;
  c.patience = 3;
  c.lr = 3e-2;
  auto m = make_model<float>(c, kSizes);
  const auto train_set = tiny_corpus(13, 12), valid_set = tiny_corpus(14, 6);
  std::size_t bests = 0;
  TrainHooks hooks;
  hooks.on_best = [&](std::size_t, double) { ++bests; };
  const auto result = train(*m, train_set, &valid_set, hooks);
  ASSERT_TRUE(result.best_valid_loss.has_value());
  EXPECT_GE(bests, 1u);
  if (result.early_stopped) {
    EXPECT_EQ(result.epochs, result.best_epoch + 1 + c.patience);
  }
  EXPECT_EQ(evaluate(*m, valid_set, c.batch).loss, *result.best_valid_loss);
  std::size_t with_valid = 0;
  for (const auto& r : result.log) with_valid += r.valid_loss.has_value();
  EXPECT_EQ(with_valid, result.epochs);
}

TEST(Train, StopsAtMaxSteps) {
  ModelConfig c = tiny(Arch::kBaseline);
  c.batch = 2;
  c.max_steps = 5;
  auto m = make_model<float>(c, kSizes);
  EXPECT_EQ(train(*m, tiny_corpus(15, 8)).steps, 5u);
}

TEST(Train, NonFiniteLossAbortsWithStepNumber) {
  auto m = make_model<float>(tiny(Arch::kAam), kSizes);
  m->params().at("out.weight").value[0] = std::nanf("");
  try {
    train(*m, tiny_corpus(16, 4));
    FAIL() << "expected divergence";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("training diverged at step 1"), std::string::npos) << e.what();
  }
}

TEST(Train, EmptyTrainingSplitIsAnError) {
  auto m = make_model<float>(tiny(Arch::kSaam), kSizes);
  EXPECT_THROW(train(*m, {}), DataError);
}

// ---------------------------------------------------------------- checkpoints

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() /
           ("semdef_models_test_" + std::to_string(::getpid()) + "_" + name);
  std::filesystem::remove_all(p);
  return p;
}

data::Vocabularies tiny_vocabs() {
  auto names = [](const std::string& stem, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = kNumSpecials; i < n; ++i) out.push_back(stem + std::to_string(i));
    return out;
  };
  return data::Vocabularies{data::Vocab(names("s", kSizes.source)), data::Vocab(names("t", kSizes.target)),
                            data::Vocab(names("c", kSizes.chars))};
}

TEST(Checkpoint, DirectoryRoundTripIsBitExact) {
  for (Arch arch : kArchs) {
    const auto dir = scratch("ckpt_" + arch_name(arch));
    auto m = make_model<float>(tiny(arch, 21), kSizes);
    train(*m, tiny_corpus(17, 6));
    const auto vocabs = tiny_vocabs();
    save_model_dir(dir, *m, vocabs);
    const LoadedModel back = load_model_dir(dir);
    EXPECT_EQ(back.config, m->config());
    EXPECT_EQ(back.vocabs, vocabs);
    ASSERT_EQ(back.model->params().size(), m->params().size());
    for (std::size_t i = 0; i < m->params().size(); ++i)
      EXPECT_EQ(back.model->params()[i].value, m->params()[i].value) << m->params()[i].name;
    Rng rng(22);
    const ModelInput in = random_input(rng, 2);
    const auto p = random_prefix(rng, 4);
    EXPECT_EQ(logits_of(*back.model, in, p), logits_of(*m, in, p));
    std::filesystem::remove_all(dir);
  }
}

TEST(Checkpoint, MissingDirectoryIsADataError) {
  EXPECT_THROW(load_model_dir(scratch("absent")), DataError);
}

TEST(Checkpoint, LossCsvHasOneRowPerStep) {
  const auto dir = scratch("csv");
  std::filesystem::create_directories(dir);
  write_loss_csv(dir / "loss.csv", {{1, 0, 2.5, std::nullopt}, {2, 0, 2.25, 2.75}});
  std::ifstream in(dir / "loss.csv");
  std::string a, b, c;
  std::getline(in, a);
  std::getline(in, b);
  std::getline(in, c);
  EXPECT_EQ(a, "step,train_loss,valid_loss");
  EXPECT_EQ(b, "1,2.5,");
  EXPECT_EQ(c, "2,2.25,2.75");
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, PretrainedVectorsFillBothTables) {
  const auto dir = scratch("vectors");
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "vec.txt");
    out << "3 8\n";
    out << "s5 1 2 3 4 5 6 7 8\n";
    out << "t6 -1 -2 -3 -4 -5 -6 -7 -8\n";
    out << "zz 9 9 9 9 9 9 9 9\n";
  }
  auto m = make_model<float>(tiny(Arch::kSaam), kSizes);
  const auto bos_before = m->params().at("tgt_emb").value.at(kBos, 0);
  const std::size_t missing = load_pretrained_embeddings(*m, tiny_vocabs(), dir / "vec.txt");
  EXPECT_EQ(missing, (kSizes.source - kNumSpecials - 1) + (kSizes.target - kNumSpecials - 1));
  const auto& src = m->params().at("src_emb").value;
  const auto& tgt = m->params().at("tgt_emb").value;
  for (std::size_t j = 0; j < 8; ++j) {
    EXPECT_EQ(src.at(5, j), static_cast<float>(j + 1));
    EXPECT_EQ(tgt.at(6, j), -static_cast<float>(j + 1));
    EXPECT_EQ(src.at(4, j), 0.0f);
  }
  EXPECT_EQ(tgt.at(kBos, 0), bos_before);
  std::filesystem::remove_all(dir);
}

// ---------------------------------------------------------------- config

TEST(Config, TextRoundTripRestoresEveryField) {
  for (Arch arch : kArchs) {
    ModelConfig c = tiny(arch, 99);
    c.lr = 0.1 + 1e-12;
    c.char_widths = {1, 5};
    EXPECT_EQ(make_config(parse_config_text(config_to_text(c))), c);
  }
}

TEST(Config, DefaultsFollowTheArchitecture) {
  const auto b = make_config({{"arch", "baseline"}});
  EXPECT_FALSE(b.use_sememes);
  EXPECT_TRUE(b.use_char_cnn);
  const auto a = make_config({{"arch", "aam"}});
  EXPECT_TRUE(a.use_sememes && a.use_adaptive && !a.use_position);
  const auto s = make_config({});
  EXPECT_EQ(s.arch, Arch::kSaam);
  EXPECT_TRUE(s.use_sememes && s.use_adaptive && s.use_position);
  EXPECT_EQ(s.d_model, 300u);
  EXPECT_EQ(s.d_hidden, 2048u);
  EXPECT_EQ(s.n_head, 5u);
  EXPECT_EQ(s.n_layer, 6u);
  EXPECT_EQ(s.batch, 128u);
  EXPECT_EQ(s.lr, 1e-3);
  EXPECT_EQ(s.smoothing, 0.1);
  EXPECT_EQ(s.patience, 20u);
}

TEST(Config, ParsingReportsLineNumbers) {
  try {
    parse_config_text("# header\nd_model = 8\n\nbogus = 1\n", "c.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("c.cfg:4"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config_text("d_model 8\n"), ConfigError);
  EXPECT_THROW(make_config({{"d_model", "eight"}}), ConfigError);
  EXPECT_THROW(make_config({{"use_position", "maybe"}}), ConfigError);
  const auto v = parse_config_text("  n_head = 4   # four\n");
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0], (std::pair<std::string, std::string>{"n_head", "4"}));
}

TEST(Config, ValidationRejectsInconsistentSettings) {
  EXPECT_THROW(make_config({{"d_model", "10"}, {"n_head", "3"}}), ConfigError);
  EXPECT_THROW(make_config({{"arch", "baseline"}, {"use_position", "true"}}), ConfigError);
  EXPECT_THROW(make_config({{"arch", "baseline"}, {"use_sememes", "true"}}), ConfigError);
  EXPECT_THROW(make_config({{"arch", "aam"}, {"use_position", "true"}}), ConfigError);
  EXPECT_THROW(make_config({{"arch", "aam"}, {"rnn_hidden", "7"}}), ConfigError);
  EXPECT_THROW(make_config({{"arch", "saam"}, {"use_char_cnn", "true"}}), ConfigError);
  EXPECT_THROW(make_config({{"arch", "lstm"}}), ConfigError);
  EXPECT_THROW(make_config({{"smoothing", "1"}}), ConfigError);
  EXPECT_THROW(make_config({{"max_def_len", "1"}}), ConfigError);
  EXPECT_NO_THROW(make_config({{"use_position", "false"}, {"use_adaptive", "false"}, {"use_sememes", "false"}}));
}

TEST(Config, MaxDefinitionTokensLeavesRoomForBos) {
  EXPECT_EQ(max_definition_tokens(tiny(Arch::kSaam)), 7u);
}

}  // namespace
}  // namespace semdef::models
