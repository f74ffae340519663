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
#include "semdef/models/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "semdef/core/adam.hpp"
#include "semdef/core/error.hpp"

namespace semdef::models {

std::size_t max_definition_tokens(const ModelConfig& config) { return config.max_def_len - 1; }

template <typename T>
BatchLoss<T> batch_loss(Graph<T>& g, const Model<T>& model, const data::Batch& batch,
                        double smoothing) {
  if (batch.size == 0) throw DataError("empty batch");
  std::vector<Var<T>> logits;
  std::vector<std::size_t> targets;
  for (std::size_t b = 0; b < batch.size; ++b) {
    const std::size_t len = batch.definition_length(b);
    const auto row = batch.definition_row(b);
    const auto prefix = row.subspan(0, len - 1);
    logits.push_back(model.logits(g, input_from_batch(batch, b), prefix));
    for (std::size_t t = 1; t < len; ++t) targets.push_back(row[t]);
  }
  BatchLoss<T> out;
  const Var<T> all = logits.size() == 1 ? logits[0] : concat_rows(std::span<const Var<T>>(logits));
  const Mask mask(targets.size(), 1);
  out.loss = cross_entropy_smoothed(all, std::span<const std::size_t>(targets),
                                    static_cast<T>(smoothing), mask);
  out.tokens = targets.size();
  const auto& v = all.value();
  for (std::size_t r = 0; r < v.rows(); ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < v.cols(); ++c)
      if (v.at(r, c) > v.at(r, best)) best = c;
    if (best == targets[r]) ++out.correct;
  }
  return out;
}

template <typename T>
Evaluation evaluate(const Model<T>& model, const std::vector<data::Example>& examples,
                    std::size_t batch_size) {
  Evaluation ev;
  if (examples.empty()) return ev;
  double total = 0;
  for (const auto& batch : data::epoch_batches(examples, batch_size, 0, 0, false)) {
    Graph<T> g(false);
    const auto bl = batch_loss(g, model, batch, model.config().smoothing);
    total += static_cast<double>(bl.loss.value().item()) * static_cast<double>(bl.tokens);
    ev.tokens += bl.tokens;
    ev.correct += bl.correct;
  }
  ev.loss = total / static_cast<double>(ev.tokens);
  ev.token_accuracy = static_cast<double>(ev.correct) / static_cast<double>(ev.tokens);
  return ev;
}

template <typename T>
TrainResult train(Model<T>& model, const std::vector<data::Example>& train_set,
                  const std::vector<data::Example>* valid_set, const TrainHooks& hooks) {
  if (train_set.empty()) throw DataError("training split is empty");
  const ModelConfig& cfg = model.config();
  auto& params = model.params();
  Adam<T> adam(params, AdamOptions{cfg.lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps});
  const bool validating = valid_set && !valid_set->empty();

  TrainResult result;
  std::vector<Tensor<T>> best;
  std::size_t stale = 0;
  bool done = false;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
    model.set_training(true);
    for (const auto& batch : data::epoch_batches(train_set, cfg.batch, cfg.seed, epoch)) {
      const std::size_t step = result.steps + 1;
      double loss = 0;
      try {
        if (cfg.warmup_steps > 0) {
          const double ramp = std::min(1.0, static_cast<double>(step) /
                                                static_cast<double>(cfg.warmup_steps));
          adam.set_lr(cfg.lr * ramp);
        }
        params.zero_grad();
        Graph<T> g;
        const auto bl = batch_loss(g, model, batch, cfg.smoothing);
        loss = static_cast<double>(bl.loss.value().item());
        g.backward(bl.loss);
        if (cfg.clip_norm > 0) clip_grad_norm(params, cfg.clip_norm);
        adam.step();
      } catch (const NumericError& e) {
        model.set_training(false);
        throw NumericError("training diverged at step " + std::to_string(step) + ": " + e.what());
      }
      result.steps = step;
      result.log.push_back(TrainLogRow{step, epoch, loss, std::nullopt});
      if (hooks.on_step) hooks.on_step(result.log.back());
      if (cfg.max_steps > 0 && step >= cfg.max_steps) {
        done = true;
        break;
      }
    }
    model.set_training(false);
    result.epochs = epoch + 1;
    std::optional<double> valid_loss;
    if (validating) {
      valid_loss = evaluate(model, *valid_set, cfg.batch).loss;
      result.log.back().valid_loss = valid_loss;
      if (!result.best_valid_loss || *valid_loss < *result.best_valid_loss) {
        result.best_valid_loss = valid_loss;
        result.best_epoch = epoch;
        stale = 0;
        best.clear();
        for (const auto& p : params) best.push_back(p->value);
        if (hooks.on_best) hooks.on_best(epoch, *valid_loss);
      } else if (++stale >= cfg.patience && cfg.patience > 0) {
        result.early_stopped = true;
        done = true;
      }
    }
    if (hooks.on_epoch) hooks.on_epoch(epoch, valid_loss);
  }
  if (!best.empty()) {
    for (std::size_t i = 0; i < best.size(); ++i) params[i].value = best[i];
  }
  return result;
}

void write_loss_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& log) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "step,train_loss,valid_loss\n";
  char buf[64];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%.9g", r.train_loss);
    out << r.step << ',' << buf << ',';
    if (r.valid_loss) {
      std::snprintf(buf, sizeof buf, "%.9g", *r.valid_loss);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

#define SEMDEF_INSTANTIATE_TRAINING(T)                                                    \
  template BatchLoss<T> batch_loss(Graph<T>&, const Model<T>&, const data::Batch&, double); \
  template Evaluation evaluate(const Model<T>&, const std::vector<data::Example>&,         \
                               std::size_t);                                              \
  template TrainResult train(Model<T>&, const std::vector<data::Example>&,                \
                             const std::vector<data::Example>*, const TrainHooks&);

SEMDEF_INSTANTIATE_TRAINING(float)
SEMDEF_INSTANTIATE_TRAINING(double)

#undef SEMDEF_INSTANTIATE_TRAINING

}  // namespace semdef::models
