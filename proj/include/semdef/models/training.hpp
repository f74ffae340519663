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
#ifndef SEMDEF_MODELS_TRAINING_HPP_
#define SEMDEF_MODELS_TRAINING_HPP_

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "semdef/data/batch.hpp"
#include "semdef/models/model.hpp"

namespace semdef::models {

// Definition tokens an example may carry so that BOS + tokens fits the
// decoder (max_def_len - 1).
std::size_t max_definition_tokens(const ModelConfig& config);

template <typename T>
struct BatchLoss {
  Var<T> loss;              // label-smoothed NLL averaged over target tokens
  std::size_t tokens = 0;   // target tokens, EOS included
  std::size_t correct = 0;  // argmax hits, ties to the lowest id
};

// Teacher-forced loss of a batch: row b feeds BOS y_1 .. y_n and predicts
// y_1 .. y_n EOS.
template <typename T>
BatchLoss<T> batch_loss(Graph<T>& g, const Model<T>& model, const data::Batch& batch,
                        double smoothing);

struct Evaluation {
  double loss = 0;  // token-weighted mean of the smoothed objective
  double token_accuracy = 0;
  std::size_t tokens = 0;
  std::size_t correct = 0;
};

template <typename T>
Evaluation evaluate(const Model<T>& model, const std::vector<data::Example>& examples,
                    std::size_t batch_size);

struct TrainLogRow {
  std::size_t step = 0;
  std::size_t epoch = 0;
  double train_loss = 0;
  std::optional<double> valid_loss;  // set on the last step of an epoch
};

struct TrainResult {
  std::vector<TrainLogRow> log;
  std::size_t steps = 0;
  std::size_t epochs = 0;
  std::optional<double> best_valid_loss;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
};

struct TrainHooks {
  std::function<void(const TrainLogRow&)> on_step;
  std::function<void(std::size_t epoch, std::optional<double> valid_loss)> on_epoch;
  // Called whenever a new best validation loss is reached.
  std::function<void(std::size_t epoch, double valid_loss)> on_best;
};

// Minibatch Adam on the smoothed objective. With a validation set, stops after
// `patience` epochs without improvement and restores the best weights.
// Throws NumericError ("training diverged at step N ...") on non-finite loss or
// gradients.
template <typename T>
TrainResult train(Model<T>& model, const std::vector<data::Example>& train_set,
                  const std::vector<data::Example>* valid_set = nullptr,
                  const TrainHooks& hooks = {});

void write_loss_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& log);

}  // namespace semdef::models

#endif  // SEMDEF_MODELS_TRAINING_HPP_
