// Copyright 2026 The asd Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ASD_LATENT_TRAINER_H_
#define ASD_LATENT_TRAINER_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "asd/model_core.h"

namespace asd {

enum class LossKind { kSoftmax, kMaxMargin };

LossKind ParseLossKind(const std::string& name);  // "softmax" | "maxmargin"
std::string LossKindName(LossKind kind);

struct TrainConfig {
  // Weight of the (C/2)|w|^2 regularizer; the loss term is a plain sum.
  double C = 1.0;
  // Soft-max sharpness.
  double beta = 2.0;
  int max_iters = 500;
  // Infinity-norm gradient tolerance.
  double grad_tol = 1e-6;
  LossKind loss_kind = LossKind::kSoftmax;
  // Training starts from w = 0 and is deterministic; the seed is recorded
  // in model metadata only.
  std::uint64_t seed = 0;

  void Validate() const;  // throws std::invalid_argument
};

struct TraceRow {
  int iter = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
};
using TrainTrace = std::vector<TraceRow>;

// Structured hinge: max over (y, h) of <w, Phi(x,y,h)> + Delta(y_i, y),
// minus max over h of <w, Phi(x,y_i,h)>.
double MaxMarginLoss(const ModelWeights& model, const FrameSample& frame);
// A subgradient of MaxMarginLoss (the maximizing box's descriptor with the
// sign of the active term, or zero).
FeatureVector MaxMarginSubgradient(const ModelWeights& model,
                                   const FrameSample& frame);

// Soft-max relaxation of MaxMarginLoss with sharpness |beta|; the first sum
// runs over both labels and every box.
double SoftmaxLoss(const ModelWeights& model, const FrameSample& frame,
                   double beta);
FeatureVector SoftmaxLossGradient(const ModelWeights& model,
                                  const FrameSample& frame, double beta);

struct ObjectiveValue {
  double value = 0.0;
  FeatureVector gradient;
};

// Sum over frames of the configured loss plus (C/2)|w|^2, with its
// (sub)gradient. Throws DataError on an empty dataset.
ObjectiveValue LatentObjective(const ModelWeights& model,
                               const TrackedDataset& data,
                               const TrainConfig& config);

struct LatentTrainResult {
  ModelWeights model;
  TrainTrace trace;
  bool converged = false;
  std::string message;
};

// Minimizes LatentObjective from w = 0 with L-BFGS. Requires at least one
// VAD-positive and one VAD-negative frame.
LatentTrainResult TrainLatent(const TrackedDataset& data,
                              const TrainConfig& config);

// iter,objective,grad_norm
void WriteTraceCsv(std::ostream& out, const TrainTrace& trace);

}  // namespace asd

#endif  // ASD_LATENT_TRAINER_H_
