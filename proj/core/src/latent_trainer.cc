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

#include "asd/latent_trainer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "asd/optimizer.h"
#include "asd/text_format.h"

namespace asd {
namespace {

std::vector<double> BoxScores(const ModelWeights& model,
                              const FrameSample& frame) {
  if (frame.boxes.empty()) throw DataError("frame has no boxes");
  std::vector<double> scores;
  scores.reserve(frame.boxes.size());
  for (const BoxObservation& box : frame.boxes) {
    scores.push_back(Score(model, box.features));
  }
  return scores;
}

// log(sum_i exp(a_i) + exp(extra)), max-shifted.
double LogSumExp(const std::vector<double>& a, double extra) {
  double peak = extra;
  for (double v : a) peak = std::max(peak, v);
  double sum = std::exp(extra - peak);
  for (double v : a) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

double LogSumExp(const std::vector<double>& a) {
  return LogSumExp(a, -std::numeric_limits<double>::infinity());
}

// Everything the soft-max loss and its gradient share for one frame:
// the box exponents of the loss-augmented sum and both log-partitions.
struct SoftmaxTerms {
  std::vector<double> augmented;  // exponents of the y = +1 terms, first sum
  std::vector<double> clamped;    // exponents of the second sum (y = y_i)
  double log_augmented = 0.0;
  double log_clamped = 0.0;
};

SoftmaxTerms ComputeSoftmaxTerms(const ModelWeights& model,
                                 const FrameSample& frame, double beta) {
  const std::vector<double> scores = BoxScores(model, frame);
  const double log_n = std::log(static_cast<double>(scores.size()));
  SoftmaxTerms t;
  t.augmented.resize(scores.size());
  if (frame.vad_label == Label::kPositive) {
    // y = +1 costs nothing; y = -1 contributes n copies of exp(beta).
    for (std::size_t h = 0; h < scores.size(); ++h) {
      t.augmented[h] = beta * scores[h];
    }
    t.log_augmented = LogSumExp(t.augmented, beta + log_n);
    t.clamped = t.augmented;
    t.log_clamped = LogSumExp(t.clamped);
  } else {
    // y = +1 pays Delta = 1; y = -1 contributes n copies of exp(0).
    for (std::size_t h = 0; h < scores.size(); ++h) {
      t.augmented[h] = beta * scores[h] + beta;
    }
    t.log_augmented = LogSumExp(t.augmented, log_n);
    t.log_clamped = log_n;
  }
  return t;
}

void CheckBeta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("beta must be positive and finite");
  }
}

}  // namespace

LossKind ParseLossKind(const std::string& name) {
  if (name == "softmax") return LossKind::kSoftmax;
  if (name == "maxmargin") return LossKind::kMaxMargin;
  throw std::invalid_argument("unknown loss '" + name +
                              "' (expected softmax or maxmargin)");
}

std::string LossKindName(LossKind kind) {
  return kind == LossKind::kSoftmax ? "softmax" : "maxmargin";
}

void TrainConfig::Validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) {
    throw std::invalid_argument("C must be positive");
  }
  CheckBeta(beta);
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be > 0");
}

double MaxMarginLoss(const ModelWeights& model, const FrameSample& frame) {
  const std::vector<double> scores = BoxScores(model, frame);
  const double best = *std::max_element(scores.begin(), scores.end());
  // With Phi(x,-1,h) = 0 both maxima reduce to comparisons against 0 / 1.
  if (frame.vad_label == Label::kPositive) {
    return std::max(best, 1.0) - best;
  }
  return std::max(best + 1.0, 0.0);
}

FeatureVector MaxMarginSubgradient(const ModelWeights& model,
                                   const FrameSample& frame) {
  const BoxChoice best = SelectBestBox(model, frame);
  const FeatureVector& phi = frame.boxes[best.index].features;
  if (frame.vad_label == Label::kPositive) {
    if (best.score < 1.0) return -phi;
  } else if (best.score + 1.0 > 0.0) {
    return phi;
  }
  return FeatureVector::Zero(model.dim());
}

double SoftmaxLoss(const ModelWeights& model, const FrameSample& frame,
                   double beta) {
  CheckBeta(beta);
  const SoftmaxTerms t = ComputeSoftmaxTerms(model, frame, beta);
  return (t.log_augmented - t.log_clamped) / beta;
}

FeatureVector SoftmaxLossGradient(const ModelWeights& model,
                                  const FrameSample& frame, double beta) {
  CheckBeta(beta);
  const SoftmaxTerms t = ComputeSoftmaxTerms(model, frame, beta);
  FeatureVector grad = FeatureVector::Zero(model.dim());
  // Difference of the two posterior-weighted box averages; the y = -1
  // terms carry a zero feature vector and drop out.
  for (std::size_t h = 0; h < frame.boxes.size(); ++h) {
    double weight = std::exp(t.augmented[h] - t.log_augmented);
    if (!t.clamped.empty()) weight -= std::exp(t.clamped[h] - t.log_clamped);
    grad.noalias() += weight * frame.boxes[h].features;
  }
  return grad;
}

ObjectiveValue LatentObjective(const ModelWeights& model,
                               const TrackedDataset& data,
                               const TrainConfig& config) {
  if (data.frames.empty()) throw DataError("objective on an empty dataset");
  if (model.dim() != data.dim) throw DimensionMismatch(data.dim, model.dim());
  ObjectiveValue out;
  out.value = 0.0;
  out.gradient = FeatureVector::Zero(model.dim());
  for (const FrameSample& frame : data.frames) {
    if (config.loss_kind == LossKind::kSoftmax) {
      out.value += SoftmaxLoss(model, frame, config.beta);
      out.gradient += SoftmaxLossGradient(model, frame, config.beta);
    } else {
      out.value += MaxMarginLoss(model, frame);
      out.gradient += MaxMarginSubgradient(model, frame);
    }
  }
  out.value += 0.5 * config.C * model.w.squaredNorm();
  out.gradient += config.C * model.w;
  return out;
}

LatentTrainResult TrainLatent(const TrackedDataset& data,
                              const TrainConfig& config) {
  config.Validate();
  if (data.frames.empty()) throw DataError("training on an empty dataset");
  bool has_positive = false;
  bool has_negative = false;
  for (const FrameSample& frame : data.frames) {
    (frame.vad_label == Label::kPositive ? has_positive : has_negative) = true;
  }
  if (!has_positive) throw DataError("no VAD-positive frames to train on");
  if (!has_negative) throw DataError("no VAD-negative frames to train on");

  ModelWeights scratch = ModelWeights::Zeros(data.dim);
  const SmoothObjective objective = [&](const Eigen::VectorXd& x,
                                        Eigen::VectorXd* gradient) {
    scratch.w = x;
    ObjectiveValue v = LatentObjective(scratch, data, config);
    *gradient = std::move(v.gradient);
    return v.value;
  };

  MinimizerOptions options;
  options.max_iters = config.max_iters;
  options.grad_tol = config.grad_tol;
  MinimizerResult min =
      MinimizeLbfgs(objective, Eigen::VectorXd::Zero(data.dim), options);

  LatentTrainResult result;
  result.model.w = std::move(min.x);
  result.model.metadata = "latent loss=" + LossKindName(config.loss_kind) +
                          " C=" + FormatDouble(config.C) +
                          " beta=" + FormatDouble(config.beta) +
                          " seed=" + std::to_string(config.seed);
  for (const MinimizerIteration& it : min.iterations) {
    result.trace.push_back({it.iter, it.objective, it.grad_norm});
  }
  result.converged = min.converged;
  result.message = std::move(min.message);
  return result;
}

void WriteTraceCsv(std::ostream& out, const TrainTrace& trace) {
  out << "iter,objective,grad_norm\n";
  for (const TraceRow& row : trace) {
    out << row.iter << ',' << FormatDouble(row.objective) << ','
        << FormatDouble(row.grad_norm) << '\n';
  }
}

}  // namespace asd
