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

#include "asd/speaker_adapt.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "asd/optimizer.h"
#include "asd/text_format.h"

namespace asd {
namespace {

bool Adjacent(const LabelStream& stream, std::size_t a, std::size_t b) {
  if (stream.frame_indices.empty()) return true;
  return stream.frame_indices[b] - stream.frame_indices[a] == 1;
}

// Numerically stable log(1 + exp(-m)).
double LogOnePlusExpNeg(double m) {
  if (m > 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

// 1 / (1 + exp(m)).
double SigmoidNeg(double m) {
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

}  // namespace

void HarvestConfig::Validate() const {
  if (!(window_seconds > 0.0) || !std::isfinite(window_seconds)) {
    throw std::invalid_argument("window_seconds must be positive");
  }
}

int SecondsToFrames(double seconds, double frame_rate_hz) {
  return std::max(1, static_cast<int>(std::lround(seconds * frame_rate_hz)));
}

double TemporalWeight(const LabelStream& stream, std::size_t position,
                      int window_frames) {
  if (window_frames < 1) throw std::invalid_argument("window must be >= 1");
  if (position >= stream.labels.size()) {
    throw std::out_of_range("temporal weight position out of range");
  }
  if (!stream.frame_indices.empty() &&
      stream.frame_indices.size() != stream.labels.size()) {
    throw std::invalid_argument("label stream arrays differ in length");
  }
  const std::int8_t label = stream.labels[position];
  if (label == 0) return 1.0;
  const std::size_t half = static_cast<std::size_t>(window_frames) / 2;

  std::size_t left = 0;
  for (std::size_t j = position; j > 0 && left < half; --j, ++left) {
    if (stream.labels[j - 1] != label || !Adjacent(stream, j - 1, j)) break;
  }
  std::size_t right = 0;
  for (std::size_t j = position; j + 1 < stream.labels.size() && right < half;
       ++j, ++right) {
    if (stream.labels[j + 1] != label || !Adjacent(stream, j, j + 1)) break;
  }
  const std::size_t run = 1 + left + right;
  return static_cast<double>(
      std::min<std::size_t>(run, static_cast<std::size_t>(window_frames)));
}

SampleMap HarvestSamples(const ModelWeights& generic, const TrackedDataset& data,
                         const HarvestConfig& config) {
  config.Validate();
  if (generic.dim() != data.dim) throw DimensionMismatch(data.dim, generic.dim());
  const int window = SecondsToFrames(config.window_seconds, data.frame_rate_hz);

  std::map<int, LabelStream> streams;
  for (int track : data.track_ids) {
    LabelStream& s = streams[track];
    s.labels.assign(data.frames.size(), 0);
    s.frame_indices.reserve(data.frames.size());
    for (const FrameSample& frame : data.frames) {
      s.frame_indices.push_back(frame.frame_index);
    }
  }

  struct Pending {
    std::size_t position;
    std::size_t box;
    double score;
  };
  std::map<int, std::vector<Pending>> pending;
  for (std::size_t i = 0; i < data.frames.size(); ++i) {
    const FrameSample& frame = data.frames[i];
    const bool speaking = frame.vad_label == Label::kPositive;
    if (!speaking && !config.include_vad_negative) continue;
    const std::size_t best = speaking ? SelectBestBox(generic, frame).index
                                      : frame.boxes.size();
    for (std::size_t h = 0; h < frame.boxes.size(); ++h) {
      const BoxObservation& box = frame.boxes[h];
      streams[box.track_id].labels[i] = h == best ? 1 : -1;
      pending[box.track_id].push_back({i, h, Score(generic, box.features)});
    }
  }

  SampleMap out;
  for (const auto& [track, items] : pending) {
    const LabelStream& stream = streams.at(track);
    std::vector<WeightedSample>& samples = out[track];
    samples.reserve(items.size());
    for (const Pending& p : items) {
      const FrameSample& frame = data.frames[p.position];
      WeightedSample s;
      s.features = frame.boxes[p.box].features;
      s.label = stream.labels[p.position] > 0 ? Label::kPositive
                                              : Label::kNegative;
      s.alpha = config.weighting_enabled
                    ? TemporalWeight(stream, p.position, window)
                    : 1.0;
      s.frame_index = frame.frame_index;
      s.track_id = track;
      s.generic_score = p.score;
      samples.push_back(std::move(s));
    }
  }
  return out;
}

LossAndGradient WeightedLogisticLoss(const ModelWeights& model,
                                     const WeightedSample& sample) {
  const double y = ToInt(sample.label);
  const double margin = y * Score(model, sample.features);
  LossAndGradient out;
  out.loss = sample.alpha * LogOnePlusExpNeg(margin);
  out.gradient = (-sample.alpha * y * SigmoidNeg(margin)) * sample.features;
  return out;
}

LossAndGradient SpecificObjective(const ModelWeights& model,
                                  std::span<const WeightedSample> samples,
                                  double C) {
  LossAndGradient out;
  out.loss = 0.5 * C * model.w.squaredNorm();
  out.gradient = C * model.w;
  for (const WeightedSample& s : samples) {
    const double y = ToInt(s.label);
    const double margin = y * Score(model, s.features);
    out.loss += s.alpha * LogOnePlusExpNeg(margin);
    out.gradient.noalias() += (-s.alpha * y * SigmoidNeg(margin)) * s.features;
  }
  return out;
}

ModelWeights TrainSpecific(std::span<const WeightedSample> samples,
                           const TrainConfig& config,
                           const FeatureVector* init) {
  config.Validate();
  if (samples.empty()) throw DataError("no samples: need positive and negative");
  const int dim = static_cast<int>(samples.front().features.size());
  std::size_t positives = 0;
  for (const WeightedSample& s : samples) {
    if (s.features.size() != dim) throw DimensionMismatch(dim, s.features.size());
    if (s.label == Label::kPositive) ++positives;
  }
  if (positives == 0) throw DataError("no positive samples");
  if (positives == samples.size()) throw DataError("no negative samples");

  ModelWeights scratch = ModelWeights::Zeros(dim);
  const SmoothObjective objective = [&](const Eigen::VectorXd& x,
                                        Eigen::VectorXd* gradient) {
    scratch.w = x;
    LossAndGradient v = SpecificObjective(scratch, samples, config.C);
    *gradient = std::move(v.gradient);
    return v.loss;
  };
  MinimizerOptions options;
  options.max_iters = config.max_iters;
  options.grad_tol = config.grad_tol;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(dim);
  if (init != nullptr) {
    if (init->size() != dim) throw DimensionMismatch(dim, init->size());
    x0 = *init;
  }
  MinimizerResult min = MinimizeLbfgs(objective, x0, options);
  return ModelWeights{std::move(min.x),
                      "specific C=" + FormatDouble(config.C) + " samples=" +
                          std::to_string(samples.size())};
}

void WriteHarvestCsv(std::ostream& out, const SampleMap& samples) {
  std::vector<const WeightedSample*> rows;
  for (const auto& [track, list] : samples) {
    for (const WeightedSample& s : list) rows.push_back(&s);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    return std::tie(a->frame_index, a->track_id) <
           std::tie(b->frame_index, b->track_id);
  });
  out << "frame,track,label,alpha,score_gen\n";
  for (const WeightedSample* s : rows) {
    out << s->frame_index << ',' << s->track_id << ',' << ToInt(s->label) << ','
        << FormatDouble(s->alpha) << ',' << FormatDouble(s->generic_score)
        << '\n';
  }
}

}  // namespace asd
