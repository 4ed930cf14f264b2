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

#ifndef ASD_SPEAKER_ADAPT_H_
#define ASD_SPEAKER_ADAPT_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "asd/latent_trainer.h"
#include "asd/model_core.h"

namespace asd {

struct WeightedSample {
  FeatureVector features;
  Label label = Label::kNegative;
  // Temporal continuity weight, in [1, W].
  double alpha = 1.0;
  std::int64_t frame_index = 0;
  int track_id = 0;
  // Generic-model score of the box, kept for the audit dump.
  double generic_score = 0.0;
};

struct HarvestConfig {
  double window_seconds = 3.0;
  bool weighting_enabled = true;
  // Also emit VAD-negative frames as negatives for every track.
  bool include_vad_negative = false;

  void Validate() const;
};

using SampleMap = std::map<int, std::vector<WeightedSample>>;

// round(seconds * fps), at least 1.
int SecondsToFrames(double seconds, double frame_rate_hz);

// Per-track stream of harvested labels: +1, -1, or 0 where the track got no
// sample. |frame_indices| runs parallel to |labels|; a gap in frame indices
// breaks a run just like a 0 does.
struct LabelStream {
  std::vector<std::int8_t> labels;
  std::vector<std::int64_t> frame_indices;
};

// Length of the run of identical non-zero labels through |position|,
// limited to floor(W/2) frames on either side and clamped to [1, W].
double TemporalWeight(const LabelStream& stream, std::size_t position,
                      int window_frames);

// Positive sample for the generic model's best box on every VAD-positive
// frame, a negative for every other box of that frame. Samples are grouped
// by track and ordered by frame.
SampleMap HarvestSamples(const ModelWeights& generic, const TrackedDataset& data,
                         const HarvestConfig& config);

struct LossAndGradient {
  double loss = 0.0;
  FeatureVector gradient;
};

// alpha * log(1 + exp(-y <w, x>)), with y the sample label.
LossAndGradient WeightedLogisticLoss(const ModelWeights& model,
                                     const WeightedSample& sample);

// Sum of WeightedLogisticLoss plus (C/2)|w|^2.
LossAndGradient SpecificObjective(const ModelWeights& model,
                                  std::span<const WeightedSample> samples,
                                  double C);

// Minimizes SpecificObjective with L-BFGS, starting from |init| or zeros.
// Throws DataError if either class is missing.
ModelWeights TrainSpecific(std::span<const WeightedSample> samples,
                           const TrainConfig& config,
                           const FeatureVector* init = nullptr);

// frame,track,label,alpha,score_gen, ordered by frame then track.
void WriteHarvestCsv(std::ostream& out, const SampleMap& samples);

}  // namespace asd

#endif  // ASD_SPEAKER_ADAPT_H_
