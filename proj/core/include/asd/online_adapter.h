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

#ifndef ASD_ONLINE_ADAPTER_H_
#define ASD_ONLINE_ADAPTER_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "asd/latent_trainer.h"
#include "asd/model_core.h"
#include "asd/speaker_adapt.h"

namespace asd {

struct OnlineSchedule {
  // Frames consumed per iteration; 0 means one second of frames.
  int batch_frames = 0;
  // Each speaker stops collecting samples after this many seconds' worth of
  // harvested positive frames.
  double max_seconds_per_speaker = 10.0;
  // Subsample the majority class per speaker to the minority count.
  bool balance = true;
  // Start each refit from the previous target model instead of zero.
  bool warm_start = false;

  void Validate() const;
};

struct CurveRow {
  int iteration = 0;
  // Samples accumulated so far over all speakers, before balancing.
  std::int64_t samples_used = 0;
  std::map<int, double> auc_per_speaker;
  double mean_auc = 0.0;
};
using LearningCurve = std::vector<CurveRow>;

// Generic score plus target score.
double PredictOnline(const ModelWeights& generic, const ModelWeights& target,
                     const FeatureVector& phi);

// Majority-class subsampling: keep the minority class whole and the
// highest-alpha members of the majority class, earlier frames first on
// ties. The result is in frame order. Single-class input comes back as is.
std::vector<WeightedSample> BalanceSamples(std::span<const WeightedSample> samples);

// Streams frames past a fixed generic model, accumulates harvested samples
// per speaker and refits each speaker's target model after every batch.
class OnlineAdapter {
 public:
  OnlineAdapter(ModelWeights generic, std::vector<int> track_ids,
                double frame_rate_hz, OnlineSchedule schedule,
                HarvestConfig harvest, TrainConfig train);

  // One adaptation iteration. Returns the number of samples added.
  std::int64_t Consume(std::span<const FrameSample> batch);

  double Predict(int track_id, const FeatureVector& phi) const;
  TrackScorer Scorer() const;

  const ModelWeights& generic() const { return generic_; }
  const std::map<int, ModelWeights>& target_models() const { return targets_; }
  const std::vector<WeightedSample>& accumulated(int track_id) const;
  // Samples the last refit of |track_id| trained on.
  const std::vector<WeightedSample>& training_set(int track_id) const;
  std::int64_t samples_accumulated() const { return total_samples_; }
  int budget_frames() const { return budget_frames_; }
  bool BudgetExhausted() const;

 private:
  void Refit(int track_id);

  const ModelWeights generic_;
  const std::vector<int> track_ids_;
  const OnlineSchedule schedule_;
  const HarvestConfig harvest_;
  const TrainConfig train_;
  const int window_frames_;
  const int budget_frames_;

  std::map<int, LabelStream> streams_;
  std::map<int, std::vector<WeightedSample>> accumulated_;
  std::map<int, std::vector<WeightedSample>> training_sets_;
  std::map<int, int> positives_;
  std::map<int, ModelWeights> targets_;
  std::int64_t total_samples_ = 0;
};

struct OnlineResult {
  std::map<int, ModelWeights> models;
  LearningCurve curve;
};

// Feeds |target| through an OnlineAdapter batch by batch until the data or
// every speaker's budget runs out. Row 0 of the curve is the generic model
// alone; AUC is measured on all ground-truth boxes of |target|.
OnlineResult RunOnline(const TrackedDataset& target, const ModelWeights& generic,
                       const OnlineSchedule& schedule,
                       const HarvestConfig& harvest, const TrainConfig& train);

// iter,samples,track,auc,mean_auc
void WriteCurveCsv(std::ostream& out, const LearningCurve& curve);

}  // namespace asd

#endif  // ASD_ONLINE_ADAPTER_H_
