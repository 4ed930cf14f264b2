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

#include "asd/online_adapter.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "asd/evaluator.h"
#include "asd/text_format.h"

namespace asd {

void OnlineSchedule::Validate() const {
  if (batch_frames < 0) throw std::invalid_argument("batch_frames must be >= 1");
  if (!(max_seconds_per_speaker > 0.0)) {
    throw std::invalid_argument("max_seconds_per_speaker must be positive");
  }
}

double PredictOnline(const ModelWeights& generic, const ModelWeights& target,
                     const FeatureVector& phi) {
  return Score(generic, phi) + Score(target, phi);
}

std::vector<WeightedSample> BalanceSamples(
    std::span<const WeightedSample> samples) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (samples[i].label == Label::kPositive ? pos : neg).push_back(i);
  }
  if (pos.empty() || neg.empty() || pos.size() == neg.size()) {
    return {samples.begin(), samples.end()};
  }
  std::vector<std::size_t>& majority = pos.size() > neg.size() ? pos : neg;
  const std::size_t keep = std::min(pos.size(), neg.size());
  std::stable_sort(majority.begin(), majority.end(),
                   [&](std::size_t a, std::size_t b) {
                     if (samples[a].alpha != samples[b].alpha) {
                       return samples[a].alpha > samples[b].alpha;
                     }
                     return samples[a].frame_index < samples[b].frame_index;
                   });
  majority.resize(keep);
  std::vector<std::size_t> chosen(pos);
  chosen.insert(chosen.end(), neg.begin(), neg.end());
  std::sort(chosen.begin(), chosen.end());
  std::vector<WeightedSample> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(samples[i]);
  return out;
}

OnlineAdapter::OnlineAdapter(ModelWeights generic, std::vector<int> track_ids,
                             double frame_rate_hz, OnlineSchedule schedule,
                             HarvestConfig harvest, TrainConfig train)
    : generic_(std::move(generic)),
      track_ids_(std::move(track_ids)),
      schedule_(schedule),
      harvest_(harvest),
      train_(train),
      window_frames_(SecondsToFrames(harvest.window_seconds, frame_rate_hz)),
      budget_frames_(
          SecondsToFrames(schedule.max_seconds_per_speaker, frame_rate_hz)) {
  schedule_.Validate();
  harvest_.Validate();
  train_.Validate();
  for (int track : track_ids_) {
    streams_[track];
    accumulated_[track];
    training_sets_[track];
    positives_[track] = 0;
    targets_[track] = ModelWeights::Zeros(generic_.dim(), "online target");
  }
}

bool OnlineAdapter::BudgetExhausted() const {
  return std::all_of(positives_.begin(), positives_.end(), [&](const auto& kv) {
    return kv.second >= budget_frames_;
  });
}

const std::vector<WeightedSample>& OnlineAdapter::accumulated(int track_id) const {
  return accumulated_.at(track_id);
}

const std::vector<WeightedSample>& OnlineAdapter::training_set(
    int track_id) const {
  return training_sets_.at(track_id);
}

std::int64_t OnlineAdapter::Consume(std::span<const FrameSample> batch) {
  struct Pending {
    int track;
    std::size_t position;
    const BoxObservation* box;
    Label label;
    double score;
    std::int64_t frame_index;
  };
  std::vector<Pending> pending;
  for (const FrameSample& frame : batch) {
    for (auto& [track, stream] : streams_) {
      stream.labels.push_back(0);
      stream.frame_indices.push_back(frame.frame_index);
    }
    const bool speaking = frame.vad_label == Label::kPositive;
    if (!speaking && !harvest_.include_vad_negative) continue;
    const std::size_t best =
        speaking ? SelectBestBox(generic_, frame).index : frame.boxes.size();
    // Budgets are checked against the count at the start of the frame.
    std::map<int, bool> open;
    for (const BoxObservation& box : frame.boxes) {
      const auto it = positives_.find(box.track_id);
      if (it == positives_.end()) {
        throw DataError("online stream has unknown track " +
                        std::to_string(box.track_id));
      }
      open[box.track_id] = it->second < budget_frames_;
    }
    for (std::size_t h = 0; h < frame.boxes.size(); ++h) {
      const BoxObservation& box = frame.boxes[h];
      const Label label = h == best ? Label::kPositive : Label::kNegative;
      LabelStream& stream = streams_.at(box.track_id);
      stream.labels.back() = static_cast<std::int8_t>(ToInt(label));
      if (!open[box.track_id]) continue;
      if (label == Label::kPositive) ++positives_[box.track_id];
      pending.push_back({box.track_id, stream.labels.size() - 1, &box, label,
                         Score(generic_, box.features), frame.frame_index});
    }
  }

  // Weights use every label seen so far, including the rest of this batch.
  std::map<int, bool> touched;
  for (const Pending& p : pending) {
    WeightedSample s;
    s.features = p.box->features;
    s.label = p.label;
    s.alpha = harvest_.weighting_enabled
                  ? TemporalWeight(streams_.at(p.track), p.position,
                                   window_frames_)
                  : 1.0;
    s.frame_index = p.frame_index;
    s.track_id = p.track;
    s.generic_score = p.score;
    accumulated_[p.track].push_back(std::move(s));
    touched[p.track] = true;
  }
  for (const auto& [track, unused] : touched) Refit(track);
  total_samples_ += static_cast<std::int64_t>(pending.size());
  return static_cast<std::int64_t>(pending.size());
}

void OnlineAdapter::Refit(int track_id) {
  const std::vector<WeightedSample>& all = accumulated_.at(track_id);
  std::vector<WeightedSample> train =
      schedule_.balance ? BalanceSamples(all) : all;
  const bool has_pos = std::any_of(train.begin(), train.end(), [](const auto& s) {
    return s.label == Label::kPositive;
  });
  const bool has_neg = std::any_of(train.begin(), train.end(), [](const auto& s) {
    return s.label == Label::kNegative;
  });
  ModelWeights& target = targets_.at(track_id);
  if (!has_pos || !has_neg) {
    // Prior only until both classes have been seen.
    target = ModelWeights::Zeros(generic_.dim(), "online target");
    training_sets_[track_id].clear();
    return;
  }
  const FeatureVector* init = schedule_.warm_start ? &target.w : nullptr;
  ModelWeights fitted = TrainSpecific(train, train_, init);
  fitted.metadata = "online target track=" + std::to_string(track_id) +
                    " samples=" + std::to_string(train.size());
  target = std::move(fitted);
  training_sets_[track_id] = std::move(train);
}

double OnlineAdapter::Predict(int track_id, const FeatureVector& phi) const {
  return PredictOnline(generic_, targets_.at(track_id), phi);
}

TrackScorer OnlineAdapter::Scorer() const { return TrackScorer(generic_, targets_); }

OnlineResult RunOnline(const TrackedDataset& target, const ModelWeights& generic,
                       const OnlineSchedule& schedule,
                       const HarvestConfig& harvest, const TrainConfig& train) {
  if (target.frames.empty()) throw DataError("online target dataset is empty");
  if (generic.dim() != target.dim) throw DimensionMismatch(target.dim, generic.dim());
  for (const FrameSample& frame : target.frames) {
    if (frame.boxes.size() < 2) {
      throw DataError("online adaptation needs >= 2 tracks per frame; frame " +
                      std::to_string(frame.frame_index) + " has " +
                      std::to_string(frame.boxes.size()));
    }
  }
  const int batch = schedule.batch_frames > 0
                        ? schedule.batch_frames
                        : SecondsToFrames(1.0, target.frame_rate_hz);

  OnlineAdapter adapter(generic, target.track_ids, target.frame_rate_hz,
                        schedule, harvest, train);
  OnlineResult result;
  auto record = [&](int iteration) {
    const AucSummary auc = EvaluateAuc(target, adapter.Scorer());
    result.curve.push_back(
        {iteration, adapter.samples_accumulated(), auc.per_track, auc.mean});
  };
  record(0);

  const std::span<const FrameSample> frames(target.frames);
  std::size_t next = 0;
  int iteration = 0;
  while (next < frames.size() && !adapter.BudgetExhausted()) {
    const std::size_t count =
        std::min(static_cast<std::size_t>(batch), frames.size() - next);
    adapter.Consume(frames.subspan(next, count));
    next += count;
    record(++iteration);
  }
  result.models = adapter.target_models();
  return result;
}

void WriteCurveCsv(std::ostream& out, const LearningCurve& curve) {
  out << "iter,samples,track,auc,mean_auc\n";
  for (const CurveRow& row : curve) {
    for (const auto& [track, auc] : row.auc_per_speaker) {
      out << row.iteration << ',' << row.samples_used << ',' << track << ','
          << FormatDouble(auc) << ',' << FormatDouble(row.mean_auc) << '\n';
    }
  }
}

}  // namespace asd
