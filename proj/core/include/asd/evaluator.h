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

#ifndef ASD_EVALUATOR_H_
#define ASD_EVALUATOR_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "asd/model_core.h"

namespace asd {

struct ScoredEntry {
  std::int64_t frame_index = 0;
  int track_id = 0;
  double score = 0.0;
  Label gt = Label::kNegative;
};
using ScoredSeries = std::vector<ScoredEntry>;

// Scores every box that carries a ground-truth label. Frames are visited in
// order, so each per-track subsequence is time ordered.
ScoredSeries ScoreDataset(const TrackedDataset& data, const TrackScorer& scorer);

// Per-track subsequences, preserving order.
std::map<int, ScoredSeries> SplitByTrack(const ScoredSeries& series);

// Trapezoidal area under the ROC; tied scores form one diagonal segment.
// Throws DataError unless both classes are present.
double RocAuc(std::span<const ScoredEntry> series);

struct OperatingPoint {
  double threshold = 0.0;  // predict speaking iff score >= threshold
  double tpr = 0.0;
  double fpr = 0.0;
};

// Threshold whose operating point is closest to the anti-diagonal
// TPR + FPR = 1 (the equal-error point). Candidates are the distinct scores
// plus a reject-all threshold (+inf); ties go to the higher observed score.
OperatingPoint ThresholdAtDiagonal(std::span<const ScoredEntry> series);

// Centered majority vote over |window_frames| (odd, >= 1), truncated at the
// sequence ends. A tied vote keeps the frame's own value.
std::vector<std::uint8_t> TemporalSmooth(std::span<const std::uint8_t> decisions,
                                         int window_frames);

// Nearest odd window for a duration; 0 seconds gives 1. Exact halves round
// up.
int SmoothingWindowFrames(double seconds, double frame_rate_hz);

struct FScore {
  double value = 0.0;
  // Set when precision or recall had a zero denominator; value is then 0.
  bool undefined = false;
};

FScore ComputeFScore(std::span<const std::uint8_t> predicted,
                     std::span<const std::uint8_t> truth);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};
MeanStd ComputeMeanStd(std::span<const double> values);

// AUC per track (tracks whose ground truth holds a single class are left
// out) and their mean.
struct AucSummary {
  std::map<int, double> per_track;
  double mean = 0.0;
};
AucSummary EvaluateAuc(const TrackedDataset& data, const TrackScorer& scorer);

struct FoldResult {
  int fold = 0;
  std::map<int, double> auc;
  double mean_auc = 0.0;
};

struct EvalReport {
  std::vector<FoldResult> folds;
  std::map<int, MeanStd> per_speaker;
  // Spread of the per-fold mean AUC.
  MeanStd mean_auc;
};

using TrainFn = std::function<TrackScorer(const TrackedDataset& train)>;

// Leave-one-out over |folds|: train on the concatenation of all other folds
// and evaluate per-speaker AUC on the held-out one.
EvalReport Loocv(std::span<const TrackedDataset> folds, const TrainFn& train);

// Aggregates fold results into per-speaker and overall mean +- std.
EvalReport Summarize(std::vector<FoldResult> folds);

// Binarized scores of one track, thresholded at its diagonal point.
struct TrackDecisions {
  int track_id = 0;
  double threshold = 0.0;
  std::vector<double> scores;
  std::vector<std::uint8_t> decisions;
  std::vector<std::uint8_t> truth;
};

// One entry per track holding both ground-truth classes.
std::vector<TrackDecisions> ThresholdDecisions(const ScoredSeries& series);

enum class SmoothMode {
  kMajorityVote,    // threshold, then majority vote
  kMeanThenThreshold,  // moving mean of raw scores, then threshold
};

struct FCurvePoint {
  int window_frames = 1;
  int track_id = 0;
  double fscore = 0.0;
};

std::vector<FCurvePoint> FScoreCurve(std::span<const TrackDecisions> tracks,
                                     std::span<const int> windows,
                                     SmoothMode mode = SmoothMode::kMajorityVote);

// Convenience: ThresholdDecisions followed by FScoreCurve.
std::vector<FCurvePoint> FScoreCurve(const ScoredSeries& series,
                                     std::span<const int> windows,
                                     SmoothMode mode = SmoothMode::kMajorityVote);

// Mean over tracks of the F-scores at each window, in |windows| order.
std::vector<double> MeanFScoreByWindow(std::span<const FCurvePoint> curve,
                                       std::span<const int> windows);

struct TimelineRow {
  std::int64_t frame_index = 0;
  int track_id = 0;
  double score_norm = 0.0;  // per-track min-max normalized, 0 if constant
  std::uint8_t decision = 0;
  Label gt = Label::kNegative;
};

std::vector<TimelineRow> BuildTimeline(const ScoredSeries& series,
                                       const std::map<int, double>& thresholds,
                                       int window_frames);

// frame,track,score_norm,decision,gt
void WriteTimelineCsv(std::ostream& out, std::span<const TimelineRow> rows);
std::vector<TimelineRow> ReadTimelineCsv(std::istream& in);

// speaker,fold,auc
void WriteReportCsv(std::ostream& out, const EvalReport& report);
// speaker,mean_auc,std; the overall mean row uses speaker "mean".
void WriteSummaryCsv(std::ostream& out, const EvalReport& report);
// window_frames,speaker,fscore
void WriteFCurveCsv(std::ostream& out, std::span<const FCurvePoint> curve);

}  // namespace asd

#endif  // ASD_EVALUATOR_H_
