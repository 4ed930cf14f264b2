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

#include "asd/evaluator.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

#include "asd/data_io.h"
#include "asd/text_format.h"

namespace asd {
namespace {

struct ClassCounts {
  std::int64_t positives = 0;
  std::int64_t negatives = 0;
};

ClassCounts CountClasses(std::span<const ScoredEntry> series) {
  ClassCounts c;
  for (const ScoredEntry& e : series) {
    (e.gt == Label::kPositive ? c.positives : c.negatives) += 1;
  }
  return c;
}

void RequireBothClasses(const ClassCounts& c) {
  if (c.positives == 0 || c.negatives == 0) {
    throw DataError("ground truth holds a single class");
  }
}

// Indices sorted by descending score; the sort is stable so equal scores
// keep series order.
std::vector<std::size_t> DescendingOrder(std::span<const ScoredEntry> series) {
  std::vector<std::size_t> order(series.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return series[a].score > series[b].score;
  });
  return order;
}

std::vector<std::uint8_t> Threshold(std::span<const double> scores,
                                    double threshold) {
  std::vector<std::uint8_t> out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = scores[i] >= threshold ? 1 : 0;
  }
  return out;
}

std::vector<double> MovingMean(std::span<const double> scores, int window) {
  const std::size_t n = scores.size();
  const std::size_t half = static_cast<std::size_t>(window) / 2;
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + scores[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return out;
}

void CheckWindow(int window_frames) {
  if (window_frames < 1 || window_frames % 2 == 0) {
    throw std::invalid_argument("smoothing window must be odd and >= 1, got " +
                                std::to_string(window_frames));
  }
}

}  // namespace

ScoredSeries ScoreDataset(const TrackedDataset& data, const TrackScorer& scorer) {
  ScoredSeries series;
  for (const FrameSample& frame : data.frames) {
    for (const BoxObservation& box : frame.boxes) {
      if (!box.gt_label) continue;
      series.push_back({frame.frame_index, box.track_id,
                        scorer(box.track_id, box.features), *box.gt_label});
    }
  }
  return series;
}

std::map<int, ScoredSeries> SplitByTrack(const ScoredSeries& series) {
  std::map<int, ScoredSeries> out;
  for (const ScoredEntry& e : series) out[e.track_id].push_back(e);
  return out;
}

double RocAuc(std::span<const ScoredEntry> series) {
  const ClassCounts counts = CountClasses(series);
  RequireBothClasses(counts);
  const std::vector<std::size_t> order = DescendingOrder(series);
  // Twice the trapezoid area in units of (1/P) x (1/N) cells, kept integral
  // so the result is exact up to the final division.
  std::int64_t twice_area = 0;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::int64_t block_tp = 0;
    std::int64_t block_fp = 0;
    const double value = series[order[i]].score;
    for (; i < order.size() && series[order[i]].score == value; ++i) {
      (series[order[i]].gt == Label::kPositive ? block_tp : block_fp) += 1;
    }
    twice_area += block_fp * (2 * tp + block_tp);
    tp += block_tp;
    fp += block_fp;
  }
  return static_cast<double>(twice_area) /
         (2.0 * static_cast<double>(counts.positives) *
          static_cast<double>(counts.negatives));
}

OperatingPoint ThresholdAtDiagonal(std::span<const ScoredEntry> series) {
  const ClassCounts counts = CountClasses(series);
  RequireBothClasses(counts);
  const double p = static_cast<double>(counts.positives);
  const double n = static_cast<double>(counts.negatives);
  const std::vector<std::size_t> order = DescendingOrder(series);

  OperatingPoint best{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  double best_gap = 1.0;
  bool best_is_reject_all = true;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double value = series[order[i]].score;
    for (; i < order.size() && series[order[i]].score == value; ++i) {
      (series[order[i]].gt == Label::kPositive ? tp : fp) += 1;
    }
    const double tpr = static_cast<double>(tp) / p;
    const double fpr = static_cast<double>(fp) / n;
    const double gap = std::abs(tpr + fpr - 1.0);
    // Descending sweep: a strict improvement is needed to move to a lower
    // threshold, except when leaving the reject-all sentinel.
    if (gap < best_gap || (best_is_reject_all && gap <= best_gap)) {
      best = {value, tpr, fpr};
      best_gap = gap;
      best_is_reject_all = false;
    }
  }
  return best;
}

std::vector<std::uint8_t> TemporalSmooth(std::span<const std::uint8_t> decisions,
                                         int window_frames) {
  CheckWindow(window_frames);
  const std::size_t n = decisions.size();
  if (window_frames == 1) return {decisions.begin(), decisions.end()};
  const std::size_t half = static_cast<std::size_t>(window_frames) / 2;
  std::vector<std::size_t> ones(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) ones[i + 1] = ones[i] + (decisions[i] != 0);
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    const std::size_t votes = hi - lo + 1;
    const std::size_t yes = ones[hi + 1] - ones[lo];
    if (2 * yes > votes) {
      out[i] = 1;
    } else if (2 * yes < votes) {
      out[i] = 0;
    } else {
      out[i] = decisions[i] != 0;
    }
  }
  return out;
}

int SmoothingWindowFrames(double seconds, double frame_rate_hz) {
  if (!(seconds >= 0.0) || !(frame_rate_hz > 0.0)) {
    throw std::invalid_argument("smoothing duration must be >= 0");
  }
  const double frames = seconds * frame_rate_hz;
  const double k = std::floor((frames - 1.0) / 2.0 + 0.5);
  return std::max(1, 2 * static_cast<int>(k) + 1);
}

FScore ComputeFScore(std::span<const std::uint8_t> predicted,
                     std::span<const std::uint8_t> truth) {
  if (predicted.size() != truth.size()) {
    throw std::invalid_argument("f-score inputs differ in length");
  }
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool t = truth[i] != 0;
    tp += p && t;
    fp += p && !t;
    fn += !p && t;
  }
  if (tp + fp == 0 || tp + fn == 0) return {0.0, true};
  if (tp == 0) return {0.0, false};
  const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  return {2.0 * precision * recall / (precision + recall), false};
}

MeanStd ComputeMeanStd(std::span<const double> values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

AucSummary EvaluateAuc(const TrackedDataset& data, const TrackScorer& scorer) {
  AucSummary summary;
  for (const auto& [track, series] : SplitByTrack(ScoreDataset(data, scorer))) {
    const ClassCounts c = CountClasses(series);
    if (c.positives == 0 || c.negatives == 0) continue;
    summary.per_track[track] = RocAuc(series);
  }
  if (summary.per_track.empty()) {
    throw DataError("no track has both ground-truth classes");
  }
  double sum = 0.0;
  for (const auto& [track, auc] : summary.per_track) sum += auc;
  summary.mean = sum / static_cast<double>(summary.per_track.size());
  return summary;
}

EvalReport Loocv(std::span<const TrackedDataset> folds, const TrainFn& train) {
  if (folds.size() < 2) throw DataError("LOOCV needs at least 2 folds");
  for (const TrackedDataset& fold : folds) {
    if (fold.dim != folds.front().dim) {
      throw DimensionMismatch(folds.front().dim, fold.dim);
    }
    if (fold.track_ids != folds.front().track_ids) {
      throw DataError("LOOCV folds disagree on the track roster");
    }
  }
  std::vector<FoldResult> results;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    std::vector<TrackedDataset> rest;
    for (std::size_t j = 0; j < folds.size(); ++j) {
      if (j != k) rest.push_back(folds[j]);
    }
    const TrackScorer scorer = train(ConcatenateDatasets(rest));
    const AucSummary auc = EvaluateAuc(folds[k], scorer);
    results.push_back({static_cast<int>(k), auc.per_track, auc.mean});
  }
  return Summarize(std::move(results));
}

EvalReport Summarize(std::vector<FoldResult> folds) {
  EvalReport report;
  std::map<int, std::vector<double>> by_speaker;
  std::vector<double> means;
  for (const FoldResult& f : folds) {
    for (const auto& [track, auc] : f.auc) by_speaker[track].push_back(auc);
    means.push_back(f.mean_auc);
  }
  for (const auto& [track, values] : by_speaker) {
    report.per_speaker[track] = ComputeMeanStd(values);
  }
  report.mean_auc = ComputeMeanStd(means);
  report.folds = std::move(folds);
  return report;
}

std::vector<TrackDecisions> ThresholdDecisions(const ScoredSeries& series) {
  std::vector<TrackDecisions> out;
  for (const auto& [track, entries] : SplitByTrack(series)) {
    const ClassCounts c = CountClasses(entries);
    if (c.positives == 0 || c.negatives == 0) continue;
    TrackDecisions d;
    d.track_id = track;
    d.threshold = ThresholdAtDiagonal(entries).threshold;
    for (const ScoredEntry& e : entries) {
      d.scores.push_back(e.score);
      d.truth.push_back(e.gt == Label::kPositive ? 1 : 0);
    }
    d.decisions = Threshold(d.scores, d.threshold);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<FCurvePoint> FScoreCurve(std::span<const TrackDecisions> tracks,
                                     std::span<const int> windows,
                                     SmoothMode mode) {
  std::vector<FCurvePoint> curve;
  for (int window : windows) {
    CheckWindow(window);
    for (const TrackDecisions& t : tracks) {
      std::vector<std::uint8_t> smoothed;
      if (mode == SmoothMode::kMajorityVote) {
        smoothed = TemporalSmooth(t.decisions, window);
      } else {
        smoothed = Threshold(MovingMean(t.scores, window), t.threshold);
      }
      curve.push_back({window, t.track_id, ComputeFScore(smoothed, t.truth).value});
    }
  }
  return curve;
}

std::vector<FCurvePoint> FScoreCurve(const ScoredSeries& series,
                                     std::span<const int> windows,
                                     SmoothMode mode) {
  const std::vector<TrackDecisions> tracks = ThresholdDecisions(series);
  return FScoreCurve(tracks, windows, mode);
}

std::vector<double> MeanFScoreByWindow(std::span<const FCurvePoint> curve,
                                       std::span<const int> windows) {
  std::vector<double> means;
  for (int window : windows) {
    double sum = 0.0;
    int count = 0;
    for (const FCurvePoint& p : curve) {
      if (p.window_frames != window) continue;
      sum += p.fscore;
      ++count;
    }
    means.push_back(count > 0 ? sum / count : 0.0);
  }
  return means;
}

std::vector<TimelineRow> BuildTimeline(const ScoredSeries& series,
                                       const std::map<int, double>& thresholds,
                                       int window_frames) {
  CheckWindow(window_frames);
  std::map<int, std::vector<std::size_t>> rows_of_track;
  for (std::size_t i = 0; i < series.size(); ++i) {
    rows_of_track[series[i].track_id].push_back(i);
  }
  std::vector<TimelineRow> rows(series.size());
  for (const auto& [track, idx] : rows_of_track) {
    const auto thr = thresholds.find(track);
    if (thr == thresholds.end()) {
      throw DataError("no threshold for track " + std::to_string(track));
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::vector<std::uint8_t> raw;
    for (std::size_t i : idx) {
      lo = std::min(lo, series[i].score);
      hi = std::max(hi, series[i].score);
      raw.push_back(series[i].score >= thr->second ? 1 : 0);
    }
    const std::vector<std::uint8_t> smoothed = TemporalSmooth(raw, window_frames);
    const double range = hi - lo;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const ScoredEntry& e = series[idx[k]];
      rows[idx[k]] = {e.frame_index, e.track_id,
                      range > 0.0 ? (e.score - lo) / range : 0.0, smoothed[k],
                      e.gt};
    }
  }
  return rows;
}

void WriteTimelineCsv(std::ostream& out, std::span<const TimelineRow> rows) {
  out << "frame,track,score_norm,decision,gt\n";
  for (const TimelineRow& r : rows) {
    out << r.frame_index << ',' << r.track_id << ',' << FormatDouble(r.score_norm)
        << ',' << static_cast<int>(r.decision) << ',' << ToInt(r.gt) << '\n';
  }
}

std::vector<TimelineRow> ReadTimelineCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || Trim(line) != "frame,track,score_norm,decision,gt") {
    throw DataError("timeline line 1: unexpected header");
  }
  std::vector<TimelineRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitFields(Trim(line), ',');
    try {
      if (fields.size() != 5) throw DataError("expected 5 fields");
      TimelineRow r;
      r.frame_index = ParseInt(fields[0]);
      r.track_id = static_cast<int>(ParseInt(fields[1]));
      r.score_norm = ParseDouble(fields[2]);
      const std::int64_t decision = ParseInt(fields[3]);
      if (decision != 0 && decision != 1) throw DataError("decision not 0/1");
      r.decision = static_cast<std::uint8_t>(decision);
      r.gt = LabelFromInt(static_cast<int>(ParseInt(fields[4])));
      rows.push_back(r);
    } catch (const DataError& e) {
      throw DataError("timeline line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

void WriteReportCsv(std::ostream& out, const EvalReport& report) {
  out << "speaker,fold,auc\n";
  for (const FoldResult& f : report.folds) {
    for (const auto& [track, auc] : f.auc) {
      out << track << ',' << f.fold << ',' << FormatDouble(auc) << '\n';
    }
  }
}

void WriteSummaryCsv(std::ostream& out, const EvalReport& report) {
  out << "speaker,mean_auc,std\n";
  for (const auto& [track, ms] : report.per_speaker) {
    out << track << ',' << FormatDouble(ms.mean) << ',' << FormatDouble(ms.std)
        << '\n';
  }
  out << "mean," << FormatDouble(report.mean_auc.mean) << ','
      << FormatDouble(report.mean_auc.std) << '\n';
}

void WriteFCurveCsv(std::ostream& out, std::span<const FCurvePoint> curve) {
  out << "window_frames,speaker,fscore\n";
  for (const FCurvePoint& p : curve) {
    out << p.window_frames << ',' << p.track_id << ',' << FormatDouble(p.fscore)
        << '\n';
  }
}

}  // namespace asd
