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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "unit/test_util.h"

namespace asd {
namespace {

using ::asd::testing::RandomFrame;
using ::asd::testing::RandomModel;

// Max over (y, h) of <w, Phi(x,y,h)> + Delta, minus max over h of
// <w, Phi(x,y_i,h)>, by enumeration.
double EnumeratedMaxMargin(const ModelWeights& w, const FrameSample& frame) {
  const int dim = w.dim();
  double first = -std::numeric_limits<double>::infinity();
  double second = -std::numeric_limits<double>::infinity();
  for (Label y : {Label::kPositive, Label::kNegative}) {
    for (std::size_t h = 0; h < frame.boxes.size(); ++h) {
      const double s = Score(w, JointFeature(frame, y, h, dim));
      const double delta = y == frame.vad_label ? 0.0 : 1.0;
      first = std::max(first, s + delta);
      if (y == frame.vad_label) second = std::max(second, s);
    }
  }
  return first - second;
}

// Smallest gap between distinct values among the augmented terms
// <w, Phi(x,y,h)> + Delta and, separately, among the clamped terms.
double MinScoreGap(const ModelWeights& w, const FrameSample& frame) {
  const int dim = w.dim();
  std::vector<double> augmented, clamped;
  for (Label y : {Label::kPositive, Label::kNegative}) {
    for (std::size_t h = 0; h < frame.boxes.size(); ++h) {
      const double s = Score(w, JointFeature(frame, y, h, dim));
      augmented.push_back(s + (y == frame.vad_label ? 0.0 : 1.0));
      if (y == frame.vad_label) clamped.push_back(s);
    }
  }
  double gap = std::numeric_limits<double>::infinity();
  for (std::vector<double>* v : {&augmented, &clamped}) {
    std::sort(v->begin(), v->end());
    for (std::size_t i = 1; i < v->size(); ++i) {
      const double d = (*v)[i] - (*v)[i - 1];
      if (d > 1e-12) gap = std::min(gap, d);
    }
  }
  return gap;
}

// Direct double sum without max-shifting.
double NaiveSoftmax(const ModelWeights& w, const FrameSample& frame, double beta) {
  const int dim = w.dim();
  double first = 0.0;
  double second = 0.0;
  for (Label y : {Label::kPositive, Label::kNegative}) {
    for (std::size_t h = 0; h < frame.boxes.size(); ++h) {
      const double s = Score(w, JointFeature(frame, y, h, dim));
      const double delta = y == frame.vad_label ? 0.0 : 1.0;
      first += std::exp(beta * s + beta * delta);
      if (y == frame.vad_label) second += std::exp(beta * s);
    }
  }
  return (std::log(first) - std::log(second)) / beta;
}

template <typename F>
FeatureVector CentralDifference(const F& f, const FeatureVector& w,
                                double step = 1e-6) {
  FeatureVector g(w.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    FeatureVector hi = w;
    FeatureVector lo = w;
    hi[j] += step;
    lo[j] -= step;
    g[j] = (f(hi) - f(lo)) / (2.0 * step);
  }
  return g;
}

double GradientError(const FeatureVector& analytic, const FeatureVector& numeric) {
  const double scale = std::max(
      {analytic.lpNorm<Eigen::Infinity>(), numeric.lpNorm<Eigen::Infinity>(), 1e-6});
  return (analytic - numeric).lpNorm<Eigen::Infinity>() / scale;
}

Label RandomLabel(std::mt19937_64& rng) {
  return std::bernoulli_distribution(0.5)(rng) ? Label::kPositive : Label::kNegative;
}

TrackedDataset RandomDataset(std::mt19937_64& rng, int dim, int frames, int boxes) {
  TrackedDataset data;
  data.dim = dim;
  data.frame_rate_hz = 10.0;
  for (int t = 0; t < frames; ++t) {
    const Label y = t % 2 == 0 ? Label::kPositive : Label::kNegative;
    data.frames.push_back(RandomFrame(rng, dim, boxes, y, t));
  }
  RebuildRoster(data);
  return data;
}

TEST(MaxMarginLossTest, ZeroWeightsGiveOne) {
  std::mt19937_64 rng(1);
  for (int boxes = 1; boxes <= 5; ++boxes) {
    for (Label y : {Label::kPositive, Label::kNegative}) {
      EXPECT_EQ(MaxMarginLoss(ModelWeights::Zeros(4), RandomFrame(rng, 4, boxes, y)),
                1.0);
    }
  }
}

TEST(MaxMarginLossTest, NegativeFrameWithLowScores) {
  FrameSample frame;
  frame.vad_label = Label::kNegative;
  frame.boxes.push_back({0, FeatureVector{{1.0, 0.0}}, std::nullopt});
  frame.boxes.push_back({1, FeatureVector{{0.0, 1.0}}, std::nullopt});
  const ModelWeights w{FeatureVector{{-3.0, -1.5}}, ""};
  // Best box score s = -1.5 < -1, so max(0, s + 1) = 0.
  EXPECT_EQ(MaxMarginLoss(w, frame), EnumeratedMaxMargin(w, frame));
  EXPECT_EQ(MaxMarginLoss(w, frame), 0.0);
  const ModelWeights near{FeatureVector{{-3.0, -0.5}}, ""};
  EXPECT_DOUBLE_EQ(MaxMarginLoss(near, frame), 0.5);
}

TEST(MaxMarginLossTest, MatchesEnumeration) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const FrameSample frame = RandomFrame(rng, 6, 3, RandomLabel(rng));
    const ModelWeights w = RandomModel(rng, 6, 0.7);
    const double loss = MaxMarginLoss(w, frame);
    EXPECT_NEAR(loss, EnumeratedMaxMargin(w, frame), 1e-12);
    EXPECT_GE(loss, 0.0);
  }
}

TEST(MaxMarginLossTest, SubgradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const FrameSample frame = RandomFrame(rng, 5, 3, RandomLabel(rng));
    const ModelWeights w = RandomModel(rng, 5);
    const auto f = [&](const FeatureVector& v) {
      return MaxMarginLoss(ModelWeights{v, ""}, frame);
    };
    // Piecewise linear: the central difference is exact away from kinks.
    const FeatureVector fd = CentralDifference(f, w.w, 1e-7);
    EXPECT_LE((MaxMarginSubgradient(w, frame) - fd).lpNorm<Eigen::Infinity>(), 1e-6);
  }
}

TEST(SoftmaxLossTest, ZeroWeightsClosedForm) {
  std::mt19937_64 rng(4);
  const double expected = std::log(1.0 + std::exp(1.0));
  EXPECT_NEAR(expected, 1.313261687, 1e-9);
  for (int boxes = 1; boxes <= 8; ++boxes) {
    for (Label y : {Label::kPositive, Label::kNegative}) {
      const FrameSample frame = RandomFrame(rng, 3, boxes, y);
      EXPECT_NEAR(SoftmaxLoss(ModelWeights::Zeros(3), frame, 1.0), expected, 1e-9);
    }
  }
}

TEST(SoftmaxLossTest, MatchesNaiveSums) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> box_count(2, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const FrameSample frame = RandomFrame(rng, 6, box_count(rng), RandomLabel(rng));
    const ModelWeights w = RandomModel(rng, 6, 0.5);
    EXPECT_LE(testing::RelativeError(SoftmaxLoss(w, frame, 2.0),
                                     NaiveSoftmax(w, frame, 2.0), 1e-300),
              1e-10);
  }
}

TEST(SoftmaxLossTest, StableForHugeScores) {
  std::mt19937_64 rng(6);
  const FrameSample frame = RandomFrame(rng, 4, 3, Label::kPositive);
  const ModelWeights w = RandomModel(rng, 4, 1e4);
  const double loss = SoftmaxLoss(w, frame, 64.0);
  EXPECT_TRUE(std::isfinite(loss));
  EXPECT_TRUE(SoftmaxLossGradient(w, frame, 64.0).allFinite());
  EXPECT_NEAR(loss, MaxMarginLoss(w, frame), 0.05);
}

TEST(SoftmaxLossTest, ApproachesMaxMarginAsBetaGrows) {
  std::mt19937_64 rng(7);
  int checked = 0;
  while (checked < 20) {
    const FrameSample frame = RandomFrame(rng, 5, 3, RandomLabel(rng));
    const ModelWeights w = RandomModel(rng, 5);
    if (MinScoreGap(w, frame) < 1.0) continue;
    ++checked;
    const double mm = MaxMarginLoss(w, frame);
    double previous = std::numeric_limits<double>::infinity();
    for (double beta : {1.0, 4.0, 16.0, 64.0}) {
      const double gap = std::abs(SoftmaxLoss(w, frame, beta) - mm);
      EXPECT_LE(gap, previous);
      previous = gap;
    }
    EXPECT_LT(previous, 0.05);
  }
}

TEST(SoftmaxLossTest, NearTiesCanMakeGapGrowWithBeta) {
  // Negative frame with box scores -1.5 and 0.
  FrameSample frame;
  frame.vad_label = Label::kNegative;
  frame.boxes = {{0, FeatureVector::Constant(1, -1.5), {}},
                 {1, FeatureVector::Constant(1, 0.0), {}}};
  const ModelWeights w{FeatureVector::Ones(1), ""};
  const double mm = MaxMarginLoss(w, frame);
  EXPECT_GT(std::abs(SoftmaxLoss(w, frame, 4.0) - mm),
            std::abs(SoftmaxLoss(w, frame, 1.0) - mm));
}

TEST(SoftmaxLossTest, InvariantUnderBoxPermutation) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    FrameSample frame = RandomFrame(rng, 5, 4, RandomLabel(rng));
    const ModelWeights w = RandomModel(rng, 5);
    const double loss = SoftmaxLoss(w, frame, 2.0);
    const FeatureVector grad = SoftmaxLossGradient(w, frame, 2.0);
    std::shuffle(frame.boxes.begin(), frame.boxes.end(), rng);
    EXPECT_NEAR(SoftmaxLoss(w, frame, 2.0), loss, 1e-12);
    EXPECT_LE((SoftmaxLossGradient(w, frame, 2.0) - grad).lpNorm<Eigen::Infinity>(),
              1e-12);
  }
}

TEST(SoftmaxGradientTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const FrameSample frame = RandomFrame(rng, 10, 3, RandomLabel(rng));
    const ModelWeights w = RandomModel(rng, 10, 0.5);
    const auto f = [&](const FeatureVector& v) {
      return SoftmaxLoss(ModelWeights{v, ""}, frame, 2.0);
    };
    EXPECT_LT(GradientError(SoftmaxLossGradient(w, frame, 2.0),
                            CentralDifference(f, w.w)),
              1e-4);
  }
}

TEST(SoftmaxGradientTest, IdenticalBoxesAtZero) {
  FrameSample frame;
  frame.vad_label = Label::kPositive;
  const FeatureVector f{{0.5, -1.0, 2.0}};
  for (int h = 0; h < 4; ++h) frame.boxes.push_back({h, f, std::nullopt});
  const double beta = 2.0;
  // Posterior on the y = +1 terms is 1 / (1 + e^beta); the second term's
  // average is f.
  const FeatureVector expected = (1.0 / (1.0 + std::exp(beta)) - 1.0) * f;
  const ModelWeights zero = ModelWeights::Zeros(3);
  const FeatureVector grad = SoftmaxLossGradient(zero, frame, beta);
  EXPECT_LE((grad - expected).lpNorm<Eigen::Infinity>(), 1e-12);
  const auto loss = [&](const FeatureVector& v) {
    return SoftmaxLoss(ModelWeights{v, ""}, frame, beta);
  };
  EXPECT_LT(GradientError(grad, CentralDifference(loss, zero.w)), 1e-4);
}

TEST(SoftmaxGradientTest, SingleBoxNegativeFrame) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const FrameSample frame = RandomFrame(rng, 4, 1, Label::kNegative);
    const ModelWeights w = RandomModel(rng, 4);
    const double beta = 2.0;
    const double s = Score(w, frame.boxes[0].features);
    const double posterior = 1.0 / (1.0 + std::exp(-beta * (s + 1.0)));
    const FeatureVector expected = posterior * frame.boxes[0].features;
    const FeatureVector grad = SoftmaxLossGradient(w, frame, beta);
    EXPECT_LE((grad - expected).lpNorm<Eigen::Infinity>(), 1e-12);
    const auto loss = [&](const FeatureVector& v) {
      return SoftmaxLoss(ModelWeights{v, ""}, frame, beta);
    };
    EXPECT_LT(GradientError(grad, CentralDifference(loss, w.w)), 1e-4);
  }
}

TEST(LatentObjectiveTest, ZeroWeightsClosedForm) {
  std::mt19937_64 rng(11);
  const TrackedDataset data = RandomDataset(rng, 4, 25, 3);
  TrainConfig cfg;
  cfg.beta = 1.0;
  const ObjectiveValue v = LatentObjective(ModelWeights::Zeros(4), data, cfg);
  EXPECT_NEAR(v.value, 25.0 * std::log(1.0 + std::exp(1.0)), 1e-9);
}

TEST(LatentObjectiveTest, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::mt19937_64 rng(seed);
    const TrackedDataset data = RandomDataset(rng, 6, 12, 3);
    const ModelWeights w = RandomModel(rng, 6, 0.3);
    TrainConfig cfg;
    cfg.C = 0.7;
    const auto f = [&](const FeatureVector& v) {
      return LatentObjective(ModelWeights{v, ""}, data, cfg).value;
    };
    EXPECT_LT(GradientError(LatentObjective(w, data, cfg).gradient,
                            CentralDifference(f, w.w)),
              1e-4)
        << "seed " << seed;
  }
}

TEST(LatentObjectiveTest, RegularizerScalesWithC) {
  std::mt19937_64 rng(12);
  const TrackedDataset data = RandomDataset(rng, 5, 10, 2);
  const ModelWeights w = RandomModel(rng, 5);
  TrainConfig cfg;
  cfg.C = 1.5;
  const double base = LatentObjective(w, data, cfg).value;
  cfg.C = 3.0;
  const double doubled = LatentObjective(w, data, cfg).value;
  EXPECT_NEAR(doubled - base, 0.75 * w.w.squaredNorm(), 1e-9);
}

TEST(LatentObjectiveTest, EmptyDatasetThrows) {
  TrackedDataset data;
  data.dim = 3;
  data.frame_rate_hz = 1.0;
  EXPECT_THROW(LatentObjective(ModelWeights::Zeros(3), data, {}), DataError);
}

TEST(TrainConfigTest, RejectsBadValues) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.C = 0.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.beta = -1.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.grad_tol = 0.0;
  EXPECT_THROW(cfg.Validate(), std::invalid_argument);
  EXPECT_THROW(ParseLossKind("hinge"), std::invalid_argument);
  EXPECT_EQ(ParseLossKind("maxmargin"), LossKind::kMaxMargin);
  EXPECT_EQ(LossKindName(LossKind::kSoftmax), "softmax");
}

// One box per positive frame carries e_0; all others are orthogonal to it.
TrackedDataset SeparableDataset(int frames) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> pick(0, 2);
  std::normal_distribution<double> noise(0.0, 1.0);
  TrackedDataset data;
  data.dim = 4;
  data.frame_rate_hz = 10.0;
  for (int t = 0; t < frames; ++t) {
    FrameSample frame;
    frame.frame_index = t;
    frame.vad_label = t % 3 == 0 ? Label::kNegative : Label::kPositive;
    const int speaker = pick(rng);
    for (int h = 0; h < 3; ++h) {
      FeatureVector f(4);
      f << 0.0, noise(rng), noise(rng), noise(rng);
      if (frame.vad_label == Label::kPositive && h == speaker) {
        f = FeatureVector::Zero(4);
        f[0] = 1.0;
      }
      frame.boxes.push_back({h, f, std::nullopt});
    }
    data.frames.push_back(std::move(frame));
  }
  RebuildRoster(data);
  return data;
}

TEST(TrainLatentTest, SeparableDataPicksSpeakingBox) {
  const TrackedDataset data = SeparableDataset(90);
  const LatentTrainResult r = TrainLatent(data, {});
  EXPECT_TRUE(r.converged) << r.message;
  for (const FrameSample& frame : data.frames) {
    if (frame.vad_label != Label::kPositive) continue;
    const BoxChoice best = SelectBestBox(r.model, frame);
    EXPECT_EQ(frame.boxes[best.index].features[0], 1.0);
    for (std::size_t h = 0; h < frame.boxes.size(); ++h) {
      if (h != best.index) {
        EXPECT_LT(Score(r.model, frame.boxes[h].features), best.score);
      }
    }
  }
}

TEST(TrainLatentTest, NoWorseThanStartAndMonotone) {
  std::mt19937_64 rng(14);
  const TrackedDataset data = RandomDataset(rng, 6, 60, 3);
  const TrainConfig cfg;
  const LatentTrainResult r = TrainLatent(data, cfg);
  const double start = LatentObjective(ModelWeights::Zeros(6), data, cfg).value;
  EXPECT_LE(LatentObjective(r.model, data, cfg).value, start);
  EXPECT_EQ(r.trace.front().iter, 0);
  EXPECT_NEAR(r.trace.front().objective, start, 1e-9);
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    EXPECT_LE(r.trace[i].objective, r.trace[i - 1].objective);
  }
  if (r.converged) EXPECT_LE(r.trace.back().grad_norm, cfg.grad_tol);
}

TEST(TrainLatentTest, Deterministic) {
  std::mt19937_64 rng(15);
  const TrackedDataset data = RandomDataset(rng, 8, 50, 3);
  const LatentTrainResult a = TrainLatent(data, {});
  const LatentTrainResult b = TrainLatent(data, {});
  ASSERT_EQ(a.model.dim(), b.model.dim());
  for (int j = 0; j < a.model.dim(); ++j) EXPECT_EQ(a.model.w[j], b.model.w[j]);
  std::ostringstream sa, sb;
  WriteTraceCsv(sa, a.trace);
  WriteTraceCsv(sb, b.trace);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(TrainLatentTest, MaxMarginModeRuns) {
  const TrackedDataset data = SeparableDataset(60);
  TrainConfig cfg;
  cfg.loss_kind = LossKind::kMaxMargin;
  const LatentTrainResult r = TrainLatent(data, cfg);
  EXPECT_LE(LatentObjective(r.model, data, cfg).value,
            LatentObjective(ModelWeights::Zeros(4), data, cfg).value);
}

TEST(TrainLatentTest, NeedsBothVadClasses) {
  std::mt19937_64 rng(16);
  TrackedDataset data = RandomDataset(rng, 3, 6, 2);
  for (FrameSample& f : data.frames) f.vad_label = Label::kPositive;
  EXPECT_THROW(TrainLatent(data, {}), DataError);
  for (FrameSample& f : data.frames) f.vad_label = Label::kNegative;
  EXPECT_THROW(TrainLatent(data, {}), DataError);
}

TEST(TrainLatentTest, TraceCsvHeader) {
  std::ostringstream s;
  WriteTraceCsv(s, {{0, 1.5, 0.25}});
  EXPECT_EQ(s.str(), "iter,objective,grad_norm\n0,1.5,0.25\n");
}

}  // namespace
}  // namespace asd
