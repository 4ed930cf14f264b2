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

#include "asd/synthetic.h"

#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "asd/data_io.h"

namespace asd {
namespace {

std::string Csv(const TrackedDataset& data) {
  std::ostringstream out;
  WriteFramesCsv(out, data);
  return out.str();
}

int Speaker(const FrameSample& frame) {
  for (std::size_t h = 0; h < frame.boxes.size(); ++h) {
    if (frame.boxes[h].gt_label == Label::kPositive) return static_cast<int>(h);
  }
  return -1;
}

TEST(GenerateSyntheticTest, ValidAndDeterministic) {
  SynthConfig cfg;
  cfg.dim = 5;
  cfg.frames = 400;
  const TrackedDataset a = GenerateSynthetic(cfg);
  EXPECT_NO_THROW(a.Validate());
  EXPECT_TRUE(a.HasGroundTruth());
  EXPECT_EQ(a.track_ids, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(Csv(a), Csv(GenerateSynthetic(cfg)));
  cfg.seed = 2;
  EXPECT_NE(Csv(a), Csv(GenerateSynthetic(cfg)));
}

TEST(GenerateSyntheticTest, CleanVadMatchesGroundTruth) {
  SynthConfig cfg;
  cfg.dim = 3;
  cfg.frames = 2000;
  const TrackedDataset data = GenerateSynthetic(cfg);
  int silent = 0;
  for (const FrameSample& f : data.frames) {
    const int speaker = Speaker(f);
    EXPECT_EQ(f.vad_label == Label::kPositive, speaker >= 0);
    if (speaker < 0) ++silent;
    int positives = 0;
    for (const BoxObservation& b : f.boxes) positives += b.gt_label == Label::kPositive;
    EXPECT_LE(positives, 1);
  }
  EXPECT_GT(silent, 0);
}

TEST(GenerateSyntheticTest, AbsorbingChainKeepsFirstSpeaker) {
  SynthConfig cfg;
  cfg.dim = 3;
  cfg.frames = 500;
  cfg.turn_persistence = 1.0;
  for (const FrameSample& f : GenerateSynthetic(cfg).frames) EXPECT_EQ(Speaker(f), 0);
}

TEST(GenerateSyntheticTest, MeanTurnLengthIsGeometric) {
  SynthConfig cfg;
  cfg.dim = 2;
  cfg.frames = 50000;
  cfg.turn_persistence = 0.9;
  const TrackedDataset data = GenerateSynthetic(cfg);
  int turns = 1;
  for (std::size_t t = 1; t < data.frames.size(); ++t) {
    if (Speaker(data.frames[t]) != Speaker(data.frames[t - 1])) ++turns;
  }
  const double mean = static_cast<double>(cfg.frames) / turns;
  EXPECT_NEAR(mean, 1.0 / (1.0 - cfg.turn_persistence), 0.1 * 10.0);
}

TEST(GenerateSyntheticTest, VadErrorRateIsRespected) {
  SynthConfig cfg;
  cfg.dim = 2;
  cfg.frames = 20000;
  cfg.vad_error_rate = 0.2;
  int flipped = 0;
  for (const FrameSample& f : GenerateSynthetic(cfg).frames) {
    flipped += (f.vad_label == Label::kPositive) != (Speaker(f) >= 0);
  }
  EXPECT_NEAR(flipped / 20000.0, 0.2, 0.015);
}

TEST(GenerateSyntheticTest, ZeroShiftIgnoresSpeakerIdentity) {
  SynthConfig cfg;
  cfg.dim = 4;
  cfg.frames = 300;
  cfg.speaker_shift = 0.0;
  const std::string base = Csv(GenerateSynthetic(cfg));
  cfg.speaker_seed = 99;
  EXPECT_EQ(Csv(GenerateSynthetic(cfg)), base);
  cfg.speaker_shift = 1.0;
  EXPECT_NE(Csv(GenerateSynthetic(cfg)), base);
}

TEST(GenerateSyntheticTest, SpeakingMeanFollowsShift) {
  SynthConfig cfg;
  cfg.num_speakers = 2;
  cfg.dim = 6;
  cfg.frames = 20000;
  cfg.signal = 1.0;
  cfg.speaker_shift = 2.0;
  const TrackedDataset data = GenerateSynthetic(cfg);
  FeatureVector sum = FeatureVector::Zero(6);
  int count = 0;
  for (const FrameSample& f : data.frames) {
    if (Speaker(f) == 1) {
      sum += f.boxes[1].features;
      ++count;
    }
  }
  const FeatureVector expected =
      FeatureVector::Constant(6, 1.0 / std::sqrt(6.0)) + 2.0 * SpeakerDirection(cfg, 1);
  EXPECT_LT((sum / count - expected).lpNorm<Eigen::Infinity>(), 0.1);
  EXPECT_NEAR(SpeakerDirection(cfg, 1).norm(), 1.0, 1e-12);
}

TEST(GenerateSyntheticTest, FirstTrackOffsetsIds) {
  SynthConfig cfg;
  cfg.dim = 2;
  cfg.frames = 5;
  cfg.first_track = 10;
  EXPECT_EQ(GenerateSynthetic(cfg).track_ids, (std::vector<int>{10, 11, 12}));
}

TEST(SynthConfigTest, ValidateNamesField) {
  const auto message = [](auto mutate) {
    SynthConfig cfg;
    mutate(cfg);
    try {
      cfg.Validate();
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message([](SynthConfig& c) { c.frames = 0; }).find("frames"), std::string::npos);
  EXPECT_NE(message([](SynthConfig& c) { c.dim = 1; }).find("dim"), std::string::npos);
  EXPECT_NE(message([](SynthConfig& c) { c.turn_persistence = 0.0; }).find("turn_persistence"),
            std::string::npos);
  EXPECT_NE(message([](SynthConfig& c) { c.silence_prob = 1.0; }).find("silence_prob"),
            std::string::npos);
  EXPECT_NE(message([](SynthConfig& c) { c.noise_sigma = 0.0; }).find("noise_sigma"),
            std::string::npos);
  EXPECT_NE(message([](SynthConfig& c) { c.vad_error_rate = 1.0; }).find("vad_error_rate"),
            std::string::npos);
  EXPECT_EQ(message([](SynthConfig&) {}), "");
}

TEST(SynthConfigTest, ApplyOverrides) {
  SynthConfig cfg;
  cfg.Apply({{"dim", "7"}, {"speaker_shift", "2.5"}, {"seed", "42"}});
  EXPECT_EQ(cfg.dim, 7);
  EXPECT_EQ(cfg.speaker_shift, 2.5);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_THROW(cfg.Apply({{"colour", "red"}}), std::invalid_argument);
  EXPECT_THROW(cfg.Apply({{"dim", "seven"}}), DataError);
}

}  // namespace
}  // namespace asd
