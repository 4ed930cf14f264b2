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

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace asd {
namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("invalid synthetic config: " + what);
}

std::mt19937_64 SeededEngine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

void SynthConfig::Validate() const {
  Require(num_speakers >= 1, "num_speakers must be >= 1");
  Require(dim >= 2, "dim must be >= 2");
  Require(frames >= 1, "frames must be >= 1");
  Require(frame_rate_hz > 0.0 && std::isfinite(frame_rate_hz),
          "frame_rate_hz must be positive");
  Require(turn_persistence > 0.0 && turn_persistence <= 1.0,
          "turn_persistence must be in (0, 1]");
  Require(silence_prob >= 0.0 && silence_prob < 1.0,
          "silence_prob must be in [0, 1)");
  Require(std::isfinite(signal), "signal must be finite");
  Require(speaker_shift >= 0.0 && std::isfinite(speaker_shift),
          "speaker_shift must be >= 0");
  Require(noise_sigma > 0.0 && std::isfinite(noise_sigma),
          "noise_sigma must be positive");
  Require(vad_error_rate >= 0.0 && vad_error_rate < 1.0,
          "vad_error_rate must be in [0, 1)");
  Require(first_track >= 0, "first_track must be >= 0");
}

void SynthConfig::Apply(const KeyValueList& values) {
  for (const auto& [key, value] : values) {
    if (key == "num_speakers") num_speakers = static_cast<int>(ParseInt(value));
    else if (key == "dim") dim = static_cast<int>(ParseInt(value));
    else if (key == "frames") frames = static_cast<int>(ParseInt(value));
    else if (key == "frame_rate_hz") frame_rate_hz = ParseDouble(value);
    else if (key == "turn_persistence") turn_persistence = ParseDouble(value);
    else if (key == "silence_prob") silence_prob = ParseDouble(value);
    else if (key == "signal") signal = ParseDouble(value);
    else if (key == "speaker_shift") speaker_shift = ParseDouble(value);
    else if (key == "noise_sigma") noise_sigma = ParseDouble(value);
    else if (key == "vad_error_rate") vad_error_rate = ParseDouble(value);
    else if (key == "seed") seed = static_cast<std::uint64_t>(ParseInt(value));
    else if (key == "speaker_seed") speaker_seed = static_cast<std::uint64_t>(ParseInt(value));
    else if (key == "first_track") first_track = static_cast<int>(ParseInt(value));
    else throw std::invalid_argument("unknown synthetic config key '" + key + "'");
  }
}

FeatureVector SpeakerDirection(const SynthConfig& config, int speaker) {
  std::mt19937_64 engine =
      SeededEngine(config.speaker_seed, static_cast<std::uint64_t>(speaker) + 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureVector d(config.dim);
  for (int j = 0; j < config.dim; ++j) d[j] = normal(engine);
  return d / d.norm();
}

TrackedDataset GenerateSynthetic(const SynthConfig& config) {
  config.Validate();
  const int k_speakers = config.num_speakers;
  const int silence = k_speakers;

  const FeatureVector speaking_dir =
      FeatureVector::Constant(config.dim, 1.0 / std::sqrt(config.dim));
  std::vector<FeatureVector> speaking_mean;
  for (int k = 0; k < k_speakers; ++k) {
    speaking_mean.push_back(config.signal * speaking_dir +
                            config.speaker_shift * SpeakerDirection(config, k));
  }

  std::mt19937_64 engine = SeededEngine(config.seed, 0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, config.noise_sigma);

  TrackedDataset data;
  data.dim = config.dim;
  data.frame_rate_hz = config.frame_rate_hz;
  data.frames.reserve(static_cast<std::size_t>(config.frames));

  int state = 0;
  for (int t = 0; t < config.frames; ++t) {
    if (t > 0) {
      const double stay = uniform(engine);
      const double where = uniform(engine);
      if (stay >= config.turn_persistence) {
        if (state == silence) {
          state = std::min(k_speakers - 1,
                           static_cast<int>(where * k_speakers));
        } else if (k_speakers == 1 || where < config.silence_prob) {
          state = silence;
        } else {
          // Uniform over the other speakers.
          const double u = (where - config.silence_prob) /
                           (1.0 - config.silence_prob);
          int pick = std::min(k_speakers - 2,
                              static_cast<int>(u * (k_speakers - 1)));
          if (pick >= state) ++pick;
          state = pick;
        }
      }
    }

    FrameSample frame;
    frame.frame_index = t;
    for (int k = 0; k < k_speakers; ++k) {
      BoxObservation box;
      box.track_id = config.first_track + k;
      box.features.resize(config.dim);
      for (int j = 0; j < config.dim; ++j) box.features[j] = normal(engine);
      const bool speaking = state == k;
      if (speaking) box.features += speaking_mean[static_cast<std::size_t>(k)];
      box.gt_label = speaking ? Label::kPositive : Label::kNegative;
      frame.boxes.push_back(std::move(box));
    }
    const bool voiced = state != silence;
    const bool flip = uniform(engine) < config.vad_error_rate;
    frame.vad_label = (voiced != flip) ? Label::kPositive : Label::kNegative;
    data.frames.push_back(std::move(frame));
  }
  RebuildRoster(data);
  return data;
}

}  // namespace asd
