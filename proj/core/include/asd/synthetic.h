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

#ifndef ASD_SYNTHETIC_H_
#define ASD_SYNTHETIC_H_

#include <cstdint>
#include <string>

#include "asd/model_core.h"
#include "asd/text_format.h"

namespace asd {

// Simulated multi-party meeting. A Markov chain over {silence, speaker 0..K-1}
// decides who holds the floor each frame; every speaker has a visible track
// in every frame. At most one person speaks at a time.
//
// Box features are isotropic Gaussians with standard deviation noise_sigma:
//   quiet box:     mean 0
//   speaking box:  mean signal * u + speaker_shift * d_k
// where u = (1, ..., 1) / sqrt(dim) and d_k is a unit direction drawn per
// speaker from speaker_seed. Datasets sharing speaker_seed (and
// num_speakers, dim) therefore show the same people; seed drives the
// conversation and the noise.
struct SynthConfig {
  int num_speakers = 3;
  int dim = 64;
  int frames = 3000;
  double frame_rate_hz = 10.0;
  // Probability the current state keeps the floor for another frame.
  double turn_persistence = 0.97;
  // Probability that a finished turn hands over to silence.
  double silence_prob = 0.2;
  double signal = 2.0;
  double speaker_shift = 1.0;
  double noise_sigma = 1.0;
  // Fraction of frames whose VAD label is flipped.
  double vad_error_rate = 0.0;
  std::uint64_t seed = 1;
  std::uint64_t speaker_seed = 1;
  // First track id; tracks are first_track .. first_track + K - 1.
  int first_track = 0;

  // Throws std::invalid_argument naming the bad field.
  void Validate() const;
  // Applies key=value overrides; unknown keys throw std::invalid_argument.
  void Apply(const KeyValueList& values);
};

TrackedDataset GenerateSynthetic(const SynthConfig& config);

// Speaker k's mean offset direction d_k (unit norm).
FeatureVector SpeakerDirection(const SynthConfig& config, int speaker);

}  // namespace asd

#endif  // ASD_SYNTHETIC_H_
