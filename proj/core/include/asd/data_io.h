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

#ifndef ASD_DATA_IO_H_
#define ASD_DATA_IO_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>

#include "asd/model_core.h"

namespace asd {

// Signed square root per entry, then L2 normalization. The zero vector maps
// to itself.
FeatureVector NormalizeFeatures(const FeatureVector& v);

// Applies NormalizeFeatures to every box.
TrackedDataset NormalizeDataset(TrackedDataset data);

// Appends a constant 1.0 feature to every box (dim + 1), which lets the
// intercept-free model learn a bias.
TrackedDataset AppendBiasFeature(TrackedDataset data);

// Concatenates datasets with the same dim. Frame indices are shifted so
// they stay strictly increasing and leave a one-frame gap between parts;
// the gap breaks temporal runs across recordings.
TrackedDataset ConcatenateDatasets(std::span<const TrackedDataset> parts);

// On-disk layout: a manifest of key=value lines
//   dim, frame_rate_hz, num_tracks, frames_file, has_gt
// and a frames CSV with header frame,track,vad,gt,f0,...,f{d-1}, one row per
// (frame, track); gt is 1, -1, or 0 for unlabeled. frames_file is resolved
// relative to the manifest's directory.
struct DatasetManifest {
  int dim = 0;
  double frame_rate_hz = 0.0;
  int num_tracks = 0;
  std::string frames_file;
  bool has_gt = false;
};

void WriteFramesCsv(std::ostream& out, const TrackedDataset& data);
// Parses a frames CSV. Errors name the offending line.
TrackedDataset ReadFramesCsv(std::istream& in, int dim, double frame_rate_hz);

// Writes <manifest_path> and a frames CSV next to it named
// <stem>.frames.csv.
void SaveDataset(const TrackedDataset& data, const std::string& manifest_path);
TrackedDataset LoadDataset(const std::string& manifest_path);

}  // namespace asd

#endif  // ASD_DATA_IO_H_
