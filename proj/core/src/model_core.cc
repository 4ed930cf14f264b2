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

#include "asd/model_core.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "asd/text_format.h"

namespace asd {

DimensionMismatch::DimensionMismatch(std::size_t expected, std::size_t actual)
    : std::invalid_argument("dimension mismatch: expected " +
                            std::to_string(expected) + ", got " +
                            std::to_string(actual)) {}

Label LabelFromInt(int value) {
  if (value == 1) return Label::kPositive;
  if (value == -1) return Label::kNegative;
  throw DataError("label must be 1 or -1, got " + std::to_string(value));
}

ModelWeights ModelWeights::Zeros(int dim, std::string metadata) {
  return ModelWeights{FeatureVector::Zero(dim), std::move(metadata)};
}

bool AllFinite(const FeatureVector& v) { return v.allFinite(); }

void TrackedDataset::Validate() const {
  if (dim < 1) throw DataError("dataset dim must be >= 1");
  if (!(frame_rate_hz > 0.0) || !std::isfinite(frame_rate_hz)) {
    throw DataError("frame_rate_hz must be positive");
  }
  std::set<int> seen_tracks;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FrameSample& frame = frames[i];
    if (i > 0 && frame.frame_index <= frames[i - 1].frame_index) {
      throw DataError("frame_index not strictly increasing at frame " +
                      std::to_string(frame.frame_index));
    }
    if (frame.boxes.empty()) {
      throw DataError("frame " + std::to_string(frame.frame_index) +
                      " has no boxes");
    }
    std::set<int> in_frame;
    for (const BoxObservation& box : frame.boxes) {
      if (!in_frame.insert(box.track_id).second) {
        throw DataError("duplicate track " + std::to_string(box.track_id) +
                        " in frame " + std::to_string(frame.frame_index));
      }
      if (box.features.size() != dim) {
        throw DataError("frame " + std::to_string(frame.frame_index) +
                        " track " + std::to_string(box.track_id) +
                        ": feature length " +
                        std::to_string(box.features.size()) + " != dim " +
                        std::to_string(dim));
      }
      if (!box.features.allFinite()) {
        throw DataError("frame " + std::to_string(frame.frame_index) +
                        " track " + std::to_string(box.track_id) +
                        ": non-finite feature");
      }
      seen_tracks.insert(box.track_id);
    }
  }
  if (std::vector<int>(seen_tracks.begin(), seen_tracks.end()) != track_ids) {
    throw DataError("track roster does not match the frames");
  }
}

bool TrackedDataset::HasGroundTruth() const {
  for (const FrameSample& frame : frames) {
    for (const BoxObservation& box : frame.boxes) {
      if (!box.gt_label) return false;
    }
  }
  return !frames.empty();
}

void RebuildRoster(TrackedDataset& data) {
  std::set<int> tracks;
  for (const FrameSample& frame : data.frames) {
    for (const BoxObservation& box : frame.boxes) tracks.insert(box.track_id);
  }
  data.track_ids.assign(tracks.begin(), tracks.end());
}

double Score(const ModelWeights& model, const FeatureVector& phi) {
  if (model.w.size() != phi.size()) {
    throw DimensionMismatch(model.w.size(), phi.size());
  }
  return model.w.dot(phi);
}

FeatureVector JointFeature(const FrameSample& frame, Label y, std::size_t box,
                           int dim) {
  if (box >= frame.boxes.size()) {
    throw std::out_of_range("box index " + std::to_string(box) +
                            " out of range for frame with " +
                            std::to_string(frame.boxes.size()) + " boxes");
  }
  const FeatureVector& phi = frame.boxes[box].features;
  if (phi.size() != dim) throw DimensionMismatch(dim, phi.size());
  if (y == Label::kNegative) return FeatureVector::Zero(dim);
  return phi;
}

BoxChoice SelectBestBox(const ModelWeights& model, const FrameSample& frame) {
  if (frame.boxes.empty()) throw DataError("frame has no boxes");
  BoxChoice best{0, Score(model, frame.boxes[0].features)};
  for (std::size_t h = 1; h < frame.boxes.size(); ++h) {
    const double s = Score(model, frame.boxes[h].features);
    if (s > best.score) best = {h, s};
  }
  return best;
}

TrackScorer::TrackScorer(ModelWeights prior) : prior_(std::move(prior)) {}

TrackScorer::TrackScorer(std::optional<ModelWeights> prior,
                         std::map<int, ModelWeights> specific)
    : prior_(std::move(prior)), specific_(std::move(specific)) {}

double TrackScorer::operator()(int track_id, const FeatureVector& phi) const {
  double total = 0.0;
  if (prior_) total = Score(*prior_, phi);
  if (auto it = specific_.find(track_id); it != specific_.end()) {
    total += Score(it->second, phi);
  } else if (!prior_) {
    throw DataError("no model for track " + std::to_string(track_id));
  }
  return total;
}

void WriteModel(std::ostream& out, const ModelWeights& model) {
  if (model.metadata.find('\n') != std::string::npos) {
    throw DataError("model metadata must be a single line");
  }
  out << "dim=" << model.dim() << '\n';
  for (int i = 0; i < model.dim(); ++i) {
    if (i > 0) out << ' ';
    out << FormatDouble(model.w[i]);
  }
  out << '\n';
  if (!model.metadata.empty()) out << "meta=" << model.metadata << '\n';
}

ModelWeights ReadModel(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("dim=", 0) != 0) {
    throw DataError("model line 1: expected dim=<d>");
  }
  const std::int64_t dim = ParseInt(std::string_view(line).substr(4));
  if (dim < 1) throw DataError("model line 1: dim must be >= 1");
  if (!std::getline(in, line)) throw DataError("model line 2: missing weights");
  std::vector<double> values;
  std::istringstream tokens(line);
  std::string token;
  while (tokens >> token) values.push_back(ParseDouble(token));
  if (static_cast<std::int64_t>(values.size()) != dim) {
    throw DataError("model line 2: expected " + std::to_string(dim) +
                    " weights, got " + std::to_string(values.size()));
  }
  ModelWeights model;
  model.w = Eigen::Map<const FeatureVector>(values.data(), dim);
  if (!model.w.allFinite()) throw DataError("model line 2: non-finite weight");
  if (std::getline(in, line) && !line.empty()) {
    if (line.rfind("meta=", 0) != 0) {
      throw DataError("model line 3: expected meta=<string>");
    }
    model.metadata = line.substr(5);
  }
  return model;
}

void SaveModel(const std::string& path, const ModelWeights& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  WriteModel(out, model);
  if (!out) throw DataError("write failed for '" + path + "'");
}

ModelWeights LoadModel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  try {
    return ReadModel(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

}  // namespace asd
