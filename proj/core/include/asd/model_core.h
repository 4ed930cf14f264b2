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

#ifndef ASD_MODEL_CORE_H_
#define ASD_MODEL_CORE_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace asd {

// Per-box descriptor. All reals in the library are double precision.
using FeatureVector = Eigen::VectorXd;

// Model and data disagree on the feature dimension.
class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual);
};

// Malformed or inconsistent input data (files, datasets, sample sets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The optimizer or a loss evaluation produced a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Label : std::int8_t { kNegative = -1, kPositive = 1 };

inline int ToInt(Label label) { return static_cast<int>(label); }
inline Label Flip(Label label) {
  return label == Label::kPositive ? Label::kNegative : Label::kPositive;
}
// Accepts exactly +1 / -1.
Label LabelFromInt(int value);

struct BoxObservation {
  int track_id = 0;
  FeatureVector features;
  // Ground truth for evaluation only; no training path reads it.
  std::optional<Label> gt_label;
};

struct FrameSample {
  std::int64_t frame_index = 0;
  Label vad_label = Label::kNegative;
  std::vector<BoxObservation> boxes;
};

// Linear model without intercept. A bias can be emulated with
// AppendBiasFeature() in data_io.h.
struct ModelWeights {
  FeatureVector w;
  std::string metadata;

  static ModelWeights Zeros(int dim, std::string metadata = {});
  int dim() const { return static_cast<int>(w.size()); }
};

struct TrackedDataset {
  int dim = 0;
  double frame_rate_hz = 0.0;
  std::vector<FrameSample> frames;
  // Sorted roster of every track id appearing in |frames|.
  std::vector<int> track_ids;

  // Throws DataError when an invariant is broken: dim < 1, non-positive
  // frame rate, empty frame, duplicate track within a frame, feature length
  // != dim, non-finite feature, frame_index not strictly increasing, or a
  // roster that does not match the frames.
  void Validate() const;
  bool HasGroundTruth() const;
};

// Rebuilds |data.track_ids| from the frames.
void RebuildRoster(TrackedDataset& data);

bool AllFinite(const FeatureVector& v);

// <w, phi>.
double Score(const ModelWeights& model, const FeatureVector& phi);

// Joint feature map: the box descriptor for y = +1, zeros for y = -1.
FeatureVector JointFeature(const FrameSample& frame, Label y, std::size_t box,
                           int dim);

struct BoxChoice {
  std::size_t index = 0;
  double score = 0.0;
};

// Highest-scoring box; the lowest index wins ties.
BoxChoice SelectBestBox(const ModelWeights& model, const FrameSample& frame);

// Scores a box as prior(phi) + specific[track](phi). Either part may be
// absent; a missing specific model contributes zero.
class TrackScorer {
 public:
  TrackScorer() = default;
  explicit TrackScorer(ModelWeights prior);
  TrackScorer(std::optional<ModelWeights> prior,
              std::map<int, ModelWeights> specific);

  double operator()(int track_id, const FeatureVector& phi) const;

  const std::optional<ModelWeights>& prior() const { return prior_; }
  const std::map<int, ModelWeights>& specific() const { return specific_; }

 private:
  std::optional<ModelWeights> prior_;
  std::map<int, ModelWeights> specific_;
};

// Text model format:
//   dim=<d>
//   <w_0> <w_1> ... <w_{d-1}>      (17 significant digits)
//   meta=<string>                  (optional)
void WriteModel(std::ostream& out, const ModelWeights& model);
ModelWeights ReadModel(std::istream& in);
void SaveModel(const std::string& path, const ModelWeights& model);
ModelWeights LoadModel(const std::string& path);

}  // namespace asd

#endif  // ASD_MODEL_CORE_H_
