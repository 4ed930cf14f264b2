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

#include "asd/data_io.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "asd/text_format.h"

namespace asd {

FeatureVector NormalizeFeatures(const FeatureVector& v) {
  FeatureVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double x = v[i];
    out[i] = x < 0.0 ? -std::sqrt(-x) : std::sqrt(x);
  }
  const double norm = out.norm();
  if (norm > 0.0) out /= norm;
  return out;
}

TrackedDataset NormalizeDataset(TrackedDataset data) {
  for (FrameSample& frame : data.frames) {
    for (BoxObservation& box : frame.boxes) {
      box.features = NormalizeFeatures(box.features);
    }
  }
  return data;
}

TrackedDataset AppendBiasFeature(TrackedDataset data) {
  for (FrameSample& frame : data.frames) {
    for (BoxObservation& box : frame.boxes) {
      box.features.conservativeResize(box.features.size() + 1);
      box.features[box.features.size() - 1] = 1.0;
    }
  }
  data.dim += 1;
  return data;
}

TrackedDataset ConcatenateDatasets(std::span<const TrackedDataset> parts) {
  if (parts.empty()) throw DataError("nothing to concatenate");
  TrackedDataset out;
  out.dim = parts.front().dim;
  out.frame_rate_hz = parts.front().frame_rate_hz;
  std::int64_t offset = 0;
  bool first = true;
  for (const TrackedDataset& part : parts) {
    if (part.dim != out.dim) throw DimensionMismatch(out.dim, part.dim);
    if (part.frames.empty()) continue;
    if (!first) offset -= part.frames.front().frame_index;
    for (const FrameSample& frame : part.frames) {
      FrameSample copy = frame;
      copy.frame_index += offset;
      out.frames.push_back(std::move(copy));
    }
    offset = out.frames.back().frame_index + 2;
    first = false;
  }
  RebuildRoster(out);
  return out;
}

void WriteFramesCsv(std::ostream& out, const TrackedDataset& data) {
  out << "frame,track,vad,gt";
  for (int j = 0; j < data.dim; ++j) out << ",f" << j;
  out << '\n';
  for (const FrameSample& frame : data.frames) {
    for (const BoxObservation& box : frame.boxes) {
      out << frame.frame_index << ',' << box.track_id << ','
          << ToInt(frame.vad_label) << ','
          << (box.gt_label ? ToInt(*box.gt_label) : 0);
      for (int j = 0; j < data.dim; ++j) {
        out << ',' << FormatDouble(box.features[j]);
      }
      out << '\n';
    }
  }
}

TrackedDataset ReadFramesCsv(std::istream& in, int dim, double frame_rate_hz) {
  TrackedDataset data;
  data.dim = dim;
  data.frame_rate_hz = frame_rate_hz;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw DataError("frames line 1: missing header");
  {
    const auto header = SplitFields(Trim(line), ',');
    const std::size_t expected = 4 + static_cast<std::size_t>(dim);
    if (header.size() != expected || header[0] != "frame" ||
        header[1] != "track" || header[2] != "vad" || header[3] != "gt") {
      throw DataError("frames line 1: header must be frame,track,vad,gt and " +
                      std::to_string(dim) + " feature columns, got " +
                      std::to_string(header.size()) + " columns");
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = Trim(line);
    if (text.empty()) continue;
    try {
      const auto fields = SplitFields(text, ',');
      if (fields.size() != 4 + static_cast<std::size_t>(dim)) {
        throw DataError("expected " + std::to_string(4 + dim) + " fields, got " +
                        std::to_string(fields.size()));
      }
      const std::int64_t frame_index = ParseInt(fields[0]);
      BoxObservation box;
      box.track_id = static_cast<int>(ParseInt(fields[1]));
      if (box.track_id < 0) throw DataError("negative track id");
      const Label vad = LabelFromInt(static_cast<int>(ParseInt(fields[2])));
      const std::int64_t gt = ParseInt(fields[3]);
      if (gt != 0) box.gt_label = LabelFromInt(static_cast<int>(gt));
      box.features.resize(dim);
      for (int j = 0; j < dim; ++j) {
        box.features[j] = ParseDouble(fields[4 + static_cast<std::size_t>(j)]);
      }
      if (!box.features.allFinite()) throw DataError("non-finite feature");

      if (data.frames.empty() || data.frames.back().frame_index != frame_index) {
        if (!data.frames.empty() && frame_index < data.frames.back().frame_index) {
          throw DataError("frame index " + std::to_string(frame_index) +
                          " is not increasing");
        }
        data.frames.push_back(FrameSample{frame_index, vad, {}});
      } else if (data.frames.back().vad_label != vad) {
        throw DataError("vad label differs within frame " +
                        std::to_string(frame_index));
      }
      for (const BoxObservation& other : data.frames.back().boxes) {
        if (other.track_id == box.track_id) {
          throw DataError("duplicate track " + std::to_string(box.track_id) +
                          " in frame " + std::to_string(frame_index));
        }
      }
      data.frames.back().boxes.push_back(std::move(box));
    } catch (const DataError& e) {
      throw DataError("frames line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  RebuildRoster(data);
  data.Validate();
  return data;
}

void SaveDataset(const TrackedDataset& data, const std::string& manifest_path) {
  data.Validate();
  const std::filesystem::path manifest(manifest_path);
  const std::string frames_name = manifest.stem().string() + ".frames.csv";
  const std::filesystem::path frames_path = manifest.parent_path() / frames_name;
  {
    std::ofstream out(frames_path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + frames_path.string() + "'");
    WriteFramesCsv(out, data);
    if (!out) throw DataError("write failed for '" + frames_path.string() + "'");
  }
  std::ofstream out(manifest, std::ios::binary);
  if (!out) throw DataError("cannot write '" + manifest_path + "'");
  out << "dim=" << data.dim << '\n'
      << "frame_rate_hz=" << FormatDouble(data.frame_rate_hz) << '\n'
      << "num_tracks=" << data.track_ids.size() << '\n'
      << "frames_file=" << frames_name << '\n'
      << "has_gt=" << (data.HasGroundTruth() ? 1 : 0) << '\n';
  if (!out) throw DataError("write failed for '" + manifest_path + "'");
}

TrackedDataset LoadDataset(const std::string& manifest_path) {
  DatasetManifest m;
  bool seen_dim = false, seen_rate = false, seen_tracks = false, seen_file = false;
  for (const auto& [key, value] : ReadKeyValueFile(manifest_path)) {
    try {
      if (key == "dim") {
        m.dim = static_cast<int>(ParseInt(value));
        seen_dim = true;
      } else if (key == "frame_rate_hz") {
        m.frame_rate_hz = ParseDouble(value);
        seen_rate = true;
      } else if (key == "num_tracks") {
        m.num_tracks = static_cast<int>(ParseInt(value));
        seen_tracks = true;
      } else if (key == "frames_file") {
        m.frames_file = value;
        seen_file = true;
      } else if (key == "has_gt") {
        const std::int64_t flag = ParseInt(value);
        if (flag != 0 && flag != 1) throw DataError("has_gt must be 0 or 1");
        m.has_gt = flag == 1;
      } else {
        throw DataError("unknown key '" + key + "'");
      }
    } catch (const DataError& e) {
      throw DataError(manifest_path + ": " + e.what());
    }
  }
  if (!seen_dim || !seen_rate || !seen_tracks || !seen_file) {
    throw DataError(manifest_path +
                    ": manifest needs dim, frame_rate_hz, num_tracks, frames_file");
  }
  if (m.dim < 1) throw DataError(manifest_path + ": dim must be >= 1");
  if (!(m.frame_rate_hz > 0.0)) {
    throw DataError(manifest_path + ": frame_rate_hz must be positive");
  }

  std::filesystem::path frames_path(m.frames_file);
  if (frames_path.is_relative()) {
    frames_path = std::filesystem::path(manifest_path).parent_path() / frames_path;
  }
  std::ifstream in(frames_path, std::ios::binary);
  if (!in) throw DataError("cannot open frames file '" + frames_path.string() + "'");
  TrackedDataset data;
  try {
    data = ReadFramesCsv(in, m.dim, m.frame_rate_hz);
  } catch (const DataError& e) {
    throw DataError(frames_path.string() + ": " + e.what());
  }
  if (static_cast<int>(data.track_ids.size()) != m.num_tracks) {
    throw DataError(manifest_path + ": num_tracks=" + std::to_string(m.num_tracks) +
                    " but frames hold " + std::to_string(data.track_ids.size()));
  }
  if (m.has_gt && !data.HasGroundTruth()) {
    throw DataError(manifest_path + ": has_gt=1 but some boxes are unlabeled");
  }
  return data;
}

}  // namespace asd
