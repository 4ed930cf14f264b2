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

#ifndef ASD_TESTS_UNIT_TEST_UTIL_H_
#define ASD_TESTS_UNIT_TEST_UTIL_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "asd/model_core.h"

namespace asd::testing {

inline FeatureVector RandomVector(std::mt19937_64& rng, int dim,
                                  double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  FeatureVector v(dim);
  for (int j = 0; j < dim; ++j) v[j] = normal(rng);
  return v;
}

inline FrameSample RandomFrame(std::mt19937_64& rng, int dim, int boxes,
                               Label vad, std::int64_t index = 0) {
  FrameSample frame;
  frame.frame_index = index;
  frame.vad_label = vad;
  for (int h = 0; h < boxes; ++h) {
    frame.boxes.push_back({h, RandomVector(rng, dim), std::nullopt});
  }
  return frame;
}

inline ModelWeights RandomModel(std::mt19937_64& rng, int dim,
                                double scale = 1.0) {
  return ModelWeights{RandomVector(rng, dim, scale), "random"};
}

inline double RelativeError(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path ScratchDir(const std::string& name) {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      ("asd_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace asd::testing

#endif  // ASD_TESTS_UNIT_TEST_UTIL_H_
