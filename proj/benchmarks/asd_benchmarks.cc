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

#include <benchmark/benchmark.h>

#include <random>

#include "asd/evaluator.h"
#include "asd/latent_trainer.h"
#include "asd/speaker_adapt.h"
#include "asd/synthetic.h"

namespace asd {
namespace {

TrackedDataset Dataset(int frames) {
  SynthConfig cfg;
  cfg.dim = 16;
  cfg.frames = frames;
  cfg.vad_error_rate = 0.05;
  return GenerateSynthetic(cfg);
}

void BM_LatentObjective(benchmark::State& state) {
  const TrackedDataset data = Dataset(static_cast<int>(state.range(0)));
  const ModelWeights model = ModelWeights::Zeros(data.dim);
  const TrainConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(LatentObjective(model, data, config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LatentObjective)->Arg(1000)->Arg(10000);

void BM_RocAuc(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  ScoredSeries series;
  for (int i = 0; i < state.range(0); ++i) {
    const bool positive = i % 3 == 0;
    series.push_back({i, 0, normal(rng) + (positive ? 1.0 : 0.0),
                      positive ? Label::kPositive : Label::kNegative});
  }
  for (auto _ : state) benchmark::DoNotOptimize(RocAuc(series));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);

void BM_HarvestSamples(benchmark::State& state) {
  const TrackedDataset data = Dataset(static_cast<int>(state.range(0)));
  const ModelWeights model = TrainLatent(data, {}).model;
  const HarvestConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(HarvestSamples(model, data, config));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HarvestSamples)->Arg(1000)->Arg(10000);

}  // namespace
}  // namespace asd

BENCHMARK_MAIN();
