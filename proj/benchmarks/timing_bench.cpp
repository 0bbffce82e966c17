// Copyright 2026 The prunesolve Authors.
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

#include <string>

#include "prunesolve/timing.hpp"

namespace prunesolve {
namespace {

void BM_FitModel(benchmark::State& state) {
  const auto family = static_cast<TimingFamily>(state.range(0));
  const std::vector<TimingSample> samples =
      SynthSamples(LayerGeometry{3, 1, 56, 56}, CoefficientLaw{}, 0.02, 1);
  for (auto _ : state) benchmark::DoNotOptimize(FitModel(samples, family, 1));
  state.SetLabel(std::string(ToString(family)));
}
BENCHMARK(BM_FitModel)->DenseRange(0, 5);

}  // namespace
}  // namespace prunesolve
