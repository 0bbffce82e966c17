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

#ifndef PRUNESOLVE_BENCHMARKS_BENCH_UTIL_HPP_
#define PRUNESOLVE_BENCHMARKS_BENCH_UTIL_HPP_

#include <random>
#include <vector>

#include "prunesolve/model.hpp"
#include "prunesolve/resources.hpp"
#include "prunesolve/solver.hpp"

namespace prunesolve::bench {

// A plain chain of `layers` convolutions with `channels` maps everywhere and
// random integer importances. The size budget is `fraction` of the full size.
inline Problem Chain(int layers, int channels, int kernel, PruneMode mode,
                     double fraction, std::uint64_t seed = 7) {
  std::vector<LayerSpec> specs(layers);
  for (int l = 0; l < layers; ++l) {
    specs[l] = LayerSpec{l + 1, channels, channels, kernel, 1, 8, 8, 8, 8, {}};
  }
  NetworkSpec net(channels, std::move(specs), {}, {}, false);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> value(0, 9);
  ImportanceSet importance;
  for (int l = 1; l <= layers; ++l) {
    const Shape4 shape{channels, channels, kernel, kernel};
    std::vector<double> values(static_cast<std::size_t>(shape.size()));
    for (double& x : values) x = value(rng);
    ImportanceTensor t;
    t.layer = l;
    t.values = Tensor4<double>(shape, std::move(values));
    importance.push_back(std::move(t));
  }

  const ResourceSpec probe = Coefficients(net, ResourceKind::kSize, 0.0);
  const double full = Usage(net, PruningSolution::AllOnes(net, mode), probe);
  ResourceSpec spec = Coefficients(net, ResourceKind::kSize, fraction * full);
  return Problem::Create(std::move(net), std::move(importance), std::move(spec),
                         mode);
}

}  // namespace prunesolve::bench

#endif  // PRUNESOLVE_BENCHMARKS_BENCH_UTIL_HPP_
