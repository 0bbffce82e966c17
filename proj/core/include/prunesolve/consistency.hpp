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

#ifndef PRUNESOLVE_CONSISTENCY_HPP_
#define PRUNESOLVE_CONSISTENCY_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "prunesolve/model.hpp"

namespace prunesolve {

using MaskSet = std::vector<Tensor4<std::uint8_t>>;  // index = layer - 1

MaskSet MasksFromSolution(const NetworkSpec& net, const PruningSolution& sol);

// Per feature map t = 0..L, per channel: flags for the convolution output
// U^(t) and for V^(t), the map the next layers actually read.
struct ChannelFlags {
  std::vector<std::vector<std::uint8_t>> u;
  std::vector<std::vector<std::uint8_t>> v;
};

// Forward pass, ascending t. Network-input channels are never trivially zero.
ChannelFlags PropagateTriviallyZero(const NetworkSpec& net,
                                    const MaskSet& masks);

// Backward pass, descending t. Final-layer channels are never meaningless.
// A channel of V^(s) that feeds a live channel of V^(t) through a skip
// addition stays meaningful.
ChannelFlags PropagateMeaningless(const NetworkSpec& net, const MaskSet& masks);

struct WeightCoord {
  int layer = 0;
  int i = 0;
  int j = 0;
  int a = 0;
  int b = 0;
  friend bool operator==(const WeightCoord&, const WeightCoord&) = default;
};

struct ActivityReport {
  ChannelFlags trivially_zero;
  ChannelFlags meaningless;
  std::vector<WeightCoord> inactive;  // ascending (layer, i, j, a, b)
  long long unpruned = 0;

  bool clean() const { return inactive.empty(); }
};

ActivityReport FindInactiveWeights(const NetworkSpec& net,
                                   const MaskSet& masks);

// Objective over unpruned weights that are not inactive.
double ActiveObjective(const NetworkSpec& net, const ImportanceSet& importance,
                       const MaskSet& masks, const ActivityReport& report);

}  // namespace prunesolve

#endif  // PRUNESOLVE_CONSISTENCY_HPP_
