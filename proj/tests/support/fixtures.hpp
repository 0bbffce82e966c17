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

#ifndef PRUNESOLVE_TESTS_SUPPORT_FIXTURES_HPP_
#define PRUNESOLVE_TESTS_SUPPORT_FIXTURES_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "prunesolve/model.hpp"
#include "prunesolve/resources.hpp"
#include "prunesolve/solver.hpp"
#include "prunesolve/timing.hpp"

namespace prunesolve::testing {

using Rng = std::mt19937_64;

// Toy network: 3 inputs, conv-1 3->2, conv-2 2->3, all 1x1 kernels.
NetworkSpec ToyNetwork(bool prune_input = false);
// F1 = [[4,1],[5,2],[3,1]]; conv-2 rows a = (3,3,2), b = (9,8,7).
ImportanceSet ToyImportance();
Problem ToyProblem(double budget, bool prune_input = false,
                   PruneMode mode = PruneMode::kChannel);
// Channel bits for the toy: conv-1 keeps `u1`, conv-2 keeps `u2`.
PruningSolution ToySolution(std::vector<std::uint8_t> u1,
                            std::vector<std::uint8_t> u2);

enum class Topology { kSequential, kIdentity, kZeroPad, kConv1x1, kConcat };

const char* ToString(Topology topology);
inline constexpr Topology kAllTopologies[] = {
    Topology::kSequential, Topology::kIdentity, Topology::kZeroPad,
    Topology::kConv1x1, Topology::kConcat};
inline constexpr ResourceKind kAllKinds[] = {
    ResourceKind::kSize, ResourceKind::kMemory, ResourceKind::kFlops,
    ResourceKind::kTime};

struct NetworkOptions {
  int min_layers = 2;
  int max_layers = 5;
  int max_channels = 3;
  int max_kernel = 1;
  int max_spatial = 3;
  bool prune_input = false;
};

NetworkSpec RandomNetwork(Rng& rng, Topology topology,
                          const NetworkOptions& opts = {});
// Integer importances in [0, max_value].
ImportanceSet RandomImportance(Rng& rng, const NetworkSpec& net,
                               int max_value = 9);
// Dyadic M6 coefficients, so time-kind arithmetic stays exact.
std::vector<TimingModel> RandomTimingModels(Rng& rng, const NetworkSpec& net);

struct Instance {
  std::string label;
  NetworkSpec net;
  ImportanceSet importance;
  ResourceSpec resource;
  PruneMode mode = PruneMode::kChannel;
  Scheme scheme = Scheme::kOurs;
  std::vector<TimingModel> timing;

  Problem MakeProblem() const;
};

// Free decision bits of `net` under `mode`.
int CountFreeBits(const NetworkSpec& net, PruneMode mode);

// A random instance with at most `max_free` decision bits whose budget lies
// between the minimal and the full usage. Returns nullopt when the drawn
// network is too large.
std::optional<Instance> RandomInstance(Rng& rng, Topology topology,
                                       ResourceKind kind, PruneMode mode,
                                       Scheme scheme, int max_free,
                                       const NetworkOptions& opts = {});
// Keeps drawing until an instance fits.
Instance DrawInstance(Rng& rng, Topology topology, ResourceKind kind,
                      PruneMode mode, Scheme scheme, int max_free,
                      const NetworkOptions& opts = {});

// Uniformly random bits for every vector of the solution (not necessarily
// feasible). In channel mode q is pinned to u.
PruningSolution RandomSolution(Rng& rng, const NetworkSpec& net,
                               PruneMode mode);

}  // namespace prunesolve::testing

#endif  // PRUNESOLVE_TESTS_SUPPORT_FIXTURES_HPP_
