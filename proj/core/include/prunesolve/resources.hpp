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

#ifndef PRUNESOLVE_RESOURCES_HPP_
#define PRUNESOLVE_RESOURCES_HPP_

#include <span>
#include <string_view>
#include <vector>

#include "prunesolve/model.hpp"
#include "prunesolve/timing.hpp"

namespace prunesolve {

enum class ResourceKind { kSize, kMemory, kFlops, kTime };

std::string_view ToString(ResourceKind kind);
ResourceKind ParseResourceKind(std::string_view text);

// usage = sum_t a_u[t] ||u^(t)|| + sum_{t in T} a_v[t] ||v^(t)||
//       + sum_t b[t] ||A^(t)||
// over feature maps t = 0..L (b[0] is always zero). For kind = time the
// activation-independent sum of alphas is kept in `constant`; the inequality
// actually enforced is usage <= budget - constant.
struct ResourceSpec {
  ResourceKind kind = ResourceKind::kSize;
  double budget = 0.0;
  std::vector<double> a_u;
  std::vector<double> a_v;
  std::vector<double> b;
  double constant = 0.0;

  double effective_budget() const { return budget - constant; }
};

// Throws MissingTimingModel for kind = time unless every layer has a model.
ResourceSpec Coefficients(const NetworkSpec& net, ResourceKind kind,
                          double budget,
                          std::span<const TimingModel> timing = {});

// Variable part of the resource usage (excludes `constant`).
double Usage(const NetworkSpec& net, const PruningSolution& sol,
             const ResourceSpec& spec);

// Same quantity, counted weight by weight over materialised masks.
double UsageFromMasks(const NetworkSpec& net, const PruningSolution& sol,
                      const ResourceSpec& spec);

enum class Scheme { kOurs, kGbn };

std::string_view ToString(Scheme scheme);
Scheme ParseScheme(std::string_view text);

// The smallest solution allowed by the constraint set: one channel per
// prunable vector (the whole input when input channels are fixed), the
// equalities of the scheme applied, and one shape column per active output
// channel (all K*K columns in channel mode).
PruningSolution MinimalSolution(const NetworkSpec& net, PruneMode mode,
                                Scheme scheme);

double MinFeasibleUsage(const NetworkSpec& net, const ResourceSpec& spec,
                        PruneMode mode = PruneMode::kChannelSpatial,
                        Scheme scheme = Scheme::kOurs);

// Usage with every activation set to one.
double FullUsage(const NetworkSpec& net, const ResourceSpec& spec);

struct ResourceRow {
  int t = 0;
  double a_u = 0.0;
  double a_v = 0.0;
  double b = 0.0;
  long long u_count = 0;
  long long v_count = 0;
  long long mask_norm = 0;
  double contribution = 0.0;
};

struct ResourceReport {
  ResourceKind kind = ResourceKind::kSize;
  std::vector<ResourceRow> rows;  // t = 0..L
  double usage = 0.0;             // variable part
  double constant = 0.0;
  double total = 0.0;             // usage + constant
  double budget = 0.0;
  double slack = 0.0;             // budget - total
};

ResourceReport MakeReport(const NetworkSpec& net, const PruningSolution& sol,
                          const ResourceSpec& spec);

}  // namespace prunesolve

#endif  // PRUNESOLVE_RESOURCES_HPP_
