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

#ifndef PRUNESOLVE_SOLVER_HPP_
#define PRUNESOLVE_SOLVER_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "prunesolve/constraints.hpp"
#include "prunesolve/model.hpp"
#include "prunesolve/program.hpp"
#include "prunesolve/resources.hpp"

namespace prunesolve {

class Problem {
 public:
  // Throws ShapeMismatch for bad importance, NegativeCoefficient when any
  // resource coefficient is negative, InfeasibleBudget when the budget is
  // below the smallest feasible usage.
  static Problem Create(NetworkSpec net, ImportanceSet importance,
                        ResourceSpec resource, PruneMode mode,
                        Scheme scheme = Scheme::kOurs);

  const NetworkSpec& net() const { return net_; }
  const ImportanceSet& importance() const { return importance_; }
  const ResourceSpec& resource() const { return resource_; }
  const ConstraintSet& constraints() const { return constraints_; }
  PruneMode mode() const { return mode_; }
  Scheme scheme() const { return scheme_; }

  // Bound on the variable part of the usage.
  double budget() const { return resource_.effective_budget(); }
  double min_feasible_usage() const { return min_usage_; }
  double full_usage() const { return full_usage_; }
  const std::vector<int>& free_variables() const { return free_; }

  CompileInput compile_input(PruneMode derive_mode, double budget) const;

 private:
  Problem(NetworkSpec net, ImportanceSet importance, ResourceSpec resource,
          PruneMode mode, Scheme scheme);

  NetworkSpec net_;
  ImportanceSet importance_;
  ResourceSpec resource_;
  PruneMode mode_;
  Scheme scheme_;
  ConstraintSet constraints_;
  double min_usage_ = 0.0;
  double full_usage_ = 0.0;
  std::vector<int> free_;
};

enum class SolveStatus { kOptimal, kFeasible, kInfeasible };

std::string_view ToString(SolveStatus status);

struct SolveStats {
  long long nodes = 0;
  int iterations = 0;
  int levels = 0;
  int block_updates = 0;
  double wall_ms = 0.0;
};

struct SolveResult {
  PruningSolution solution;
  double objective = 0.0;
  double usage = 0.0;  // variable part, compared against Problem::budget()
  SolveStatus status = SolveStatus::kInfeasible;
  SolveStats stats;
  long long inactive_weights = 0;
};

// Exact branch and bound over the free decision bits. Throws TooLarge when
// there are more than `max_variables` of them.
SolveResult SolveExact(const Problem& p, int max_variables = 64);

struct OracleResult {
  SolveResult best;
  std::vector<PruningSolution> optima;  // every assignment tying the best
  long long feasible_count = 0;
};

// Exhaustive enumeration checked through CheckFeasible, ObjectiveValue and
// Usage only. Throws TooLarge above `max_variables` free bits.
OracleResult BruteForceOracle(const Problem& p, int max_variables = 24);

// Exact maximiser over `block` (flat indices, a subset of the free bits) with
// every other bit taken from `x`; the usage must stay within `budget`.
// Shape columns follow `derive_mode`. Enumerates up to 20 bits, otherwise
// branch and bound. Throws InfeasibleBlock when no assignment of the block
// fits.
std::vector<std::uint8_t> SolveBlock(const Problem& p,
                                     std::span<const std::uint8_t> x,
                                     std::span<const int> block, double budget,
                                     PruneMode derive_mode = PruneMode::kChannel);

struct BcdConfig {
  int block_size = 2;
  double gamma_step = 0.1;
  int max_iter = 10;
};

struct BlockUpdate {
  int level = 0;
  double level_budget = 0.0;
  int iteration = 0;
  int block = 0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  bool feasible_before = false;
  bool feasible_after = false;
  bool repaired = false;
};

struct BcdTrace {
  std::vector<double> level_budgets;
  std::vector<BlockUpdate> updates;
};

SolveResult SolveBcd(const Problem& p, const BcdConfig& cfg = {},
                     BcdTrace* trace = nullptr);

// Best shape columns for fixed channels under the full budget: a group
// knapsack with at least one column per active output channel and slot.
// Integer costs go through dynamic programming, others through branch and
// bound. Throws InfeasibleBudget when one column per channel does not fit.
PruningSolution SolveShapeColumns(const Problem& p,
                                  const PruningSolution& channels);

// Keeps the keep_counts[l-1] output channels of layer l with the largest
// column sums of F^(l), all input channels, and pinned shape columns. The
// objective excludes inactive weights.
SolveResult GreedyBaseline(const Problem& p, std::span<const int> keep_counts);

// Fills objective, usage, status (kFeasible or kInfeasible) and the inactive
// weight count for `sol`.
SolveResult Evaluate(const Problem& p, PruningSolution sol);

}  // namespace prunesolve

#endif  // PRUNESOLVE_SOLVER_HPP_
