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

#ifndef PRUNESOLVE_PROGRAM_HPP_
#define PRUNESOLVE_PROGRAM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "prunesolve/constraints.hpp"

namespace prunesolve {

// maximize   obj_const + sum obj_lin[k] x_k + sum_pairs obj x_a x_b
// subject to cost_const + sum cost_lin[k] x_k + sum_pairs cost x_a x_b
//              <= budget
//            linear constraints over x
// with every coefficient of the objective and the cost nonnegative.
struct BinaryProgram {
  struct Pair {
    int a = 0;  // a < b
    int b = 0;
    double obj = 0.0;
    double cost = 0.0;
  };

  int n = 0;
  double obj_const = 0.0;
  double cost_const = 0.0;
  std::vector<double> obj_lin;
  std::vector<double> cost_lin;
  std::vector<Pair> pairs;
  std::vector<LinearConstraint> constraints;
  // Flat bits each variable stands for, used by the tie-break.
  std::vector<int> multiplicity;
  long long bits_const = 0;
  double budget = 0.0;
  // Set when substitution left a constraint with no variables that fails.
  bool trivially_infeasible = false;

  double Objective(std::span<const std::uint8_t> x) const;
  double Cost(std::span<const std::uint8_t> x) const;
  long long Bits(std::span<const std::uint8_t> x) const;
  bool Feasible(std::span<const std::uint8_t> x) const;
};

struct ProgramResult {
  bool found = false;
  std::vector<std::uint8_t> x;
  double objective = 0.0;
  double cost = 0.0;
  long long bits = 0;
  long long nodes = 0;
};

// Candidate order shared by every solver: larger objective (relative 1e-9),
// then smaller cost, then fewer flat bits, then the vector holding a 1 at the
// first differing position.
bool Better(const ProgramResult& a, const ProgramResult& b);

// Depth-first branch and bound, variables in index order, 1-branch first.
ProgramResult SolveBranchAndBound(const BinaryProgram& program);

// Gray-code enumeration of all 2^n assignments; n <= 30.
ProgramResult SolveByEnumeration(const BinaryProgram& program);

// Smallest-cost assignment satisfying the linear constraints, ignoring the
// budget and the objective.
ProgramResult MinimizeCost(const BinaryProgram& program);

// Substitution of a pruning problem into a BinaryProgram. `free_flat` lists the
// flat variables that stay free (ascending); every other flat bit takes its
// value from `x`, or is derived from a free bit through `derive_mode`
// (fixed input channels, v mirrors, and channel-mode pinned shape columns).
struct CompiledProgram {
  BinaryProgram program;
  std::vector<int> flat_of;  // program variable -> flat index
};

struct CompileInput {
  const NetworkSpec* net = nullptr;
  const ImportanceSet* importance = nullptr;
  const ResourceSpec* resource = nullptr;
  const ConstraintSet* constraints = nullptr;
  PruneMode derive_mode = PruneMode::kChannel;
  double budget = 0.0;  // bound on the variable part of the usage
};

CompiledProgram Compile(const CompileInput& in,
                        std::span<const std::uint8_t> x,
                        std::span<const int> free_flat);

// Writes a program assignment back into the flat vector and re-derives the
// dependent bits.
void Expand(const CompiledProgram& compiled, const VariableLayout& layout,
            PruneMode derive_mode, std::span<const std::uint8_t> px,
            std::vector<std::uint8_t>& x);

}  // namespace prunesolve

#endif  // PRUNESOLVE_PROGRAM_HPP_
