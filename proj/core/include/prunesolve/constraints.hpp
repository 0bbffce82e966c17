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

#ifndef PRUNESOLVE_CONSTRAINTS_HPP_
#define PRUNESOLVE_CONSTRAINTS_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prunesolve/model.hpp"
#include "prunesolve/resources.hpp"

namespace prunesolve {

// Flat binary variable vector, in this order:
//   u^(0..L) by feature map; v^(t) for t in T; q^(t, slot) by layer and
//   slot, row-major (j, a, b); then v^(t) for t not in T.
// The trailing block only mirrors u (case i) but is kept as real variables so
// that arbitrary solution files can be checked.
class VariableLayout {
 public:
  enum class Kind { kU, kV, kQ };
  struct Ref {
    Kind kind = Kind::kU;
    int t = 0;
    int slot = 0;
    int index = 0;
  };

  VariableLayout() = default;
  explicit VariableLayout(const NetworkSpec& net);

  int size() const { return size_; }
  int num_features() const { return static_cast<int>(channels_.size()); }
  int channels(int t) const { return channels_[t]; }
  int columns(int t) const { return columns_[t]; }
  int kernel_area(int t) const { return kernel_area_[t]; }
  int num_slots(int t) const { return static_cast<int>(q_off_[t].size()); }

  int u(int t, int j) const { return u_off_[t] + j; }
  int v(int t, int j) const { return v_off_[t] + j; }
  int q(int t, int slot, int col) const { return q_off_[t][slot] + col; }
  Ref describe(int var) const;
  std::string name(int var) const;

  std::vector<std::uint8_t> Flatten(const PruningSolution& sol) const;
  PruningSolution Unflatten(std::span<const std::uint8_t> x,
                            PruneMode mode) const;

  // Decision bits the solvers branch on: prunable u, v^(t) for t in T, and q
  // in channel+spatial mode. Ascending flat order.
  std::vector<int> FreeVariables(PruneMode mode) const;
  // Fills every non-free bit from the free ones: fixed input channels, v
  // mirrors and (channel mode) pinned shape columns.
  void Complete(std::vector<std::uint8_t>& x, PruneMode mode) const;

 private:
  int size_ = 0;
  bool prune_input_ = false;
  std::vector<int> channels_;
  std::vector<int> columns_;
  std::vector<int> kernel_area_;
  std::vector<bool> is_target_;
  std::vector<int> u_off_;
  std::vector<int> v_off_;
  std::vector<std::vector<int>> q_off_;
};

enum class ConstraintTag {
  kInputFixed,
  kMinOne,
  kShapeLinkage,
  kChannelPin,
  kCaseI,
  kCaseII,
  kCaseIIIa,
  kCaseIIIb,
  kGbn,
};

std::string_view ToString(ConstraintTag tag);

enum class Sense { kLe, kGe, kEq };

struct LinearTerm {
  int var = 0;
  int coef = 0;
};

// sum coef * x  (sense)  rhs
struct LinearConstraint {
  std::vector<LinearTerm> terms;
  Sense sense = Sense::kLe;
  int rhs = 0;
  ConstraintTag tag = ConstraintTag::kMinOne;
  int t = 0;  // feature map / layer the constraint belongs to

  int Evaluate(std::span<const std::uint8_t> x) const;
  bool Satisfied(std::span<const std::uint8_t> x) const;
};

// Which skip-addition case governs feature map t.
enum class SkipCase { kI, kII, kIIIa, kIIIb };

std::string_view ToString(SkipCase c);

struct ConstraintSet {
  VariableLayout layout;
  PruneMode mode = PruneMode::kChannel;
  Scheme scheme = Scheme::kOurs;
  std::vector<LinearConstraint> constraints;
  std::vector<SkipCase> case_of;  // t = 0..L
};

ConstraintSet BuildConstraints(const NetworkSpec& net, PruneMode mode,
                               Scheme scheme = Scheme::kOurs);

std::string Describe(const ConstraintSet& cs, const LinearConstraint& c);

struct Violation {
  ConstraintTag tag = ConstraintTag::kMinOne;
  int t = 0;
  std::string detail;
};

struct FeasibilityReport {
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
};

// Throws ShapeMismatch when `sol` does not fit the layout.
FeasibilityReport CheckFeasible(const ConstraintSet& cs,
                                const PruningSolution& sol);
FeasibilityReport CheckFeasible(const ConstraintSet& cs,
                                std::span<const std::uint8_t> x);
// Same verdict without building the report.
bool Satisfies(const ConstraintSet& cs, std::span<const std::uint8_t> x);

// Pairwise view of concatenation: one entry per (source p, target q) pair,
// with pair (q-1, q) being the sequential edge.
struct ConcatPair {
  int p = 0;
  int q = 0;
  int slot = 0;
  int row_offset = 0;
  int rows = 0;
};

struct ConcatProblem {
  ConstraintSet constraints;
  std::vector<ConcatPair> pairs;
};

ConcatProblem BuildConcatProblem(const NetworkSpec& net, PruneMode mode,
                                 Scheme scheme = Scheme::kOurs);

// F^(p,q): the rows of F^(q) that belong to source p.
Matrix PairFilter(const FilterImportance& target, const ConcatPair& pair);

// sum_{i,j,a,b} I^(p,q) v^(p)_i q^(p,q)_{j,a,b}.
double PairObjective(const ImportanceTensor& target, const ConcatPair& pair,
                     const PruningSolution& sol);

// Sequential, channel-only standard form over r = (r^(0), ..., r^(L)).
struct StandardForm {
  int n = 0;
  std::vector<int> offsets;  // start of r^(t) in r
  std::vector<double> p0;    // n x n, row-major
  std::vector<double> p1;
  std::vector<double> q1;
  double budget = 0.0;

  double P0(int i, int j) const {
    return p0[static_cast<std::size_t>(i) * n + j];
  }
  double P1(int i, int j) const {
    return p1[static_cast<std::size_t>(i) * n + j];
  }
  // 1/2 r^T P0 r and 1/2 r^T P1 r + q1^T r.
  double Objective(std::span<const std::uint8_t> r) const;
  double Resource(std::span<const std::uint8_t> r) const;
};

// Throws UnsupportedTopology for networks with skips or concatenations.
StandardForm BuildStandardForm(const NetworkSpec& net,
                               std::span<const FilterImportance> filters,
                               const ResourceSpec& spec);

// Dense text dump: a "# P0", "# P1", "# q1" and "# M" section, one matrix
// row per line.
void DumpStandardForm(const StandardForm& form, std::ostream& out);

enum class AssignmentScheme { kFree, kGbn, kOurs };

std::string_view ToString(AssignmentScheme scheme);
AssignmentScheme ParseAssignmentScheme(std::string_view text);

// Joint (u^(t), v^(t), v^(s)) assignments over n channels of one skip edge.
unsigned long long CountJointAssignments(int n, AssignmentScheme scheme);
// Enumerates all 2^(3n) triples; throws TooLarge for n > 8.
unsigned long long BruteForceJointAssignments(int n, AssignmentScheme scheme);

}  // namespace prunesolve

#endif  // PRUNESOLVE_CONSTRAINTS_HPP_
