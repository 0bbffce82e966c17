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

#include "prunesolve/constraints.hpp"

#include <ostream>
#include <string>

#include "prunesolve/error.hpp"

namespace prunesolve {

VariableLayout::VariableLayout(const NetworkSpec& net)
    : prune_input_(net.prune_input_channels()) {
  const int L = net.num_layers();
  channels_.resize(L + 1);
  columns_.assign(L + 1, 0);
  kernel_area_.assign(L + 1, 0);
  is_target_.resize(L + 1);
  u_off_.resize(L + 1);
  v_off_.resize(L + 1);
  q_off_.resize(L + 1);
  for (int t = 0; t <= L; ++t) {
    channels_[t] = net.channels(t);
    is_target_[t] = net.is_skip_target(t);
    if (t > 0) {
      columns_[t] = net.columns(t);
      kernel_area_[t] = net.kernel(t) * net.kernel(t);
    }
  }
  for (int t = 0; t <= L; ++t) {
    u_off_[t] = size_;
    size_ += channels_[t];
  }
  for (int t = 0; t <= L; ++t) {
    if (!is_target_[t]) continue;
    v_off_[t] = size_;
    size_ += channels_[t];
  }
  for (int t = 1; t <= L; ++t) {
    for (std::size_t slot = 0; slot < net.edges_into(t).size(); ++slot) {
      q_off_[t].push_back(size_);
      size_ += columns_[t];
    }
  }
  for (int t = 0; t <= L; ++t) {
    if (is_target_[t]) continue;
    v_off_[t] = size_;
    size_ += channels_[t];
  }
}

VariableLayout::Ref VariableLayout::describe(int var) const {
  const int L = num_features() - 1;
  for (int t = 0; t <= L; ++t) {
    if (var >= u_off_[t] && var < u_off_[t] + channels_[t]) {
      return Ref{Kind::kU, t, 0, var - u_off_[t]};
    }
    if (var >= v_off_[t] && var < v_off_[t] + channels_[t]) {
      return Ref{Kind::kV, t, 0, var - v_off_[t]};
    }
    for (int s = 0; s < num_slots(t); ++s) {
      if (var >= q_off_[t][s] && var < q_off_[t][s] + columns_[t]) {
        return Ref{Kind::kQ, t, s, var - q_off_[t][s]};
      }
    }
  }
  throw Error(ErrorCode::kValidation,
              "variable index " + std::to_string(var) + " out of range");
}

std::string VariableLayout::name(int var) const {
  const Ref r = describe(var);
  const std::string t = std::to_string(r.t);
  switch (r.kind) {
    case Kind::kU: return "u" + t + "[" + std::to_string(r.index) + "]";
    case Kind::kV: return "v" + t + "[" + std::to_string(r.index) + "]";
    case Kind::kQ: {
      const int kk = kernel_area_[r.t];
      std::string out = "q" + t;
      if (num_slots(r.t) > 1) out += "/" + std::to_string(r.slot);
      return out + "[" + std::to_string(r.index / kk) + "," +
             std::to_string(r.index % kk) + "]";
    }
  }
  return "?";
}

std::vector<std::uint8_t> VariableLayout::Flatten(
    const PruningSolution& sol) const {
  const int L = num_features() - 1;
  auto fail = [] {
    throw Error(ErrorCode::kShapeMismatch,
                "solution does not match the network dimensions");
  };
  if (static_cast<int>(sol.u.size()) != L + 1 ||
      static_cast<int>(sol.v.size()) != L + 1 ||
      static_cast<int>(sol.q.size()) != L + 1) {
    fail();
  }
  std::vector<std::uint8_t> x(size_, 0);
  for (int t = 0; t <= L; ++t) {
    if (static_cast<int>(sol.u[t].size()) != channels_[t] ||
        static_cast<int>(sol.v[t].size()) != channels_[t]) {
      fail();
    }
    for (int j = 0; j < channels_[t]; ++j) {
      x[u(t, j)] = sol.u[t][j];
      x[v(t, j)] = sol.v[t][j];
    }
    if (t == 0) continue;
    if (static_cast<int>(sol.q[t].size()) != num_slots(t)) fail();
    for (int s = 0; s < num_slots(t); ++s) {
      if (static_cast<int>(sol.q[t][s].size()) != columns_[t]) fail();
      for (int c = 0; c < columns_[t]; ++c) x[q(t, s, c)] = sol.q[t][s][c];
    }
  }
  return x;
}

PruningSolution VariableLayout::Unflatten(std::span<const std::uint8_t> x,
                                          PruneMode mode) const {
  const int L = num_features() - 1;
  PruningSolution sol;
  sol.mode = mode;
  sol.u.resize(L + 1);
  sol.v.resize(L + 1);
  sol.q.resize(L + 1);
  for (int t = 0; t <= L; ++t) {
    sol.u[t].assign(x.begin() + u(t, 0), x.begin() + u(t, 0) + channels_[t]);
    sol.v[t].assign(x.begin() + v(t, 0), x.begin() + v(t, 0) + channels_[t]);
    for (int s = 0; s < num_slots(t); ++s) {
      sol.q[t].emplace_back(x.begin() + q(t, s, 0),
                            x.begin() + q(t, s, 0) + columns_[t]);
    }
  }
  return sol;
}

std::vector<int> VariableLayout::FreeVariables(PruneMode mode) const {
  const int L = num_features() - 1;
  std::vector<int> vars;
  for (int t = (prune_input_ ? 0 : 1); t <= L; ++t) {
    for (int j = 0; j < channels_[t]; ++j) vars.push_back(u(t, j));
  }
  for (int t = 0; t <= L; ++t) {
    if (!is_target_[t]) continue;
    for (int j = 0; j < channels_[t]; ++j) vars.push_back(v(t, j));
  }
  if (mode == PruneMode::kChannelSpatial) {
    for (int t = 1; t <= L; ++t) {
      for (int s = 0; s < num_slots(t); ++s) {
        for (int c = 0; c < columns_[t]; ++c) vars.push_back(q(t, s, c));
      }
    }
  }
  return vars;
}

void VariableLayout::Complete(std::vector<std::uint8_t>& x,
                              PruneMode mode) const {
  const int L = num_features() - 1;
  if (!prune_input_) {
    for (int j = 0; j < channels_[0]; ++j) x[u(0, j)] = 1;
  }
  for (int t = 0; t <= L; ++t) {
    if (!is_target_[t]) {
      for (int j = 0; j < channels_[t]; ++j) x[v(t, j)] = x[u(t, j)];
    }
    if (mode == PruneMode::kChannel && t > 0) {
      const int kk = kernel_area_[t];
      for (int s = 0; s < num_slots(t); ++s) {
        for (int c = 0; c < columns_[t]; ++c) {
          x[q(t, s, c)] = x[u(t, c / kk)];
        }
      }
    }
  }
}

std::string_view ToString(ConstraintTag tag) {
  switch (tag) {
    case ConstraintTag::kInputFixed: return "input-fixed";
    case ConstraintTag::kMinOne: return "min-one";
    case ConstraintTag::kShapeLinkage: return "shape-linkage";
    case ConstraintTag::kChannelPin: return "channel-pin";
    case ConstraintTag::kCaseI: return "case-i";
    case ConstraintTag::kCaseII: return "case-ii";
    case ConstraintTag::kCaseIIIa: return "case-iii-a";
    case ConstraintTag::kCaseIIIb: return "case-iii-b";
    case ConstraintTag::kGbn: return "gbn";
  }
  return "?";
}

std::string_view ToString(SkipCase c) {
  switch (c) {
    case SkipCase::kI: return "i";
    case SkipCase::kII: return "ii";
    case SkipCase::kIIIa: return "iii-a";
    case SkipCase::kIIIb: return "iii-b";
  }
  return "?";
}

int LinearConstraint::Evaluate(std::span<const std::uint8_t> x) const {
  int lhs = 0;
  for (const LinearTerm& term : terms) lhs += term.coef * x[term.var];
  return lhs;
}

bool LinearConstraint::Satisfied(std::span<const std::uint8_t> x) const {
  const int lhs = Evaluate(x);
  switch (sense) {
    case Sense::kLe: return lhs <= rhs;
    case Sense::kGe: return lhs >= rhs;
    case Sense::kEq: return lhs == rhs;
  }
  return false;
}

namespace {

class Builder {
 public:
  explicit Builder(ConstraintSet& cs) : cs_(cs) {}

  void Add(ConstraintTag tag, int t, Sense sense, int rhs,
           std::vector<LinearTerm> terms) {
    cs_.constraints.push_back(
        LinearConstraint{std::move(terms), sense, rhs, tag, t});
  }
  // x_a == x_b
  void Equal(ConstraintTag tag, int t, int a, int b) {
    Add(tag, t, Sense::kEq, 0, {{a, 1}, {b, -1}});
  }
  // x_a <= x_b
  void LessEq(ConstraintTag tag, int t, int a, int b) {
    Add(tag, t, Sense::kLe, 0, {{a, 1}, {b, -1}});
  }

 private:
  ConstraintSet& cs_;
};

SkipCase CaseFor(const SkipAddition* skip) {
  if (skip == nullptr) return SkipCase::kI;
  switch (skip->kind) {
    case SkipKind::kIdentity: return SkipCase::kII;
    case SkipKind::kZeroPad: return SkipCase::kIIIa;
    case SkipKind::kConv1x1: return SkipCase::kIIIb;
  }
  return SkipCase::kI;
}

}  // namespace

ConstraintSet BuildConstraints(const NetworkSpec& net, PruneMode mode,
                               Scheme scheme) {
  const int L = net.num_layers();
  ConstraintSet cs;
  cs.layout = VariableLayout(net);
  cs.mode = mode;
  cs.scheme = scheme;
  cs.case_of.resize(L + 1);
  const VariableLayout& x = cs.layout;
  Builder b(cs);

  if (!net.prune_input_channels()) {
    for (int j = 0; j < net.channels(0); ++j) {
      b.Add(ConstraintTag::kInputFixed, 0, Sense::kEq, 1, {{x.u(0, j), 1}});
    }
  }

  for (int t = 0; t <= L; ++t) {
    const int c = net.channels(t);
    std::vector<LinearTerm> sum_u;
    for (int j = 0; j < c; ++j) sum_u.push_back({x.u(t, j), 1});
    b.Add(ConstraintTag::kMinOne, t, Sense::kGe, 1, std::move(sum_u));
    if (net.is_skip_target(t)) {
      std::vector<LinearTerm> sum_v;
      for (int j = 0; j < c; ++j) sum_v.push_back({x.v(t, j), 1});
      b.Add(ConstraintTag::kMinOne, t, Sense::kGe, 1, std::move(sum_v));
    }
  }

  for (int t = 1; t <= L; ++t) {
    const int kk = x.kernel_area(t);
    for (int s = 0; s < x.num_slots(t); ++s) {
      for (int j = 0; j < net.channels(t); ++j) {
        std::vector<LinearTerm> link{{x.u(t, j), 1}};
        for (int c = 0; c < kk; ++c) link.push_back({x.q(t, s, j * kk + c), -1});
        b.Add(ConstraintTag::kShapeLinkage, t, Sense::kLe, 0, std::move(link));
        for (int c = 0; c < kk; ++c) {
          b.LessEq(ConstraintTag::kShapeLinkage, t, x.q(t, s, j * kk + c),
                   x.u(t, j));
        }
      }
      if (mode == PruneMode::kChannel) {
        for (int j = 0; j < net.channels(t); ++j) {
          for (int c = 0; c < kk; ++c) {
            b.Equal(ConstraintTag::kChannelPin, t, x.q(t, s, j * kk + c),
                    x.u(t, j));
          }
        }
      }
    }
  }

  for (int t = 0; t <= L; ++t) {
    const SkipAddition* skip = net.skip_into(t);
    cs.case_of[t] = CaseFor(skip);
    const int c = net.channels(t);
    if (skip == nullptr) {
      for (int j = 0; j < c; ++j) {
        b.Equal(ConstraintTag::kCaseI, t, x.v(t, j), x.u(t, j));
      }
      continue;
    }
    const int cs_ch = net.channels(skip->s);
    const int s = skip->s;
    if (scheme == Scheme::kGbn) {
      for (int j = 0; j < c; ++j) {
        if (skip->kind != SkipKind::kConv1x1 && j < cs_ch) {
          b.Equal(ConstraintTag::kGbn, t, x.v(s, j), x.u(t, j));
        }
        b.Equal(ConstraintTag::kGbn, t, x.u(t, j), x.v(t, j));
      }
      continue;
    }
    switch (skip->kind) {
      case SkipKind::kIdentity:
      case SkipKind::kZeroPad: {
        const ConstraintTag tag = skip->kind == SkipKind::kIdentity
                                      ? ConstraintTag::kCaseII
                                      : ConstraintTag::kCaseIIIa;
        for (int j = 0; j < c; ++j) {
          if (j < cs_ch) {
            b.LessEq(tag, t, x.u(t, j), x.v(t, j));
            b.Add(tag, t, Sense::kLe, 0,
                  {{x.v(t, j), 1}, {x.u(t, j), -1}, {x.v(s, j), -1}});
          } else {
            b.Equal(tag, t, x.v(t, j), x.u(t, j));
          }
        }
        break;
      }
      case SkipKind::kConv1x1:
        for (int j = 0; j < c; ++j) {
          b.LessEq(ConstraintTag::kCaseIIIb, t, x.u(t, j), x.v(t, j));
        }
        break;
    }
  }
  return cs;
}

std::string Describe(const ConstraintSet& cs, const LinearConstraint& c) {
  std::string lhs;
  for (const LinearTerm& term : c.terms) {
    if (!lhs.empty()) lhs += term.coef < 0 ? " - " : " + ";
    else if (term.coef < 0) lhs += "-";
    const int mag = term.coef < 0 ? -term.coef : term.coef;
    if (mag != 1) lhs += std::to_string(mag) + "*";
    lhs += cs.layout.name(term.var);
  }
  const char* op = c.sense == Sense::kLe ? " <= "
                   : c.sense == Sense::kGe ? " >= "
                                           : " == ";
  return lhs + op + std::to_string(c.rhs);
}

FeasibilityReport CheckFeasible(const ConstraintSet& cs,
                                std::span<const std::uint8_t> x) {
  if (static_cast<int>(x.size()) != cs.layout.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "flat solution has " + std::to_string(x.size()) +
                    " bits, expected " + std::to_string(cs.layout.size()));
  }
  FeasibilityReport report;
  for (const LinearConstraint& c : cs.constraints) {
    if (!c.Satisfied(x)) {
      report.violations.push_back(
          Violation{c.tag, c.t,
                    Describe(cs, c) + " (lhs = " +
                        std::to_string(c.Evaluate(x)) + ")"});
    }
  }
  return report;
}

bool Satisfies(const ConstraintSet& cs, std::span<const std::uint8_t> x) {
  for (const LinearConstraint& c : cs.constraints) {
    if (!c.Satisfied(x)) return false;
  }
  return true;
}

FeasibilityReport CheckFeasible(const ConstraintSet& cs,
                                const PruningSolution& sol) {
  return CheckFeasible(cs, cs.layout.Flatten(sol));
}

ConcatProblem BuildConcatProblem(const NetworkSpec& net, PruneMode mode,
                                 Scheme scheme) {
  ConcatProblem problem;
  problem.constraints = BuildConstraints(net, mode, scheme);
  for (const Edge& e : net.edges()) {
    problem.pairs.push_back(
        ConcatPair{e.source, e.target, e.slot, e.row_offset, e.rows});
  }
  return problem;
}

Matrix PairFilter(const FilterImportance& target, const ConcatPair& pair) {
  const Matrix& f = target.values;
  Matrix out{pair.rows, f.cols,
             std::vector<double>(static_cast<std::size_t>(pair.rows) * f.cols)};
  for (int i = 0; i < pair.rows; ++i) {
    for (int j = 0; j < f.cols; ++j) out(i, j) = f(pair.row_offset + i, j);
  }
  return out;
}

double PairObjective(const ImportanceTensor& target, const ConcatPair& pair,
                     const PruningSolution& sol) {
  const Shape4& s = target.values.shape();
  const auto& cols = sol.q[pair.q][pair.slot];
  double total = 0.0;
  for (int i = 0; i < pair.rows; ++i) {
    if (!sol.v[pair.p][i]) continue;
    for (int j = 0; j < s.d1; ++j) {
      for (int a = 0; a < s.d2; ++a) {
        for (int b = 0; b < s.d3; ++b) {
          if (cols[(static_cast<std::size_t>(j) * s.d2 + a) * s.d3 + b]) {
            total += target.values.at(pair.row_offset + i, j, a, b);
          }
        }
      }
    }
  }
  return total;
}

double StandardForm::Objective(std::span<const std::uint8_t> r) const {
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!r[i]) continue;
    for (int j = 0; j < n; ++j) {
      if (r[j]) total += P0(i, j);
    }
  }
  return 0.5 * total;
}

double StandardForm::Resource(std::span<const std::uint8_t> r) const {
  double quad = 0.0;
  double lin = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!r[i]) continue;
    lin += q1[i];
    for (int j = 0; j < n; ++j) {
      if (r[j]) quad += P1(i, j);
    }
  }
  return 0.5 * quad + lin;
}

StandardForm BuildStandardForm(const NetworkSpec& net,
                               std::span<const FilterImportance> filters,
                               const ResourceSpec& spec) {
  if (!net.is_sequential()) {
    throw Error(ErrorCode::kUnsupportedTopology,
                "the standard form covers sequential networks only");
  }
  const int L = net.num_layers();
  if (static_cast<int>(filters.size()) != L) {
    throw Error(ErrorCode::kShapeMismatch,
                "expected one filter-importance matrix per layer");
  }
  StandardForm form;
  form.offsets.resize(L + 1);
  for (int t = 0; t <= L; ++t) {
    form.offsets[t] = form.n;
    form.n += net.channels(t);
  }
  const std::size_t nn = static_cast<std::size_t>(form.n) * form.n;
  form.p0.assign(nn, 0.0);
  form.p1.assign(nn, 0.0);
  form.q1.assign(form.n, 0.0);
  form.budget = spec.effective_budget();
  auto at = [&form](std::vector<double>& m, int i, int j) -> double& {
    return m[static_cast<std::size_t>(i) * form.n + j];
  };
  for (int t = 0; t <= L; ++t) {
    for (int j = 0; j < net.channels(t); ++j) {
      form.q1[form.offsets[t] + j] = spec.a_u[t];
    }
  }
  for (int t = 1; t <= L; ++t) {
    const Matrix& f = filters[t - 1].values;
    if (f.rows != net.channels(t - 1) || f.cols != net.channels(t)) {
      throw Error(ErrorCode::kShapeMismatch,
                  "filter importance of layer " + std::to_string(t) +
                      " has the wrong shape");
    }
    const double k2 = static_cast<double>(net.kernel(t)) * net.kernel(t);
    const double q = spec.b[t] * k2;
    const int r0 = form.offsets[t - 1];
    const int c0 = form.offsets[t];
    for (int i = 0; i < f.rows; ++i) {
      for (int j = 0; j < f.cols; ++j) {
        at(form.p0, r0 + i, c0 + j) = f(i, j);
        at(form.p0, c0 + j, r0 + i) = f(i, j);
        at(form.p1, r0 + i, c0 + j) = q;
        at(form.p1, c0 + j, r0 + i) = q;
      }
    }
  }
  return form;
}

void DumpStandardForm(const StandardForm& form, std::ostream& out) {
  auto dump = [&](const char* name, const std::vector<double>& m) {
    out << "# " << name << " " << form.n << "x" << form.n << "\n";
    for (int i = 0; i < form.n; ++i) {
      for (int j = 0; j < form.n; ++j) {
        if (j) out << ' ';
        out << m[static_cast<std::size_t>(i) * form.n + j];
      }
      out << "\n";
    }
  };
  dump("P0", form.p0);
  dump("P1", form.p1);
  out << "# q1 " << form.n << "\n";
  for (int i = 0; i < form.n; ++i) out << (i ? " " : "") << form.q1[i];
  out << "\n# M\n" << form.budget << "\n";
}

std::string_view ToString(AssignmentScheme scheme) {
  switch (scheme) {
    case AssignmentScheme::kFree: return "free";
    case AssignmentScheme::kGbn: return "gbn";
    case AssignmentScheme::kOurs: return "ours";
  }
  return "?";
}

AssignmentScheme ParseAssignmentScheme(std::string_view text) {
  if (text == "free") return AssignmentScheme::kFree;
  if (text == "gbn") return AssignmentScheme::kGbn;
  if (text == "ours") return AssignmentScheme::kOurs;
  throw Error(ErrorCode::kParse, "unknown scheme '" + std::string(text) + "'");
}

unsigned long long CountJointAssignments(int n, AssignmentScheme scheme) {
  if (n < 1) throw Error(ErrorCode::kValidation, "n must be >= 1");
  const unsigned long long base = scheme == AssignmentScheme::kFree  ? 8
                                  : scheme == AssignmentScheme::kGbn ? 2
                                                                     : 5;
  unsigned long long count = 1;
  for (int i = 0; i < n; ++i) count *= base;
  return count;
}

unsigned long long BruteForceJointAssignments(int n, AssignmentScheme scheme) {
  if (n < 1) throw Error(ErrorCode::kValidation, "n must be >= 1");
  if (n > 8) {
    throw Error(ErrorCode::kTooLarge,
                "brute-force enumeration is limited to n <= 8");
  }
  const unsigned long long side = 1ULL << n;
  unsigned long long count = 0;
  for (unsigned long long u = 0; u < side; ++u) {
    for (unsigned long long v = 0; v < side; ++v) {
      for (unsigned long long vs = 0; vs < side; ++vs) {
        bool ok = true;
        switch (scheme) {
          case AssignmentScheme::kFree:
            break;
          case AssignmentScheme::kGbn:
            ok = u == v && v == vs;
            break;
          case AssignmentScheme::kOurs:
            // u <= v <= u + vs, coordinatewise
            ok = (u & ~v) == 0 && (v & ~(u | vs)) == 0;
            break;
        }
        if (ok) ++count;
      }
    }
  }
  return count;
}

}  // namespace prunesolve
