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

#include "prunesolve/program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>

#include "log.hpp"
#include "prunesolve/error.hpp"

namespace prunesolve {
namespace {

constexpr double kBudgetSlack = 1e-9;
constexpr long long kLogEvery = 10000;

double ObjTol(double reference) {
  return 1e-9 * std::max(1.0, std::abs(reference));
}

bool SenseHolds(Sense sense, int lhs, int rhs) {
  switch (sense) {
    case Sense::kLe: return lhs <= rhs;
    case Sense::kGe: return lhs >= rhs;
    case Sense::kEq: return lhs == rhs;
  }
  return false;
}

struct Adjacent {
  int m = 0;
  double obj = 0.0;
  double cost = 0.0;
};

std::vector<std::vector<Adjacent>> BuildAdjacency(const BinaryProgram& p) {
  std::vector<std::vector<Adjacent>> adj(p.n);
  for (const auto& pair : p.pairs) {
    adj[pair.a].push_back({pair.b, pair.obj, pair.cost});
    adj[pair.b].push_back({pair.a, pair.obj, pair.cost});
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end(),
              [](const Adjacent& l, const Adjacent& r) { return l.m < r.m; });
  }
  return adj;
}

// Shared incremental state for the depth-first searches: variables are fixed
// in index order and every constraint tracks the range its free part can
// still reach.
class SearchState {
 public:
  explicit SearchState(const BinaryProgram& p)
      : p_(p), adj_(BuildAdjacency(p)), x_(p.n, 0) {
    cons_of_.resize(p.n);
    const std::size_t nc = p.constraints.size();
    fixed_sum_.assign(nc, 0);
    free_min_.assign(nc, 0);
    free_max_.assign(nc, 0);
    for (std::size_t ci = 0; ci < nc; ++ci) {
      for (const LinearTerm& term : p.constraints[ci].terms) {
        cons_of_[term.var].push_back({static_cast<int>(ci), term.coef});
        free_min_[ci] += std::min(term.coef, 0);
        free_max_[ci] += std::max(term.coef, 0);
      }
    }
    obj_ = p.obj_const;
    cost_ = p.cost_const;
    bits_ = p.bits_const;
  }

  bool InitiallyPossible() const {
    if (p_.trivially_infeasible) return false;
    if (cost_ > p_.budget + kBudgetSlack) return false;
    for (std::size_t ci = 0; ci < p_.constraints.size(); ++ci) {
      if (!Possible(ci)) return false;
    }
    return true;
  }

  // Fixes variable d (all lower variables already fixed). Returns false when
  // a constraint can no longer be met; the caller must still call Unfix.
  bool Fix(int d, std::uint8_t val, bool enforce_budget) {
    x_[d] = val;
    bool ok = true;
    for (const auto& [ci, coef] : cons_of_[d]) {
      fixed_sum_[ci] += coef * val;
      free_min_[ci] -= std::min(coef, 0);
      free_max_[ci] -= std::max(coef, 0);
      if (!Possible(ci)) ok = false;
    }
    if (val) {
      double dobj = p_.obj_lin[d];
      double dcost = p_.cost_lin[d];
      for (const Adjacent& a : adj_[d]) {
        if (a.m >= d) break;
        if (x_[a.m]) {
          dobj += a.obj;
          dcost += a.cost;
        }
      }
      obj_ += dobj;
      cost_ += dcost;
      bits_ += p_.multiplicity[d];
      delta_obj_.push_back(dobj);
      delta_cost_.push_back(dcost);
      if (enforce_budget && cost_ > p_.budget + kBudgetSlack) ok = false;
    }
    return ok;
  }

  void Unfix(int d) {
    const std::uint8_t val = x_[d];
    for (const auto& [ci, coef] : cons_of_[d]) {
      fixed_sum_[ci] -= coef * val;
      free_min_[ci] += std::min(coef, 0);
      free_max_[ci] += std::max(coef, 0);
    }
    if (val) {
      obj_ -= delta_obj_.back();
      cost_ -= delta_cost_.back();
      delta_obj_.pop_back();
      delta_cost_.pop_back();
      bits_ -= p_.multiplicity[d];
    }
    x_[d] = 0;
  }

  ProgramResult Snapshot() const {
    ProgramResult r;
    r.found = true;
    r.x = x_;
    r.objective = obj_;
    r.cost = cost_;
    r.bits = bits_;
    return r;
  }

  const BinaryProgram& program() const { return p_; }
  const std::vector<std::vector<Adjacent>>& adj() const { return adj_; }
  const std::vector<std::uint8_t>& x() const { return x_; }
  double obj() const { return obj_; }
  double cost() const { return cost_; }
  long long bits() const { return bits_; }

 private:
  bool Possible(std::size_t ci) const {
    const LinearConstraint& c = p_.constraints[ci];
    const int lo = fixed_sum_[ci] + free_min_[ci];
    const int hi = fixed_sum_[ci] + free_max_[ci];
    switch (c.sense) {
      case Sense::kLe: return lo <= c.rhs;
      case Sense::kGe: return hi >= c.rhs;
      case Sense::kEq: return lo <= c.rhs && hi >= c.rhs;
    }
    return false;
  }

  const BinaryProgram& p_;
  std::vector<std::vector<Adjacent>> adj_;
  std::vector<std::uint8_t> x_;
  std::vector<std::vector<std::pair<int, int>>> cons_of_;
  std::vector<int> fixed_sum_;
  std::vector<int> free_min_;
  std::vector<int> free_max_;
  std::vector<double> delta_obj_;
  std::vector<double> delta_cost_;
  double obj_ = 0.0;
  double cost_ = 0.0;
  long long bits_ = 0;
};

// Cost every completion must pay when variable k is set: for each min-one
// group lying entirely above k and pairing with k, the cheapest partner.
std::vector<double> GroupExtras(const BinaryProgram& p,
                                const std::vector<std::vector<Adjacent>>& adj) {
  std::vector<std::vector<int>> groups;
  for (const LinearConstraint& c : p.constraints) {
    if (c.sense != Sense::kGe || c.rhs != 1) continue;
    bool unit = true;
    std::vector<int> vars;
    for (const LinearTerm& term : c.terms) {
      if (term.coef != 1) unit = false;
      vars.push_back(term.var);
    }
    if (!unit || vars.empty()) continue;
    std::sort(vars.begin(), vars.end());
    groups.push_back(std::move(vars));
  }
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());

  std::vector<double> extra(p.n, 0.0);
  std::vector<double> partner(p.n, 0.0);
  std::vector<std::uint8_t> used(p.n, 0);
  for (int k = 0; k < p.n; ++k) {
    for (const Adjacent& a : adj[k]) partner[a.m] = a.cost;
    for (const auto& g : groups) {
      if (g.front() <= k) continue;
      bool disjoint = true;
      double cheapest = std::numeric_limits<double>::infinity();
      for (int m : g) {
        if (used[m]) disjoint = false;
        cheapest = std::min(cheapest, partner[m]);
      }
      if (!disjoint || !(cheapest > 0.0)) continue;
      extra[k] += cheapest;
      for (int m : g) used[m] = 1;
    }
    for (const Adjacent& a : adj[k]) partner[a.m] = 0.0;
    std::fill(used.begin(), used.end(), 0);
  }
  return extra;
}

class BranchAndBound {
 public:
  explicit BranchAndBound(const BinaryProgram& p)
      : state_(p), extra_(GroupExtras(p, state_.adj())) {}

  ProgramResult Run() {
    if (state_.InitiallyPossible()) Dfs(0);
    best_.nodes = nodes_;
    return best_;
  }

 private:
  struct Item {
    double gain;
    double cost;
  };

  double Bound(int d) {
    const BinaryProgram& p = state_.program();
    const auto& x = state_.x();
    items_.clear();
    double free_gain = 0.0;
    for (int k = d; k < p.n; ++k) {
      double g = p.obj_lin[k];
      double c = p.cost_lin[k] + extra_[k];
      for (const Adjacent& a : state_.adj()[k]) {
        if (a.m < d) {
          if (x[a.m]) {
            g += a.obj;
            c += a.cost;
          }
        } else if (a.m > k) {
          g += a.obj;
        }
      }
      if (g <= 0.0) continue;
      if (c <= 0.0) {
        free_gain += g;
      } else {
        items_.push_back({g, c});
      }
    }
    std::sort(items_.begin(), items_.end(), [](const Item& a, const Item& b) {
      return a.gain * b.cost > b.gain * a.cost;
    });
    double room = p.budget + kBudgetSlack - state_.cost();
    double bound = state_.obj() + free_gain;
    for (const Item& it : items_) {
      if (room <= 0.0) break;
      if (it.cost <= room) {
        bound += it.gain;
        room -= it.cost;
      } else {
        bound += it.gain * (room / it.cost);
        room = 0.0;
      }
    }
    return bound;
  }

  void Dfs(int d) {
    ++nodes_;
    if (nodes_ % kLogEvery == 0) {
      detail::Log()->debug("bnb nodes={} depth={} incumbent={}", nodes_, d,
                           best_.found ? best_.objective : -1.0);
    }
    const BinaryProgram& p = state_.program();
    if (d == p.n) {
      ProgramResult cand = state_.Snapshot();
      if (!best_.found || Better(cand, best_)) best_ = std::move(cand);
      return;
    }
    if (best_.found) {
      const double bound = Bound(d);
      const double tol = ObjTol(best_.objective);
      if (bound < best_.objective - tol) return;
      if (bound <= best_.objective + tol) {
        const double ctol = ObjTol(best_.cost);
        if (state_.cost() > best_.cost + ctol) return;
        if (state_.cost() >= best_.cost - ctol && state_.bits() >= best_.bits) {
          return;
        }
      }
    }
    for (std::uint8_t val : {std::uint8_t{1}, std::uint8_t{0}}) {
      if (state_.Fix(d, val, true)) Dfs(d + 1);
      state_.Unfix(d);
    }
  }

  SearchState state_;
  std::vector<double> extra_;
  std::vector<Item> items_;
  ProgramResult best_;
  long long nodes_ = 0;
};

class CostMinimizer {
 public:
  explicit CostMinimizer(const BinaryProgram& p) : state_(p) {}

  ProgramResult Run() {
    if (!state_.program().trivially_infeasible) Dfs(0);
    best_.nodes = nodes_;
    return best_;
  }

 private:
  void Dfs(int d) {
    ++nodes_;
    if (best_.found) {
      const double ctol = ObjTol(best_.cost);
      if (state_.cost() > best_.cost + ctol) return;
      if (state_.cost() >= best_.cost - ctol && state_.bits() >= best_.bits) {
        return;
      }
    }
    if (d == state_.program().n) {
      best_ = state_.Snapshot();
      return;
    }
    for (std::uint8_t val : {std::uint8_t{0}, std::uint8_t{1}}) {
      if (state_.Fix(d, val, false)) Dfs(d + 1);
      state_.Unfix(d);
    }
  }

  SearchState state_;
  ProgramResult best_;
  long long nodes_ = 0;
};

}  // namespace

double BinaryProgram::Objective(std::span<const std::uint8_t> x) const {
  double total = obj_const;
  for (int k = 0; k < n; ++k) {
    if (x[k]) total += obj_lin[k];
  }
  for (const Pair& pr : pairs) {
    if (x[pr.a] && x[pr.b]) total += pr.obj;
  }
  return total;
}

double BinaryProgram::Cost(std::span<const std::uint8_t> x) const {
  double total = cost_const;
  for (int k = 0; k < n; ++k) {
    if (x[k]) total += cost_lin[k];
  }
  for (const Pair& pr : pairs) {
    if (x[pr.a] && x[pr.b]) total += pr.cost;
  }
  return total;
}

long long BinaryProgram::Bits(std::span<const std::uint8_t> x) const {
  long long total = bits_const;
  for (int k = 0; k < n; ++k) {
    if (x[k]) total += multiplicity[k];
  }
  return total;
}

bool BinaryProgram::Feasible(std::span<const std::uint8_t> x) const {
  if (trivially_infeasible) return false;
  for (const LinearConstraint& c : constraints) {
    if (!c.Satisfied(x)) return false;
  }
  return Cost(x) <= budget + kBudgetSlack;
}

bool Better(const ProgramResult& a, const ProgramResult& b) {
  const double tol = ObjTol(std::max(std::abs(a.objective), std::abs(b.objective)));
  if (a.objective > b.objective + tol) return true;
  if (a.objective < b.objective - tol) return false;
  const double ctol = ObjTol(std::max(std::abs(a.cost), std::abs(b.cost)));
  if (a.cost < b.cost - ctol) return true;
  if (a.cost > b.cost + ctol) return false;
  if (a.bits != b.bits) return a.bits < b.bits;
  const std::size_t n = std::min(a.x.size(), b.x.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (a.x[k] != b.x[k]) return a.x[k] > b.x[k];
  }
  return false;
}

ProgramResult SolveBranchAndBound(const BinaryProgram& program) {
  return BranchAndBound(program).Run();
}

ProgramResult SolveByEnumeration(const BinaryProgram& program) {
  const int n = program.n;
  if (n > 30) {
    throw Error(ErrorCode::kTooLarge, "enumeration is limited to 30 variables");
  }
  ProgramResult best;
  if (program.trivially_infeasible) return best;
  const auto adj = BuildAdjacency(program);
  std::vector<std::vector<std::pair<int, int>>> cons_of(n);
  const std::size_t nc = program.constraints.size();
  std::vector<int> lhs(nc, 0);
  int violated = 0;
  for (std::size_t ci = 0; ci < nc; ++ci) {
    for (const LinearTerm& term : program.constraints[ci].terms) {
      cons_of[term.var].push_back({static_cast<int>(ci), term.coef});
    }
    if (!SenseHolds(program.constraints[ci].sense, 0,
                    program.constraints[ci].rhs)) {
      ++violated;
    }
  }
  std::vector<std::uint8_t> x(n, 0);
  double obj = program.obj_const;
  double cost = program.cost_const;
  long long bits = program.bits_const;

  auto consider = [&] {
    ++best.nodes;
    if (violated != 0 || cost > program.budget + kBudgetSlack) return;
    ProgramResult cand;
    cand.found = true;
    cand.x = x;
    cand.objective = obj;
    cand.cost = cost;
    cand.bits = bits;
    if (!best.found || Better(cand, best)) {
      const long long nodes = best.nodes;
      best = std::move(cand);
      best.nodes = nodes;
    }
  };

  consider();
  const unsigned long long total = 1ULL << n;
  for (unsigned long long step = 1; step < total; ++step) {
    const int k = std::countr_zero(step);
    const int sign = x[k] ? -1 : 1;
    double dobj = program.obj_lin[k];
    double dcost = program.cost_lin[k];
    for (const Adjacent& a : adj[k]) {
      if (x[a.m]) {
        dobj += a.obj;
        dcost += a.cost;
      }
    }
    obj += sign * dobj;
    cost += sign * dcost;
    bits += sign * program.multiplicity[k];
    for (const auto& [ci, coef] : cons_of[k]) {
      const LinearConstraint& c = program.constraints[ci];
      const bool was = SenseHolds(c.sense, lhs[ci], c.rhs);
      lhs[ci] += sign * coef;
      const bool now = SenseHolds(c.sense, lhs[ci], c.rhs);
      violated += static_cast<int>(was) - static_cast<int>(now);
    }
    x[k] = static_cast<std::uint8_t>(1 - x[k]);
    consider();
  }
  if (best.found) {
    best.objective = program.Objective(best.x);
    best.cost = program.Cost(best.x);
  }
  return best;
}

ProgramResult MinimizeCost(const BinaryProgram& program) {
  BinaryProgram relaxed = program;
  relaxed.budget = std::numeric_limits<double>::infinity();
  ProgramResult r = CostMinimizer(relaxed).Run();
  if (r.found) r.objective = program.Objective(r.x);
  return r;
}

namespace {

struct Source {
  int var = -1;  // program variable, or -1 for a constant
  std::uint8_t value = 0;
};

class ProgramBuilder {
 public:
  explicit ProgramBuilder(BinaryProgram& p) : p_(p) {}

  void Linear(const Source& s, double obj, double cost) {
    if (s.var < 0) {
      if (s.value) {
        p_.obj_const += obj;
        p_.cost_const += cost;
      }
      return;
    }
    p_.obj_lin[s.var] += obj;
    p_.cost_lin[s.var] += cost;
  }

  void Quadratic(const Source& s, const Source& r, double obj, double cost) {
    if (s.var < 0) {
      if (s.value) Linear(r, obj, cost);
      return;
    }
    if (r.var < 0) {
      if (r.value) Linear(s, obj, cost);
      return;
    }
    if (s.var == r.var) {
      Linear(s, obj, cost);
      return;
    }
    const int a = std::min(s.var, r.var);
    const int b = std::max(s.var, r.var);
    const std::uint64_t key =
        (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    auto [it, inserted] = index_.try_emplace(key, p_.pairs.size());
    if (inserted) p_.pairs.push_back({a, b, 0.0, 0.0});
    p_.pairs[it->second].obj += obj;
    p_.pairs[it->second].cost += cost;
  }

  void Finish() {
    std::sort(p_.pairs.begin(), p_.pairs.end(),
              [](const BinaryProgram::Pair& l, const BinaryProgram::Pair& r) {
                return std::pair(l.a, l.b) < std::pair(r.a, r.b);
              });
    std::erase_if(p_.pairs, [](const BinaryProgram::Pair& pr) {
      return pr.obj == 0.0 && pr.cost == 0.0;
    });
  }

 private:
  BinaryProgram& p_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

}  // namespace

CompiledProgram Compile(const CompileInput& in,
                        std::span<const std::uint8_t> x,
                        std::span<const int> free_flat) {
  const NetworkSpec& net = *in.net;
  const ImportanceSet& importance = *in.importance;
  const ResourceSpec& res = *in.resource;
  const VariableLayout& layout = in.constraints->layout;
  const int L = net.num_layers();

  CompiledProgram out;
  BinaryProgram& p = out.program;
  p.n = static_cast<int>(free_flat.size());
  p.obj_lin.assign(p.n, 0.0);
  p.cost_lin.assign(p.n, 0.0);
  p.multiplicity.assign(p.n, 0);
  p.budget = in.budget;
  out.flat_of.assign(free_flat.begin(), free_flat.end());

  std::vector<Source> src(layout.size());
  for (int f = 0; f < layout.size(); ++f) src[f] = Source{-1, x[f]};
  for (int k = 0; k < p.n; ++k) src[free_flat[k]] = Source{k, 0};
  if (!net.prune_input_channels()) {
    for (int j = 0; j < net.channels(0); ++j) src[layout.u(0, j)] = Source{-1, 1};
  }
  for (int t = 0; t <= L; ++t) {
    if (!net.is_skip_target(t)) {
      for (int j = 0; j < net.channels(t); ++j) {
        src[layout.v(t, j)] = src[layout.u(t, j)];
      }
    }
    if (in.derive_mode == PruneMode::kChannel && t > 0) {
      const int kk = layout.kernel_area(t);
      for (int s = 0; s < layout.num_slots(t); ++s) {
        for (int c = 0; c < layout.columns(t); ++c) {
          src[layout.q(t, s, c)] = src[layout.u(t, c / kk)];
        }
      }
    }
  }

  ProgramBuilder build(p);
  for (int t = 0; t <= L; ++t) {
    for (int j = 0; j < net.channels(t); ++j) {
      if (res.a_u[t] != 0.0) build.Linear(src[layout.u(t, j)], 0.0, res.a_u[t]);
      if (net.is_skip_target(t) && res.a_v[t] != 0.0) {
        build.Linear(src[layout.v(t, j)], 0.0, res.a_v[t]);
      }
    }
  }
  for (int t = 1; t <= L; ++t) {
    const Tensor4<double>& imp = importance[t - 1].values;
    const int k = net.kernel(t);
    const int kk = k * k;
    const double b = res.b[t];
    for (const Edge& e : net.edges_into(t)) {
      for (int i = 0; i < e.rows; ++i) {
        const Source& sv = src[layout.v(e.source, i)];
        if (sv.var < 0 && !sv.value) continue;
        const int row = e.row_offset + i;
        for (int j = 0; j < net.channels(t); ++j) {
          for (int c = 0; c < kk; ++c) {
            const Source& sq = src[layout.q(t, e.slot, j * kk + c)];
            if (sq.var < 0 && !sq.value) continue;
            build.Quadratic(sv, sq, imp.at(row, j, c / k, c % k), b);
          }
        }
      }
    }
  }
  build.Finish();

  for (int f = 0; f < layout.size(); ++f) {
    if (src[f].var >= 0) {
      ++p.multiplicity[src[f].var];
    } else {
      p.bits_const += src[f].value;
    }
  }

  std::vector<int> coef(p.n, 0);
  std::vector<int> touched;
  for (const LinearConstraint& c : in.constraints->constraints) {
    int constant = 0;
    for (const LinearTerm& term : c.terms) {
      const Source& s = src[term.var];
      if (s.var < 0) {
        constant += term.coef * s.value;
      } else {
        if (coef[s.var] == 0) touched.push_back(s.var);
        coef[s.var] += term.coef;
      }
    }
    LinearConstraint sub;
    sub.sense = c.sense;
    sub.rhs = c.rhs - constant;
    sub.tag = c.tag;
    sub.t = c.t;
    std::sort(touched.begin(), touched.end());
    int lo = 0;
    int hi = 0;
    for (int var : touched) {
      if (coef[var] != 0) {
        sub.terms.push_back({var, coef[var]});
        lo += std::min(coef[var], 0);
        hi += std::max(coef[var], 0);
      }
      coef[var] = 0;
    }
    touched.clear();
    const bool always = (sub.sense == Sense::kLe && hi <= sub.rhs) ||
                        (sub.sense == Sense::kGe && lo >= sub.rhs) ||
                        (sub.sense == Sense::kEq && lo == sub.rhs &&
                         hi == sub.rhs);
    if (always) continue;
    if (sub.terms.empty()) {
      p.trivially_infeasible = true;
      continue;
    }
    p.constraints.push_back(std::move(sub));
  }
  return out;
}

void Expand(const CompiledProgram& compiled, const VariableLayout& layout,
            PruneMode derive_mode, std::span<const std::uint8_t> px,
            std::vector<std::uint8_t>& x) {
  for (std::size_t k = 0; k < compiled.flat_of.size(); ++k) {
    x[compiled.flat_of[k]] = px[k];
  }
  layout.Complete(x, derive_mode);
}

}  // namespace prunesolve
