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

#include "prunesolve/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "log.hpp"
#include "prunesolve/consistency.hpp"
#include "prunesolve/error.hpp"

namespace prunesolve {
namespace {

constexpr double kBudgetSlack = 1e-9;
constexpr int kEnumerationBits = 20;
constexpr double kDpCells = 1e7;

double ObjTol(double reference) {
  return 1e-9 * std::max(1.0, std::abs(reference));
}

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

void CheckNonNegative(const std::vector<double>& values, const char* name) {
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (values[t] < 0.0 || !std::isfinite(values[t])) {
      throw Error(ErrorCode::kNegativeCoefficient,
                  std::string("resource coefficient ") + name + "[" +
                      std::to_string(t) + "] = " + std::to_string(values[t]) +
                      " must be finite and >= 0");
    }
  }
}

std::vector<std::uint8_t> Flat(const Problem& p, const PruningSolution& sol,
                               PruneMode derive_mode) {
  std::vector<std::uint8_t> x = p.constraints().layout.Flatten(sol);
  p.constraints().layout.Complete(x, derive_mode);
  return x;
}

long long CountBits(std::span<const std::uint8_t> x) {
  return std::accumulate(x.begin(), x.end(), 0LL);
}

}  // namespace

std::string_view ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kFeasible: return "feasible";
    case SolveStatus::kInfeasible: return "infeasible";
  }
  return "?";
}

Problem::Problem(NetworkSpec net, ImportanceSet importance,
                 ResourceSpec resource, PruneMode mode, Scheme scheme)
    : net_(std::move(net)),
      importance_(std::move(importance)),
      resource_(std::move(resource)),
      mode_(mode),
      scheme_(scheme) {}

Problem Problem::Create(NetworkSpec net, ImportanceSet importance,
                        ResourceSpec resource, PruneMode mode, Scheme scheme) {
  ValidateImportance(net, importance);
  const std::size_t want = static_cast<std::size_t>(net.num_layers()) + 1;
  if (resource.a_u.size() != want || resource.a_v.size() != want ||
      resource.b.size() != want) {
    throw Error(ErrorCode::kShapeMismatch,
                "resource coefficients must cover feature maps 0.." +
                    std::to_string(net.num_layers()));
  }
  CheckNonNegative(resource.a_u, "a_u");
  CheckNonNegative(resource.a_v, "a_v");
  CheckNonNegative(resource.b, "b");

  Problem p(std::move(net), std::move(importance), std::move(resource), mode,
            scheme);
  p.constraints_ = BuildConstraints(p.net_, mode, scheme);
  p.min_usage_ =
      Usage(p.net_, MinimalSolution(p.net_, mode, scheme), p.resource_);
  p.full_usage_ = FullUsage(p.net_, p.resource_);
  p.free_ = p.constraints_.layout.FreeVariables(mode);
  if (p.budget() + kBudgetSlack < p.min_usage_) {
    throw Error(ErrorCode::kInfeasibleBudget,
                "budget " + std::to_string(p.resource_.budget) +
                    " is below the minimum feasible usage " +
                    std::to_string(p.min_usage_ + p.resource_.constant));
  }
  return p;
}

CompileInput Problem::compile_input(PruneMode derive_mode,
                                    double budget) const {
  CompileInput in;
  in.net = &net_;
  in.importance = &importance_;
  in.resource = &resource_;
  in.constraints = &constraints_;
  in.derive_mode = derive_mode;
  in.budget = budget;
  return in;
}

SolveResult Evaluate(const Problem& p, PruningSolution sol) {
  ValidateSolutionShape(p.net(), sol);
  SolveResult r;
  r.objective = ObjectiveValue(p.net(), p.importance(), sol);
  r.usage = Usage(p.net(), sol, p.resource());
  const bool ok = CheckFeasible(p.constraints(), sol).feasible() &&
                  r.usage <= p.budget() + kBudgetSlack;
  r.status = ok ? SolveStatus::kFeasible : SolveStatus::kInfeasible;
  const ActivityReport report =
      FindInactiveWeights(p.net(), MasksFromSolution(p.net(), sol));
  r.inactive_weights = static_cast<long long>(report.inactive.size());
  r.solution = std::move(sol);
  return r;
}

SolveResult SolveExact(const Problem& p, int max_variables) {
  const Stopwatch clock;
  const int n = static_cast<int>(p.free_variables().size());
  if (n > max_variables) {
    throw Error(ErrorCode::kTooLarge,
                std::to_string(n) + " decision bits exceed the exact-solver cap of " +
                    std::to_string(max_variables));
  }
  std::vector<std::uint8_t> x =
      Flat(p, PruningSolution::AllOnes(p.net(), p.mode()), p.mode());
  const CompiledProgram compiled = Compile(
      p.compile_input(p.mode(), p.budget()), x, p.free_variables());
  const ProgramResult best = SolveBranchAndBound(compiled.program);
  if (!best.found) {
    throw Error(ErrorCode::kInfeasibleBudget,
                "no assignment satisfies the constraints within the budget");
  }
  Expand(compiled, p.constraints().layout, p.mode(), best.x, x);
  SolveResult r =
      Evaluate(p, p.constraints().layout.Unflatten(x, p.mode()));
  r.status = SolveStatus::kOptimal;
  r.stats.nodes = best.nodes;
  r.stats.wall_ms = clock.ms();
  detail::Log()->info("exact: objective={} usage={} nodes={}", r.objective,
                      r.usage, best.nodes);
  return r;
}

OracleResult BruteForceOracle(const Problem& p, int max_variables) {
  const Stopwatch clock;
  const std::vector<int>& free = p.free_variables();
  const int n = static_cast<int>(free.size());
  if (n > max_variables) {
    throw Error(ErrorCode::kTooLarge,
                std::to_string(n) + " decision bits exceed the oracle cap of " +
                    std::to_string(max_variables));
  }
  const VariableLayout& layout = p.constraints().layout;
  std::vector<std::uint8_t> x(layout.size(), 0);

  OracleResult out;
  ProgramResult best;
  std::vector<std::pair<unsigned long long, double>> seen;

  const unsigned long long total = 1ULL << n;
  for (unsigned long long mask = 0; mask < total; ++mask) {
    for (int k = 0; k < n; ++k) {
      x[free[k]] = static_cast<std::uint8_t>((mask >> k) & 1ULL);
    }
    layout.Complete(x, p.mode());
    if (!Satisfies(p.constraints(), x)) continue;
    const PruningSolution sol = layout.Unflatten(x, p.mode());
    const double usage = Usage(p.net(), sol, p.resource());
    if (usage > p.budget() + kBudgetSlack) continue;
    ++out.feasible_count;
    ProgramResult cand;
    cand.found = true;
    cand.objective = ObjectiveValue(p.net(), p.importance(), sol);
    cand.cost = usage;
    cand.bits = CountBits(x);
    cand.x = x;
    seen.emplace_back(mask, cand.objective);
    if (!best.found || Better(cand, best)) {
      best = std::move(cand);
    }
  }
  if (!best.found) {
    throw Error(ErrorCode::kInfeasibleBudget,
                "no assignment satisfies the constraints within the budget");
  }
  const double tol = ObjTol(best.objective);
  for (const auto& [mask, objective] : seen) {
    if (std::abs(objective - best.objective) > tol) continue;
    for (int k = 0; k < n; ++k) {
      x[free[k]] = static_cast<std::uint8_t>((mask >> k) & 1ULL);
    }
    layout.Complete(x, p.mode());
    out.optima.push_back(layout.Unflatten(x, p.mode()));
  }
  out.best = Evaluate(p, layout.Unflatten(best.x, p.mode()));
  out.best.status = SolveStatus::kOptimal;
  out.best.stats.nodes = static_cast<long long>(total);
  out.best.stats.wall_ms = clock.ms();
  return out;
}

std::vector<std::uint8_t> SolveBlock(const Problem& p,
                                     std::span<const std::uint8_t> x,
                                     std::span<const int> block, double budget,
                                     PruneMode derive_mode) {
  std::vector<std::uint8_t> out(x.begin(), x.end());
  if (block.empty()) return out;
  const CompiledProgram compiled =
      Compile(p.compile_input(derive_mode, budget), x, block);
  const ProgramResult r = compiled.program.n <= kEnumerationBits
                              ? SolveByEnumeration(compiled.program)
                              : SolveBranchAndBound(compiled.program);
  if (!r.found) {
    throw Error(ErrorCode::kInfeasibleBlock,
                "block of " + std::to_string(block.size()) +
                    " bits has no feasible assignment within budget " +
                    std::to_string(budget));
  }
  Expand(compiled, p.constraints().layout, derive_mode, r.x, out);
  return out;
}

namespace {

// Smallest-usage assignment of the block; leaves `x` unchanged when the
// constraints cannot be met by the block alone.
std::vector<std::uint8_t> RepairBlock(const Problem& p,
                                      std::span<const std::uint8_t> x,
                                      std::span<const int> block) {
  std::vector<std::uint8_t> out(x.begin(), x.end());
  if (block.empty()) return out;
  const CompiledProgram compiled =
      Compile(p.compile_input(PruneMode::kChannel,
                              std::numeric_limits<double>::infinity()),
              x, block);
  const ProgramResult r = MinimizeCost(compiled.program);
  if (r.found) {
    Expand(compiled, p.constraints().layout, PruneMode::kChannel, r.x, out);
  }
  return out;
}

struct Scored {
  double objective = 0.0;
  double usage = 0.0;
};

Scored Score(const Problem& p, std::span<const std::uint8_t> x) {
  const PruningSolution sol =
      p.constraints().layout.Unflatten(x, PruneMode::kChannel);
  return Scored{ObjectiveValue(p.net(), p.importance(), sol),
                Usage(p.net(), sol, p.resource())};
}

ProgramResult AsCandidate(const Problem& p, const PruningSolution& sol) {
  ProgramResult r;
  r.found = true;
  r.x = p.constraints().layout.Flatten(sol);
  r.objective = ObjectiveValue(p.net(), p.importance(), sol);
  r.cost = Usage(p.net(), sol, p.resource());
  r.bits = CountBits(r.x);
  return r;
}

}  // namespace

SolveResult SolveBcd(const Problem& p, const BcdConfig& cfg, BcdTrace* trace) {
  if (cfg.block_size < 1) {
    throw Error(ErrorCode::kValidation, "block size must be >= 1");
  }
  if (!(cfg.gamma_step > 0.0 && cfg.gamma_step <= 1.0)) {
    throw Error(ErrorCode::kValidation, "gamma step must lie in (0, 1]");
  }
  if (cfg.max_iter < 1) {
    throw Error(ErrorCode::kValidation, "max_iter must be >= 1");
  }
  const Stopwatch clock;
  const NetworkSpec& net = p.net();
  const VariableLayout& layout = p.constraints().layout;
  const int L = net.num_layers();
  const double target = p.budget();
  const double full = p.full_usage();

  std::vector<double> levels;
  if (full <= target || target <= 0.0) {
    levels.push_back(target);
  } else {
    const double gamma0 = target / full;
    for (int k = 0;; ++k) {
      const double gamma = gamma0 + k * cfg.gamma_step;
      if (gamma >= 1.0 - 1e-12) break;
      levels.push_back(target / gamma);
    }
    levels.push_back(target);
  }
  if (trace != nullptr) trace->level_budgets = levels;

  // Channel-phase blocks: feature maps [i, i + B - 1].
  const std::vector<int> channel_free = layout.FreeVariables(PruneMode::kChannel);
  std::vector<std::vector<int>> blocks;
  const int last = std::max(0, L + 1 - cfg.block_size);
  for (int i = 0; i <= last; ++i) {
    const int hi = std::min(i + cfg.block_size - 1, L);
    std::vector<int> vars;
    for (int f : channel_free) {
      const int t = layout.describe(f).t;
      if (t >= i && t <= hi) vars.push_back(f);
    }
    blocks.push_back(std::move(vars));
  }

  std::vector<std::uint8_t> x =
      Flat(p, PruningSolution::AllOnes(net, PruneMode::kChannel),
           PruneMode::kChannel);
  SolveResult result;
  ProgramResult best;

  auto sweeps = [&](int level_index, double level) {
    for (int iter = 0; iter < cfg.max_iter; ++iter) {
      bool changed = false;
      for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].empty()) continue;
        const Scored before = Score(p, x);
        std::vector<std::uint8_t> next;
        bool repaired = false;
        try {
          next = SolveBlock(p, x, blocks[b], level, PruneMode::kChannel);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kInfeasibleBlock) throw;
          next = RepairBlock(p, x, blocks[b]);
          repaired = true;
        }
        ++result.stats.block_updates;
        if (trace != nullptr) {
          const Scored after = Score(p, next);
          trace->updates.push_back(BlockUpdate{
              level_index, level, iter, static_cast<int>(b), before.objective,
              after.objective, before.usage <= level + kBudgetSlack,
              after.usage <= level + kBudgetSlack, repaired});
        }
        if (next != x) {
          changed = true;
          x = std::move(next);
        }
      }
      ++result.stats.iterations;
      if (!changed) break;
    }
  };

  for (std::size_t li = 0; li < levels.size(); ++li) {
    const double level = levels[li];
    sweeps(static_cast<int>(li), level);
    if (Score(p, x).usage > level + kBudgetSlack) {
      std::vector<std::uint8_t> minimal =
          Flat(p, MinimalSolution(net, PruneMode::kChannel, p.scheme()),
               PruneMode::kChannel);
      if (Score(p, minimal).usage <= level + kBudgetSlack) {
        detail::Log()->info("bcd: level {} restarts from the minimal solution",
                            level);
        x = std::move(minimal);
        sweeps(static_cast<int>(li), level);
      }
    }
    ++result.stats.levels;
    const Scored now = Score(p, x);
    detail::Log()->info("bcd: level={} budget={} objective={} usage={}", li,
                        level, now.objective, now.usage);
    if (p.mode() == PruneMode::kChannelSpatial) {
      try {
        PruningSolution channels = layout.Unflatten(x, PruneMode::kChannel);
        ProgramResult cand = AsCandidate(p, SolveShapeColumns(p, channels));
        if (!best.found || Better(cand, best)) best = std::move(cand);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kInfeasibleBudget) throw;
      }
    }
  }

  if (p.mode() == PruneMode::kChannel) {
    best = AsCandidate(p, layout.Unflatten(x, PruneMode::kChannel));
  } else if (!best.found) {
    best = AsCandidate(
        p, SolveShapeColumns(p, MinimalSolution(net, PruneMode::kChannelSpatial,
                                                p.scheme())));
  }
  SolveResult final_result = Evaluate(p, layout.Unflatten(best.x, p.mode()));
  final_result.stats = result.stats;
  final_result.stats.wall_ms = clock.ms();
  return final_result;
}

PruningSolution SolveShapeColumns(const Problem& p,
                                  const PruningSolution& channels) {
  const NetworkSpec& net = p.net();
  const ResourceSpec& res = p.resource();
  const int L = net.num_layers();
  ValidateSolutionShape(net, channels);
  PruningSolution sol = channels;
  sol.mode = PruneMode::kChannelSpatial;

  double fixed = 0.0;
  for (int t = 0; t <= L; ++t) {
    fixed += res.a_u[t] * static_cast<double>(CountOnes(sol.u[t]));
    if (net.is_skip_target(t)) {
      fixed += res.a_v[t] * static_cast<double>(CountOnes(sol.v[t]));
    }
  }
  const double room = p.budget() - fixed;

  struct Group {
    int t = 0;
    int slot = 0;
    int j = 0;
    double cost = 0.0;          // per column
    std::vector<int> order;     // columns of channel j, best gain first
    std::vector<double> value;  // value[k-1]: total gain of the best k
  };
  std::vector<Group> groups;
  double required = 0.0;
  for (int t = 1; t <= L; ++t) {
    const int k = net.kernel(t);
    const int kk = k * k;
    const Tensor4<double>& imp = p.importance()[t - 1].values;
    for (const Edge& e : net.edges_into(t)) {
      auto& cols = sol.q[t][e.slot];
      std::fill(cols.begin(), cols.end(), 0);
      const long long alive = CountOnes(sol.v[e.source]);
      for (int j = 0; j < net.channels(t); ++j) {
        if (!sol.u[t][j]) continue;
        Group g{t, e.slot, j, res.b[t] * static_cast<double>(alive), {}, {}};
        std::vector<double> gain(kk, 0.0);
        for (int i = 0; i < e.rows; ++i) {
          if (!sol.v[e.source][i]) continue;
          for (int c = 0; c < kk; ++c) {
            gain[c] += imp.at(e.row_offset + i, j, c / k, c % k);
          }
        }
        g.order.resize(kk);
        std::iota(g.order.begin(), g.order.end(), 0);
        std::stable_sort(g.order.begin(), g.order.end(),
                         [&](int a, int b) { return gain[a] > gain[b]; });
        double acc = 0.0;
        for (int c : g.order) {
          acc += gain[c];
          g.value.push_back(acc);
        }
        required += g.cost;
        groups.push_back(std::move(g));
      }
    }
  }
  if (required > room + kBudgetSlack) {
    throw Error(ErrorCode::kInfeasibleBudget,
                "one shape column per active channel needs " +
                    std::to_string(required + fixed) + ", budget is " +
                    std::to_string(p.budget()));
  }

  // Integer costs: exact DP over the scaled budget.
  bool integral = true;
  long long unit = 0;
  for (const Group& g : groups) {
    if (std::abs(g.cost - std::round(g.cost)) > 1e-9) integral = false;
    if (integral) unit = std::gcd(unit, static_cast<long long>(std::llround(g.cost)));
  }
  std::vector<int> take(groups.size(), 1);
  bool solved = false;
  if (integral) {
    const double scaled_room =
        unit > 0 ? std::floor((room + kBudgetSlack) / static_cast<double>(unit))
                 : 0.0;
    const double cells =
        static_cast<double>(groups.size()) * (scaled_room + 1.0);
    if (cells <= kDpCells) {
      const int W = static_cast<int>(scaled_room);
      struct Cell {
        double value = -std::numeric_limits<double>::infinity();
        long long cost = 0;
        long long bits = 0;
      };
      auto better = [](const Cell& a, const Cell& b) {
        const double tol = ObjTol(std::max(std::abs(a.value), std::abs(b.value)));
        if (a.value > b.value + tol) return true;
        if (a.value < b.value - tol) return false;
        if (a.cost != b.cost) return a.cost < b.cost;
        return a.bits < b.bits;
      };
      std::vector<Cell> dp(W + 1, Cell{0.0, 0, 0});
      std::vector<Cell> next(W + 1);
      std::vector<std::vector<std::uint16_t>> choice(
          groups.size(), std::vector<std::uint16_t>(W + 1, 0));
      // Groups are folded in reverse so that, on full ties, the earliest
      // group keeps the most columns (the lexicographic preference).
      for (std::size_t gi = groups.size(); gi-- > 0;) {
        const Group& g = groups[gi];
        const long long c = unit > 0 ? std::llround(g.cost) / unit : 0;
        std::fill(next.begin(), next.end(), Cell{});
        for (int w = 0; w <= W; ++w) {
          for (int k = static_cast<int>(g.value.size()); k >= 1; --k) {
            const long long used = c * k;
            if (used > w) continue;
            const Cell& prev = dp[w - used];
            if (prev.value == -std::numeric_limits<double>::infinity()) continue;
            const Cell cand{prev.value + g.value[k - 1], prev.cost + used,
                            prev.bits + k};
            if (next[w].value == -std::numeric_limits<double>::infinity() ||
                better(cand, next[w])) {
              next[w] = cand;
              choice[gi][w] = static_cast<std::uint16_t>(k);
            }
          }
        }
        dp.swap(next);
      }
      if (dp[W].value == -std::numeric_limits<double>::infinity()) {
        throw Error(ErrorCode::kInfeasibleBudget,
                    "no shape-column assignment fits the budget");
      }
      int w = W;
      for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const int k = choice[gi][w];
        take[gi] = k;
        const long long c =
            unit > 0 ? std::llround(groups[gi].cost) / unit : 0;
        w -= static_cast<int>(c * k);
      }
      solved = true;
    }
  }

  if (!solved) {
    // Branch and bound over the shape columns of active channels.
    std::vector<std::uint8_t> x = p.constraints().layout.Flatten(sol);
    std::vector<int> free;
    const VariableLayout& layout = p.constraints().layout;
    for (const Group& g : groups) {
      const int kk = layout.kernel_area(g.t);
      for (int c = 0; c < kk; ++c) free.push_back(layout.q(g.t, g.slot, g.j * kk + c));
    }
    std::sort(free.begin(), free.end());
    const CompiledProgram compiled = Compile(
        p.compile_input(PruneMode::kChannelSpatial, p.budget()), x, free);
    const ProgramResult r = SolveBranchAndBound(compiled.program);
    if (!r.found) {
      throw Error(ErrorCode::kInfeasibleBudget,
                  "no shape-column assignment fits the budget");
    }
    Expand(compiled, layout, PruneMode::kChannelSpatial, r.x, x);
    return layout.Unflatten(x, PruneMode::kChannelSpatial);
  }

  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const Group& g = groups[gi];
    const int kk = net.kernel(g.t) * net.kernel(g.t);
    auto& cols = sol.q[g.t][g.slot];
    for (int k = 0; k < take[gi]; ++k) {
      cols[static_cast<std::size_t>(g.j) * kk + g.order[k]] = 1;
    }
  }
  return sol;
}

SolveResult GreedyBaseline(const Problem& p, std::span<const int> keep_counts) {
  const NetworkSpec& net = p.net();
  const int L = net.num_layers();
  if (static_cast<int>(keep_counts.size()) != L) {
    throw Error(ErrorCode::kValidation,
                "keep_counts needs one entry per layer (" + std::to_string(L) +
                    ")");
  }
  std::vector<std::vector<std::uint8_t>> u(L + 1), v(L + 1);
  u[0].assign(net.channels(0), 1);
  v[0] = u[0];
  for (int t = 1; t <= L; ++t) {
    const int c = net.channels(t);
    const int keep = keep_counts[t - 1];
    if (keep < 1 || keep > c) {
      throw Error(ErrorCode::kValidation,
                  "keep count for layer " + std::to_string(t) +
                      " must lie in [1, " + std::to_string(c) + "]");
    }
    const FilterImportance f = ComputeFilterImportance(p.importance()[t - 1]);
    std::vector<double> score(c, 0.0);
    for (int i = 0; i < f.values.rows; ++i) {
      for (int j = 0; j < c; ++j) score[j] += f.values(i, j);
    }
    std::vector<int> order(c);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return score[a] > score[b]; });
    u[t].assign(c, 0);
    for (int k = 0; k < keep; ++k) u[t][order[k]] = 1;
    v[t].assign(c, 1);
  }
  PruningSolution sol;
  sol.mode = p.mode();
  sol.u = std::move(u);
  sol.v = std::move(v);
  PinShapeColumns(net, sol);

  SolveResult r = Evaluate(p, sol);
  const MaskSet masks = MasksFromSolution(net, r.solution);
  const ActivityReport report = FindInactiveWeights(net, masks);
  r.objective = ActiveObjective(net, p.importance(), masks, report);
  return r;
}

}  // namespace prunesolve
