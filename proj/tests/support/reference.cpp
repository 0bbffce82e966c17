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

#include "reference.hpp"

#include <algorithm>
#include <cmath>

namespace prunesolve::testing {
namespace {

long long Ones(const std::vector<std::uint8_t>& bits) {
  long long n = 0;
  for (std::uint8_t b : bits) n += b;
  return n;
}

template <typename Fn>
void ForEachMaskEntry(const NetworkSpec& net, const PruningSolution& sol,
                      int t, Fn&& fn) {
  const int k = net.kernel(t);
  for (const Edge& e : net.edges_into(t)) {
    const auto& cols = sol.q[t][e.slot];
    for (int i = 0; i < e.rows; ++i) {
      for (int j = 0; j < net.channels(t); ++j) {
        for (int a = 0; a < k; ++a) {
          for (int b = 0; b < k; ++b) {
            const int on = sol.v[e.source][i] &
                           cols[static_cast<std::size_t>((j * k + a) * k + b)];
            fn(e.row_offset + i, j, a, b, on);
          }
        }
      }
    }
  }
}

}  // namespace

bool ReferenceFeasible(const NetworkSpec& net, const PruningSolution& sol,
                       Scheme scheme) {
  const int L = net.num_layers();
  if (!net.prune_input_channels()) {
    for (std::uint8_t b : sol.u[0]) {
      if (!b) return false;
    }
  }
  for (int t = 0; t <= L; ++t) {
    if (Ones(sol.u[t]) < 1) return false;
    const SkipAddition* skip = net.skip_into(t);
    if (skip == nullptr) {
      if (sol.v[t] != sol.u[t]) return false;
      continue;
    }
    if (Ones(sol.v[t]) < 1) return false;
    const auto& u = sol.u[t];
    const auto& v = sol.v[t];
    const auto& vs = sol.v[skip->s];
    const int cs = net.channels(skip->s);
    for (int j = 0; j < net.channels(t); ++j) {
      if (u[j] > v[j]) return false;
      switch (skip->kind) {
        case SkipKind::kIdentity:
          if (v[j] > u[j] + vs[j]) return false;
          break;
        case SkipKind::kZeroPad:
          if (j < cs ? v[j] > u[j] + vs[j] : v[j] != u[j]) return false;
          break;
        case SkipKind::kConv1x1:
          break;
      }
      if (scheme == Scheme::kGbn) {
        if (u[j] != v[j]) return false;
        if (skip->kind != SkipKind::kConv1x1 && j < cs && vs[j] != u[j]) {
          return false;
        }
      }
    }
  }
  for (int t = 1; t <= L; ++t) {
    const int kk = net.kernel(t) * net.kernel(t);
    for (const Edge& e : net.edges_into(t)) {
      const auto& cols = sol.q[t][e.slot];
      for (int j = 0; j < net.channels(t); ++j) {
        int any = 0;
        for (int c = 0; c < kk; ++c) {
          const std::uint8_t bit = cols[static_cast<std::size_t>(j) * kk + c];
          if (bit > sol.u[t][j]) return false;
          if (sol.mode == PruneMode::kChannel && bit != sol.u[t][j]) {
            return false;
          }
          any |= bit;
        }
        if (sol.u[t][j] > any) return false;
      }
    }
  }
  return true;
}

long long ReferenceMaskCount(const NetworkSpec& net,
                             const PruningSolution& sol, int t) {
  long long n = 0;
  ForEachMaskEntry(net, sol, t, [&](int, int, int, int, int on) { n += on; });
  return n;
}

double ReferenceObjective(const NetworkSpec& net,
                          const ImportanceSet& importance,
                          const PruningSolution& sol) {
  double total = 0.0;
  for (int t = 1; t <= net.num_layers(); ++t) {
    const Tensor4<double>& imp = importance[t - 1].values;
    ForEachMaskEntry(net, sol, t, [&](int i, int j, int a, int b, int on) {
      if (on) total += imp.at(i, j, a, b);
    });
  }
  return total;
}

double ReferenceUsage(const NetworkSpec& net, const PruningSolution& sol,
                      const ResourceSpec& spec) {
  double total = 0.0;
  for (int t = 0; t <= net.num_layers(); ++t) {
    total += spec.a_u[t] * static_cast<double>(Ones(sol.u[t]));
    if (net.is_skip_target(t)) {
      total += spec.a_v[t] * static_cast<double>(Ones(sol.v[t]));
    }
    if (t > 0) {
      total += spec.b[t] * static_cast<double>(ReferenceMaskCount(net, sol, t));
    }
  }
  return total;
}

void EnumerateSolutions(
    const NetworkSpec& net, PruneMode mode,
    const std::function<void(const PruningSolution&)>& visit) {
  PruningSolution sol = PruningSolution::AllOnes(net, mode);
  std::vector<std::uint8_t*> bits;
  const int L = net.num_layers();
  for (int t = net.prune_input_channels() ? 0 : 1; t <= L; ++t) {
    for (auto& b : sol.u[t]) bits.push_back(&b);
  }
  for (int t = 0; t <= L; ++t) {
    if (!net.is_skip_target(t)) continue;
    for (auto& b : sol.v[t]) bits.push_back(&b);
  }
  if (mode == PruneMode::kChannelSpatial) {
    for (auto& slots : sol.q) {
      for (auto& cols : slots) {
        for (auto& b : cols) bits.push_back(&b);
      }
    }
  }
  const unsigned long long total = 1ULL << bits.size();
  for (unsigned long long m = 0; m < total; ++m) {
    for (std::size_t k = 0; k < bits.size(); ++k) *bits[k] = (m >> k) & 1ULL;
    for (int t = 0; t <= L; ++t) {
      if (!net.is_skip_target(t)) sol.v[t] = sol.u[t];
    }
    if (mode == PruneMode::kChannel) PinShapeColumns(net, sol);
    visit(sol);
  }
}

ReferenceOptimum ReferenceSearch(const NetworkSpec& net,
                                 const ImportanceSet& importance,
                                 const ResourceSpec& spec, PruneMode mode,
                                 Scheme scheme, double budget) {
  ReferenceOptimum out;
  EnumerateSolutions(net, mode, [&](const PruningSolution& sol) {
    if (!ReferenceFeasible(net, sol, scheme)) return;
    if (ReferenceUsage(net, sol, spec) > budget + 1e-9) return;
    ++out.feasible;
    const double obj = ReferenceObjective(net, importance, sol);
    const double tol = 1e-9 * std::max(1.0, std::abs(obj));
    if (!out.found || obj > out.objective + tol) {
      out.found = true;
      out.objective = obj;
      out.optima.clear();
      out.optima.push_back(sol);
    } else if (std::abs(obj - out.objective) <= tol) {
      out.optima.push_back(sol);
    }
  });
  return out;
}

double KnapsackBest(const std::vector<double>& values,
                    const std::vector<int>& costs, int capacity) {
  std::vector<double> best(static_cast<std::size_t>(capacity) + 1, 0.0);
  for (std::size_t k = 0; k < values.size(); ++k) {
    for (int w = capacity; w >= costs[k]; --w) {
      best[w] = std::max(best[w], best[w - costs[k]] + values[k]);
    }
  }
  return best[capacity];
}

}  // namespace prunesolve::testing
