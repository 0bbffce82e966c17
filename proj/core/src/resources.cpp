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

#include "prunesolve/resources.hpp"

#include <string>

#include "prunesolve/error.hpp"

namespace prunesolve {

std::string_view ToString(ResourceKind kind) {
  switch (kind) {
    case ResourceKind::kSize: return "size";
    case ResourceKind::kMemory: return "memory";
    case ResourceKind::kFlops: return "flops";
    case ResourceKind::kTime: return "time";
  }
  return "size";
}

ResourceKind ParseResourceKind(std::string_view text) {
  if (text == "size") return ResourceKind::kSize;
  if (text == "memory") return ResourceKind::kMemory;
  if (text == "flops") return ResourceKind::kFlops;
  if (text == "time") return ResourceKind::kTime;
  throw Error(ErrorCode::kParse,
              "unknown constraint kind '" + std::string(text) + "'");
}

std::string_view ToString(Scheme scheme) {
  return scheme == Scheme::kOurs ? "ours" : "gbn";
}

Scheme ParseScheme(std::string_view text) {
  if (text == "ours") return Scheme::kOurs;
  if (text == "gbn") return Scheme::kGbn;
  throw Error(ErrorCode::kParse, "unknown scheme '" + std::string(text) + "'");
}

ResourceSpec Coefficients(const NetworkSpec& net, ResourceKind kind,
                          double budget, std::span<const TimingModel> timing) {
  const int L = net.num_layers();
  ResourceSpec spec;
  spec.kind = kind;
  spec.budget = budget;
  spec.a_u.assign(L + 1, 0.0);
  spec.a_v.assign(L + 1, 0.0);
  spec.b.assign(L + 1, 0.0);

  switch (kind) {
    case ResourceKind::kSize:
      for (int t = 1; t <= L; ++t) spec.b[t] = 1.0;
      break;
    case ResourceKind::kMemory:
      for (int t = 0; t <= L; ++t) {
        spec.a_u[t] = static_cast<double>(net.spatial(t));
        if (net.is_skip_target(t)) spec.a_v[t] = spec.a_u[t];
      }
      for (int t = 1; t <= L; ++t) spec.b[t] = 1.0;
      break;
    case ResourceKind::kFlops:
      for (int t = 1; t <= L; ++t) {
        spec.b[t] = static_cast<double>(net.spatial(t));
      }
      break;
    case ResourceKind::kTime: {
      std::vector<const TimingModel*> by_layer(L + 1, nullptr);
      for (const TimingModel& m : timing) {
        if (m.layer >= 1 && m.layer <= L) by_layer[m.layer] = &m;
      }
      for (int t = 1; t <= L; ++t) {
        if (by_layer[t] == nullptr) {
          throw Error(ErrorCode::kMissingTimingModel,
                      "no timing model for layer " + std::to_string(t));
        }
        const TimingModel active = ActiveTerms(*by_layer[t]);
        const TimingModel* m = &active;
        spec.constant += m->alpha;
        spec.a_u[t] += m->gamma;
        const double k2 = static_cast<double>(net.kernel(t)) * net.kernel(t);
        spec.b[t] = m->delta / k2;
        for (const Edge& e : net.edges_into(t)) {
          if (net.is_skip_target(e.source)) {
            spec.a_v[e.source] += m->beta;
          } else {
            spec.a_u[e.source] += m->beta;
          }
        }
      }
      break;
    }
  }
  return spec;
}

double Usage(const NetworkSpec& net, const PruningSolution& sol,
             const ResourceSpec& spec) {
  ValidateSolutionShape(net, sol);
  double total = 0.0;
  for (int t = 0; t <= net.num_layers(); ++t) {
    total += spec.a_u[t] * static_cast<double>(CountOnes(sol.u[t]));
    if (net.is_skip_target(t)) {
      total += spec.a_v[t] * static_cast<double>(CountOnes(sol.v[t]));
    }
    if (t > 0) total += spec.b[t] * static_cast<double>(MaskNorm(net, sol, t));
  }
  return total;
}

double UsageFromMasks(const NetworkSpec& net, const PruningSolution& sol,
                      const ResourceSpec& spec) {
  ValidateSolutionShape(net, sol);
  double total = 0.0;
  for (int t = 0; t <= net.num_layers(); ++t) {
    long long u = 0;
    for (auto bit : sol.u[t]) u += bit;
    total += spec.a_u[t] * static_cast<double>(u);
    if (net.is_skip_target(t)) {
      long long v = 0;
      for (auto bit : sol.v[t]) v += bit;
      total += spec.a_v[t] * static_cast<double>(v);
    }
    if (t == 0) continue;
    const Tensor4<std::uint8_t> mask = MaterializeMask(net, sol, t);
    long long kept = 0;
    for (auto bit : mask.data()) kept += bit;
    total += spec.b[t] * static_cast<double>(kept);
  }
  return total;
}

PruningSolution MinimalSolution(const NetworkSpec& net, PruneMode mode,
                                Scheme scheme) {
  const int L = net.num_layers();
  std::vector<std::vector<std::uint8_t>> u(L + 1), v(L + 1);
  u[0].assign(net.channels(0), net.prune_input_channels() ? 0 : 1);
  u[0][0] = 1;
  v[0] = u[0];
  for (int t = 1; t <= L; ++t) {
    const int c = net.channels(t);
    u[t].assign(c, 0);
    const SkipAddition* skip = net.skip_into(t);
    if (scheme == Scheme::kGbn && skip != nullptr &&
        skip->kind != SkipKind::kConv1x1) {
      const auto& vs = v[skip->s];
      for (int j = 0; j < static_cast<int>(vs.size()); ++j) u[t][j] = vs[j];
    } else {
      u[t][0] = 1;
    }
    v[t] = u[t];
  }
  PruningSolution sol =
      PruningSolution::FromChannels(net, mode, std::move(u), std::move(v));
  if (mode == PruneMode::kChannelSpatial) {
    for (int t = 1; t <= L; ++t) {
      const int kk = net.kernel(t) * net.kernel(t);
      for (auto& cols : sol.q[t]) {
        for (int j = 0; j < net.channels(t); ++j) {
          for (int c = 1; c < kk; ++c) {
            cols[static_cast<std::size_t>(j) * kk + c] = 0;
          }
        }
      }
    }
  }
  return sol;
}

double MinFeasibleUsage(const NetworkSpec& net, const ResourceSpec& spec,
                        PruneMode mode, Scheme scheme) {
  return Usage(net, MinimalSolution(net, mode, scheme), spec);
}

double FullUsage(const NetworkSpec& net, const ResourceSpec& spec) {
  return Usage(net, PruningSolution::AllOnes(net, PruneMode::kChannel), spec);
}

ResourceReport MakeReport(const NetworkSpec& net, const PruningSolution& sol,
                          const ResourceSpec& spec) {
  ValidateSolutionShape(net, sol);
  ResourceReport report;
  report.kind = spec.kind;
  for (int t = 0; t <= net.num_layers(); ++t) {
    ResourceRow row;
    row.t = t;
    row.a_u = spec.a_u[t];
    row.a_v = net.is_skip_target(t) ? spec.a_v[t] : 0.0;
    row.b = spec.b[t];
    row.u_count = CountOnes(sol.u[t]);
    row.v_count = CountOnes(sol.v[t]);
    row.mask_norm = t > 0 ? MaskNorm(net, sol, t) : 0;
    row.contribution = row.a_u * static_cast<double>(row.u_count) +
                       row.b * static_cast<double>(row.mask_norm);
    if (net.is_skip_target(t)) {
      row.contribution += row.a_v * static_cast<double>(row.v_count);
    }
    report.usage += row.contribution;
    report.rows.push_back(row);
  }
  report.constant = spec.constant;
  report.total = report.usage + report.constant;
  report.budget = spec.budget;
  report.slack = report.budget - report.total;
  return report;
}

}  // namespace prunesolve
