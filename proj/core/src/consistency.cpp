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

#include "prunesolve/consistency.hpp"

#include <string>

#include "prunesolve/error.hpp"

namespace prunesolve {
namespace {

void CheckMasks(const NetworkSpec& net, const MaskSet& masks) {
  if (static_cast<int>(masks.size()) != net.num_layers()) {
    throw Error(ErrorCode::kShapeMismatch,
                "expected " + std::to_string(net.num_layers()) + " masks");
  }
  for (int t = 1; t <= net.num_layers(); ++t) {
    const LayerSpec& l = net.layer(t);
    if (masks[t - 1].shape() != Shape4{l.c_in, l.c_out, l.kernel, l.kernel}) {
      throw Error(ErrorCode::kShapeMismatch,
                  "mask of layer " + std::to_string(t) + " has shape " +
                      ToString(masks[t - 1].shape()));
    }
  }
}

bool AnyKept(const Tensor4<std::uint8_t>& mask, int i, int j) {
  const Shape4& s = mask.shape();
  for (int a = 0; a < s.d2; ++a) {
    for (int b = 0; b < s.d3; ++b) {
      if (mask.at(i, j, a, b)) return true;
    }
  }
  return false;
}

ChannelFlags EmptyFlags(const NetworkSpec& net) {
  ChannelFlags flags;
  for (int t = 0; t <= net.num_layers(); ++t) {
    flags.u.emplace_back(net.channels(t), 0);
    flags.v.emplace_back(net.channels(t), 0);
  }
  return flags;
}

}  // namespace

MaskSet MasksFromSolution(const NetworkSpec& net, const PruningSolution& sol) {
  ValidateSolutionShape(net, sol);
  MaskSet masks;
  for (int t = 1; t <= net.num_layers(); ++t) {
    masks.push_back(MaterializeMask(net, sol, t));
  }
  return masks;
}

ChannelFlags PropagateTriviallyZero(const NetworkSpec& net,
                                    const MaskSet& masks) {
  CheckMasks(net, masks);
  ChannelFlags zero = EmptyFlags(net);
  for (int t = 1; t <= net.num_layers(); ++t) {
    const auto& mask = masks[t - 1];
    for (int j = 0; j < net.channels(t); ++j) {
      bool dead = true;
      for (const Edge& e : net.edges_into(t)) {
        for (int i = 0; i < e.rows && dead; ++i) {
          if (!zero.v[e.source][i] && AnyKept(mask, e.row_offset + i, j)) {
            dead = false;
          }
        }
      }
      zero.u[t][j] = dead;
    }
    const SkipAddition* skip = net.skip_into(t);
    for (int j = 0; j < net.channels(t); ++j) {
      bool dead = zero.u[t][j];
      if (skip != nullptr) {
        if (skip->kind == SkipKind::kConv1x1) {
          dead = false;
        } else if (j < net.channels(skip->s)) {
          dead = dead && zero.v[skip->s][j];
        }
      }
      zero.v[t][j] = dead;
    }
  }
  return zero;
}

ChannelFlags PropagateMeaningless(const NetworkSpec& net,
                                  const MaskSet& masks) {
  CheckMasks(net, masks);
  const int L = net.num_layers();
  ChannelFlags lost = EmptyFlags(net);
  for (int t = L - 1; t >= 0; --t) {
    const std::vector<Edge> consumers = net.edges_from(t);
    const auto skips = net.skips_from(t);
    for (int i = 0; i < net.channels(t); ++i) {
      bool useless = true;
      for (const Edge& e : consumers) {
        const auto& mask = masks[e.target - 1];
        for (int j = 0; j < net.channels(e.target) && useless; ++j) {
          if (!lost.u[e.target][j] && AnyKept(mask, e.row_offset + i, j)) {
            useless = false;
          }
        }
        if (!useless) break;
      }
      for (const SkipAddition& skip : skips) {
        if (!useless) break;
        if (skip.kind == SkipKind::kConv1x1) {
          for (auto flag : lost.v[skip.t]) {
            if (!flag) useless = false;
          }
        } else if (!lost.v[skip.t][i]) {
          useless = false;
        }
      }
      lost.v[t][i] = useless;
      lost.u[t][i] = useless;
    }
  }
  return lost;
}

ActivityReport FindInactiveWeights(const NetworkSpec& net,
                                   const MaskSet& masks) {
  ActivityReport report;
  report.trivially_zero = PropagateTriviallyZero(net, masks);
  report.meaningless = PropagateMeaningless(net, masks);
  for (int t = 1; t <= net.num_layers(); ++t) {
    const auto& mask = masks[t - 1];
    const int k = net.kernel(t);
    for (const Edge& e : net.edges_into(t)) {
      for (int i = 0; i < e.rows; ++i) {
        const bool dead_in = report.trivially_zero.v[e.source][i];
        const int row = e.row_offset + i;
        for (int j = 0; j < net.channels(t); ++j) {
          const bool dead_out = report.meaningless.u[t][j];
          for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
              if (!mask.at(row, j, a, b)) continue;
              ++report.unpruned;
              if (dead_in || dead_out) {
                report.inactive.push_back(WeightCoord{t, row, j, a, b});
              }
            }
          }
        }
      }
    }
  }
  return report;
}

double ActiveObjective(const NetworkSpec& net, const ImportanceSet& importance,
                       const MaskSet& masks, const ActivityReport& report) {
  CheckMasks(net, masks);
  double total = 0.0;
  for (int t = 1; t <= net.num_layers(); ++t) {
    const auto& mask = masks[t - 1];
    const auto& values = importance.at(t - 1).values;
    const int k = net.kernel(t);
    for (const Edge& e : net.edges_into(t)) {
      for (int i = 0; i < e.rows; ++i) {
        if (report.trivially_zero.v[e.source][i]) continue;
        const int row = e.row_offset + i;
        for (int j = 0; j < net.channels(t); ++j) {
          if (report.meaningless.u[t][j]) continue;
          for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) {
              if (mask.at(row, j, a, b)) total += values.at(row, j, a, b);
            }
          }
        }
      }
    }
  }
  return total;
}

}  // namespace prunesolve
