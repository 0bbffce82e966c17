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

#include "prunesolve/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "prunesolve/error.hpp"

namespace prunesolve {
namespace {

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kValidation, message);
}

std::string LayerTag(int id) { return "layer " + std::to_string(id) + ": "; }

int ExpectedOutput(int in, int padding, int kernel, int stride) {
  const int span = in + 2 * padding - kernel + 1;
  if (span <= 0) return 0;
  return (span + stride - 1) / stride;
}

}  // namespace

std::string_view ToString(SkipKind kind) {
  switch (kind) {
    case SkipKind::kIdentity: return "identity";
    case SkipKind::kZeroPad: return "zero_pad";
    case SkipKind::kConv1x1: return "conv1x1";
  }
  return "identity";
}

std::string_view ToString(PruneMode mode) {
  return mode == PruneMode::kChannel ? "channel" : "channel_spatial";
}

SkipKind ParseSkipKind(std::string_view text) {
  if (text == "identity") return SkipKind::kIdentity;
  if (text == "zero_pad") return SkipKind::kZeroPad;
  if (text == "conv1x1") return SkipKind::kConv1x1;
  throw Error(ErrorCode::kParse, "unknown skip kind '" + std::string(text) + "'");
}

PruneMode ParsePruneMode(std::string_view text) {
  if (text == "channel") return PruneMode::kChannel;
  if (text == "channel_spatial" || text == "channel-spatial") {
    return PruneMode::kChannelSpatial;
  }
  throw Error(ErrorCode::kParse, "unknown mode '" + std::string(text) + "'");
}

std::string ToString(const Shape4& shape) {
  return std::to_string(shape.d0) + "x" + std::to_string(shape.d1) + "x" +
         std::to_string(shape.d2) + "x" + std::to_string(shape.d3);
}

template <typename T>
Tensor4<T>::Tensor4(Shape4 shape, std::vector<T> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw Error(ErrorCode::kShapeMismatch,
                "tensor data has " + std::to_string(data_.size()) +
                    " entries, shape " + ToString(shape_) + " needs " +
                    std::to_string(shape_.size()));
  }
}

template class Tensor4<double>;
template class Tensor4<std::uint8_t>;

NetworkSpec::NetworkSpec(int input_channels, std::vector<LayerSpec> layers,
                         std::vector<SkipAddition> skip_additions,
                         std::vector<SkipConcat> skip_concats,
                         bool prune_input_channels)
    : input_channels_(input_channels),
      prune_input_channels_(prune_input_channels),
      layers_(std::move(layers)),
      skips_(std::move(skip_additions)),
      concats_(std::move(skip_concats)) {
  Validate();
}

void NetworkSpec::Validate() {
  if (layers_.empty()) Invalid("network has an empty layer list");
  if (input_channels_ < 1) Invalid("input_channels must be >= 1");
  const int L = num_layers();

  for (int t = 1; t <= L; ++t) {
    const LayerSpec& l = layers_[t - 1];
    const std::string tag = LayerTag(l.id);
    if (l.id != t) {
      Invalid(tag + "layer ids must be 1..L in order (expected " +
              std::to_string(t) + ")");
    }
    if (l.c_in < 1) Invalid(tag + "c_in must be >= 1");
    if (l.c_out < 1) Invalid(tag + "c_out must be >= 1");
    if (l.kernel < 1) Invalid(tag + "kernel must be >= 1");
    if (l.stride < 1) Invalid(tag + "stride must be >= 1");
    if (l.h_in < 1 || l.w_in < 1 || l.h_out < 1 || l.w_out < 1) {
      Invalid(tag + "feature-map dimensions must be positive");
    }
    if (l.padding) {
      if (*l.padding < 0) Invalid(tag + "padding must be >= 0");
      const int h = ExpectedOutput(l.h_in, *l.padding, l.kernel, l.stride);
      const int w = ExpectedOutput(l.w_in, *l.padding, l.kernel, l.stride);
      if (h != l.h_out || w != l.w_out) {
        Invalid(tag + "h_out/w_out disagree with padding " +
                std::to_string(*l.padding) + " (expected " + std::to_string(h) +
                "x" + std::to_string(w) + ")");
      }
    }
  }

  skip_into_.assign(L + 1, -1);
  skips_from_.assign(L + 1, {});
  for (std::size_t k = 0; k < skips_.size(); ++k) {
    const SkipAddition& e = skips_[k];
    const std::string tag = LayerTag(e.t);
    if (e.t < 1 || e.t > L) Invalid(tag + "skip addition target out of range");
    if (e.s < 0 || e.s >= e.t) {
      Invalid(tag + "skip addition requires 0 <= s < t (s=" +
              std::to_string(e.s) + ")");
    }
    if (skip_into_[e.t] >= 0) {
      Invalid(tag + "layer is the target of more than one skip addition");
    }
    const int cs = channels(e.s);
    const int ct = channels(e.t);
    if (e.kind == SkipKind::kIdentity && cs != ct) {
      Invalid(tag + "identity skip from " + std::to_string(e.s) +
              " needs C_s == C_t (" + std::to_string(cs) +
              " != " + std::to_string(ct) + ")");
    }
    if (e.kind != SkipKind::kIdentity && cs >= ct) {
      Invalid(tag + std::string(ToString(e.kind)) + " skip from " +
              std::to_string(e.s) + " needs C_s < C_t (" + std::to_string(cs) +
              " >= " + std::to_string(ct) + ")");
    }
    skip_into_[e.t] = static_cast<int>(k);
    skips_from_[e.s].push_back(e);
  }
  for (int t = 1; t <= L; ++t) {
    if (skip_into_[t] >= 0) skip_targets_.push_back(t);
  }

  std::vector<std::set<int>> sources(L + 1);
  for (int t = 1; t <= L; ++t) sources[t].insert(t - 1);
  for (const SkipConcat& c : concats_) {
    const std::string tag = LayerTag(c.q);
    if (c.q < 1 || c.q > L) Invalid(tag + "skip concat target out of range");
    if (c.p < 0 || c.p >= c.q) Invalid(tag + "skip concat requires p < q");
    if (c.p == c.q - 1) {
      Invalid(tag + "skip concat from the immediate predecessor is redundant");
    }
    if (!sources[c.q].insert(c.p).second) {
      Invalid(tag + "duplicate skip concat from " + std::to_string(c.p));
    }
    if (c.kernel && *c.kernel != layers_[c.q - 1].kernel) {
      Invalid(tag + "pairwise kernel " + std::to_string(*c.kernel) +
              " differs from the layer kernel " +
              std::to_string(layers_[c.q - 1].kernel));
    }
  }

  edge_begin_.assign(L + 2, 0);
  for (int t = 1; t <= L; ++t) {
    edge_begin_[t] = static_cast<int>(edges_.size());
    int offset = 0;
    int slot = 0;
    for (int p : sources[t]) {
      edges_.push_back(Edge{p, t, slot++, offset, channels(p)});
      offset += channels(p);
    }
    if (offset != layers_[t - 1].c_in) {
      if (sources[t].size() == 1) {
        Invalid(LayerTag(t) + "c_in " + std::to_string(layers_[t - 1].c_in) +
                " does not match C_" + std::to_string(t - 1) + " = " +
                std::to_string(offset));
      }
      Invalid(LayerTag(t) + "concat target c_in " +
              std::to_string(layers_[t - 1].c_in) +
              " does not equal the sum of source channels " +
              std::to_string(offset));
    }
  }
  edge_begin_[L + 1] = static_cast<int>(edges_.size());
}

int NetworkSpec::channels(int t) const {
  return t == 0 ? input_channels_ : layers_[t - 1].c_out;
}

long long NetworkSpec::spatial(int t) const {
  if (t == 0) {
    return static_cast<long long>(layers_[0].h_in) * layers_[0].w_in;
  }
  return static_cast<long long>(layers_[t - 1].h_out) * layers_[t - 1].w_out;
}

int NetworkSpec::columns(int t) const {
  const LayerSpec& l = layer(t);
  return l.c_out * l.kernel * l.kernel;
}

const SkipAddition* NetworkSpec::skip_into(int t) const {
  return skip_into_[t] >= 0 ? &skips_[skip_into_[t]] : nullptr;
}

std::span<const SkipAddition> NetworkSpec::skips_from(int s) const {
  return skips_from_[s];
}

std::span<const Edge> NetworkSpec::edges_into(int t) const {
  return std::span<const Edge>(edges_).subspan(
      edge_begin_[t], edge_begin_[t + 1] - edge_begin_[t]);
}

std::vector<Edge> NetworkSpec::edges_from(int p) const {
  std::vector<Edge> out;
  for (const Edge& e : edges_) {
    if (e.source == p) out.push_back(e);
  }
  return out;
}

ImportanceTensor ImportanceFromWeights(const Tensor4<double>& weights,
                                       Normalization normalization,
                                       int layer) {
  ImportanceTensor out;
  out.layer = layer;
  double norm_sq = 0.0;
  for (double w : weights.data()) norm_sq += w * w;
  if (normalization == Normalization::kL2 && norm_sq > 0.0) {
    out.gamma = 1.0 / std::sqrt(norm_sq);
  }
  out.zero_norm_warning = norm_sq == 0.0;
  std::vector<double> values(weights.data().begin(), weights.data().end());
  for (double& x : values) x = out.gamma * std::abs(x);
  out.values = Tensor4<double>(weights.shape(), std::move(values));
  return out;
}

FilterImportance ComputeFilterImportance(const ImportanceTensor& importance) {
  const Shape4& s = importance.values.shape();
  FilterImportance out;
  out.layer = importance.layer;
  out.values = Matrix{s.d0, s.d1, std::vector<double>(
                                      static_cast<std::size_t>(s.d0) * s.d1)};
  for (int i = 0; i < s.d0; ++i) {
    for (int j = 0; j < s.d1; ++j) {
      double sum = 0.0;
      for (int a = 0; a < s.d2; ++a) {
        for (int b = 0; b < s.d3; ++b) sum += importance.values.at(i, j, a, b);
      }
      out.values(i, j) = sum;
    }
  }
  return out;
}

void ValidateImportance(const NetworkSpec& net,
                        const ImportanceSet& importance) {
  if (static_cast<int>(importance.size()) != net.num_layers()) {
    throw Error(ErrorCode::kShapeMismatch,
                "expected " + std::to_string(net.num_layers()) +
                    " importance tensors, got " +
                    std::to_string(importance.size()));
  }
  for (int t = 1; t <= net.num_layers(); ++t) {
    const LayerSpec& l = net.layer(t);
    const Shape4 want{l.c_in, l.c_out, l.kernel, l.kernel};
    const ImportanceTensor& it = importance[t - 1];
    if (it.values.shape() != want) {
      throw Error(ErrorCode::kShapeMismatch,
                  LayerTag(t) + "importance shape " +
                      ToString(it.values.shape()) + ", expected " +
                      ToString(want));
    }
    for (double x : it.values.data()) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw Error(ErrorCode::kValidation,
                    LayerTag(t) + "importance values must be finite and >= 0");
      }
    }
  }
}

PruningSolution PruningSolution::AllOnes(const NetworkSpec& net,
                                         PruneMode mode) {
  std::vector<std::vector<std::uint8_t>> u(net.num_layers() + 1);
  for (int t = 0; t <= net.num_layers(); ++t) u[t].assign(net.channels(t), 1);
  auto v = u;
  return FromChannels(net, mode, std::move(u), std::move(v));
}

PruningSolution PruningSolution::FromChannels(
    const NetworkSpec& net, PruneMode mode,
    std::vector<std::vector<std::uint8_t>> u,
    std::vector<std::vector<std::uint8_t>> v) {
  PruningSolution sol;
  sol.mode = mode;
  sol.u = std::move(u);
  sol.v = std::move(v);
  sol.v.resize(net.num_layers() + 1);
  for (int t = 0; t <= net.num_layers(); ++t) {
    if (!net.is_skip_target(t)) sol.v[t] = sol.u[t];
  }
  PinShapeColumns(net, sol);
  return sol;
}

void PinShapeColumns(const NetworkSpec& net, PruningSolution& sol) {
  const int L = net.num_layers();
  sol.q.assign(L + 1, {});
  for (int t = 1; t <= L; ++t) {
    const int kk = net.kernel(t) * net.kernel(t);
    for (std::size_t slot = 0; slot < net.edges_into(t).size(); ++slot) {
      std::vector<std::uint8_t> cols(static_cast<std::size_t>(net.columns(t)));
      for (int j = 0; j < net.channels(t); ++j) {
        std::fill_n(cols.begin() + static_cast<std::ptrdiff_t>(j) * kk, kk,
                    sol.u[t][j]);
      }
      sol.q[t].push_back(std::move(cols));
    }
  }
}

void ValidateSolutionShape(const NetworkSpec& net, const PruningSolution& sol) {
  const int L = net.num_layers();
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kShapeMismatch, what);
  };
  if (static_cast<int>(sol.u.size()) != L + 1 ||
      static_cast<int>(sol.v.size()) != L + 1 ||
      static_cast<int>(sol.q.size()) != L + 1) {
    fail("solution must hold u, v, q for feature maps 0.." + std::to_string(L));
  }
  for (int t = 0; t <= L; ++t) {
    if (static_cast<int>(sol.u[t].size()) != net.channels(t) ||
        static_cast<int>(sol.v[t].size()) != net.channels(t)) {
      fail("u/v of feature map " + std::to_string(t) + " must have " +
           std::to_string(net.channels(t)) + " entries");
    }
    for (auto bit : sol.u[t]) {
      if (bit > 1) fail("u/v entries must be 0 or 1");
    }
    for (auto bit : sol.v[t]) {
      if (bit > 1) fail("u/v entries must be 0 or 1");
    }
    if (t == 0) continue;
    if (sol.q[t].size() != net.edges_into(t).size()) {
      fail(LayerTag(t) + "expected " +
           std::to_string(net.edges_into(t).size()) + " shape-column vectors");
    }
    for (const auto& cols : sol.q[t]) {
      if (static_cast<int>(cols.size()) != net.columns(t)) {
        fail(LayerTag(t) + "q must have C*K*K = " +
             std::to_string(net.columns(t)) + " entries");
      }
      for (auto bit : cols) {
        if (bit > 1) fail("q entries must be 0 or 1");
      }
    }
  }
}

long long CountOnes(std::span<const std::uint8_t> bits) {
  return std::accumulate(bits.begin(), bits.end(), 0LL);
}

long long MaskNorm(const NetworkSpec& net, const PruningSolution& sol, int t) {
  long long norm = 0;
  for (const Edge& e : net.edges_into(t)) {
    norm += CountOnes(sol.v[e.source]) * CountOnes(sol.q[t][e.slot]);
  }
  return norm;
}

Tensor4<std::uint8_t> MaterializeMask(const NetworkSpec& net,
                                      const PruningSolution& sol, int t) {
  const LayerSpec& l = net.layer(t);
  Tensor4<std::uint8_t> mask(Shape4{l.c_in, l.c_out, l.kernel, l.kernel});
  for (const Edge& e : net.edges_into(t)) {
    const auto& cols = sol.q[t][e.slot];
    for (int i = 0; i < e.rows; ++i) {
      if (!sol.v[e.source][i]) continue;
      for (int j = 0; j < l.c_out; ++j) {
        for (int a = 0; a < l.kernel; ++a) {
          for (int b = 0; b < l.kernel; ++b) {
            mask.at(e.row_offset + i, j, a, b) =
                cols[(static_cast<std::size_t>(j) * l.kernel + a) * l.kernel +
                     b];
          }
        }
      }
    }
  }
  return mask;
}

MaskView ViewMask(const NetworkSpec& net, const PruningSolution& sol, int t) {
  return MaskView{t, MaterializeMask(net, sol, t), MaskNorm(net, sol, t)};
}

double ObjectiveValue(const NetworkSpec& net, const ImportanceSet& importance,
                      const PruningSolution& sol) {
  ValidateSolutionShape(net, sol);
  double total = 0.0;
  for (int t = 1; t <= net.num_layers(); ++t) {
    const LayerSpec& l = net.layer(t);
    const Tensor4<double>& imp = importance.at(t - 1).values;
    if (imp.shape() != Shape4{l.c_in, l.c_out, l.kernel, l.kernel}) {
      throw Error(ErrorCode::kShapeMismatch,
                  LayerTag(t) + "importance shape " + ToString(imp.shape()));
    }
    for (const Edge& e : net.edges_into(t)) {
      const auto& cols = sol.q[t][e.slot];
      for (int i = 0; i < e.rows; ++i) {
        if (!sol.v[e.source][i]) continue;
        const int row = e.row_offset + i;
        for (int j = 0; j < l.c_out; ++j) {
          for (int a = 0; a < l.kernel; ++a) {
            for (int b = 0; b < l.kernel; ++b) {
              if (cols[(static_cast<std::size_t>(j) * l.kernel + a) *
                           l.kernel +
                       b]) {
                total += imp.at(row, j, a, b);
              }
            }
          }
        }
      }
    }
  }
  return total;
}

double ObjectiveFromFilters(const NetworkSpec& net,
                            std::span<const FilterImportance> filters,
                            const PruningSolution& sol) {
  double total = 0.0;
  for (int t = 1; t <= net.num_layers(); ++t) {
    const Matrix& f = filters[t - 1].values;
    for (const Edge& e : net.edges_into(t)) {
      for (int i = 0; i < e.rows; ++i) {
        if (!sol.v[e.source][i]) continue;
        for (int j = 0; j < f.cols; ++j) {
          if (sol.u[t][j]) total += f(e.row_offset + i, j);
        }
      }
    }
  }
  return total;
}

}  // namespace prunesolve
