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

#ifndef PRUNESOLVE_MODEL_HPP_
#define PRUNESOLVE_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace prunesolve {

enum class SkipKind { kIdentity, kZeroPad, kConv1x1 };
enum class PruneMode { kChannel, kChannelSpatial };

std::string_view ToString(SkipKind kind);
std::string_view ToString(PruneMode mode);
SkipKind ParseSkipKind(std::string_view text);
PruneMode ParsePruneMode(std::string_view text);

struct LayerSpec {
  int id = 0;  // 1-based
  int c_in = 0;
  int c_out = 0;
  int kernel = 1;
  int stride = 1;
  int h_in = 1;
  int w_in = 1;
  int h_out = 1;
  int w_out = 1;
  std::optional<int> padding;
};

// V^(s) (the input of layer s+1) is added onto U^(t), forming V^(t).
struct SkipAddition {
  int s = 0;
  int t = 0;
  SkipKind kind = SkipKind::kIdentity;
};

// Feature map p is concatenated onto the input of layer q. The pairwise
// kernel defaults to layer q's kernel; any other value is rejected.
struct SkipConcat {
  int p = 0;
  int q = 0;
  std::optional<int> kernel;
};

// One convolution operand: the slice of layer `target`'s input channels that
// comes from feature map `source`. Sequential layers have exactly one edge.
struct Edge {
  int source = 0;
  int target = 0;
  int slot = 0;        // position among the target's sources
  int row_offset = 0;  // first input-channel row of the slice
  int rows = 0;        // C_source
};

// Validated, immutable description of the network graph. Feature maps are
// indexed t = 0..L where t = 0 is the network input.
class NetworkSpec {
 public:
  NetworkSpec(int input_channels, std::vector<LayerSpec> layers,
              std::vector<SkipAddition> skip_additions = {},
              std::vector<SkipConcat> skip_concats = {},
              bool prune_input_channels = false);

  int num_layers() const { return static_cast<int>(layers_.size()); }
  int input_channels() const { return input_channels_; }
  bool prune_input_channels() const { return prune_input_channels_; }

  // 1-based.
  const LayerSpec& layer(int t) const { return layers_[t - 1]; }
  std::span<const LayerSpec> layers() const { return layers_; }
  std::span<const SkipAddition> skip_additions() const { return skips_; }
  std::span<const SkipConcat> skip_concats() const { return concats_; }

  int channels(int t) const;      // C_t
  long long spatial(int t) const;  // H_t * W_t of feature map t
  int kernel(int t) const { return layer(t).kernel; }
  int columns(int t) const;       // C_t * K_t * K_t

  bool is_skip_target(int t) const { return skip_into_[t] >= 0; }
  const SkipAddition* skip_into(int t) const;
  std::span<const int> skip_targets() const { return skip_targets_; }
  std::span<const SkipAddition> skips_from(int s) const;

  std::span<const Edge> edges() const { return edges_; }
  std::span<const Edge> edges_into(int t) const;
  // Edges that read feature map p, in target order.
  std::vector<Edge> edges_from(int p) const;
  int input_rows(int t) const { return layer(t).c_in; }

  bool is_sequential() const { return skips_.empty() && concats_.empty(); }

 private:
  void Validate();

  int input_channels_;
  bool prune_input_channels_;
  std::vector<LayerSpec> layers_;
  std::vector<SkipAddition> skips_;
  std::vector<SkipConcat> concats_;
  std::vector<int> skip_into_;     // index into skips_ per feature, or -1
  std::vector<int> skip_targets_;  // T, ascending
  std::vector<std::vector<SkipAddition>> skips_from_;
  std::vector<Edge> edges_;
  std::vector<int> edge_begin_;  // per layer, index into edges_
};

struct Shape4 {
  int d0 = 0, d1 = 0, d2 = 0, d3 = 0;
  std::size_t size() const {
    return static_cast<std::size_t>(d0) * d1 * d2 * d3;
  }
  friend bool operator==(const Shape4&, const Shape4&) = default;
};

std::string ToString(const Shape4& shape);

// Dense row-major (i, j, a, b) tensor.
template <typename T>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Shape4 shape, T fill = T{})
      : shape_(shape), data_(shape.size(), fill) {}
  Tensor4(Shape4 shape, std::vector<T> data);

  const Shape4& shape() const { return shape_; }
  std::size_t index(int i, int j, int a, int b) const {
    return ((static_cast<std::size_t>(i) * shape_.d1 + j) * shape_.d2 + a) *
               shape_.d3 +
           b;
  }
  T& at(int i, int j, int a, int b) { return data_[index(i, j, a, b)]; }
  const T& at(int i, int j, int a, int b) const {
    return data_[index(i, j, a, b)];
  }
  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

 private:
  Shape4 shape_;
  std::vector<T> data_;
};

// Row-major matrix, rows = input channels, cols = output channels.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  double operator()(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
  double& operator()(int i, int j) {
    return data[static_cast<std::size_t>(i) * cols + j];
  }
};

struct ImportanceTensor {
  int layer = 0;
  Tensor4<double> values;
  double gamma = 1.0;
  bool zero_norm_warning = false;
};

using ImportanceSet = std::vector<ImportanceTensor>;  // index = layer - 1

struct FilterImportance {
  int layer = 0;
  Matrix values;
};

enum class Normalization { kNone, kL2 };

ImportanceTensor ImportanceFromWeights(const Tensor4<double>& weights,
                                       Normalization normalization,
                                       int layer = 0);

// F_{i,j} = sum_{a,b} I_{i,j,a,b}.
FilterImportance ComputeFilterImportance(const ImportanceTensor& importance);

// Throws ShapeMismatch unless there is one tensor per layer with shape
// c_in x c_out x K x K, Validation on negative or non-finite values.
void ValidateImportance(const NetworkSpec& net, const ImportanceSet& importance);

// Binary activations. u and v hold one vector per feature map t = 0..L;
// v[t] is the input-side activation read by every consumer of feature t.
// q[t][slot] is the flat (j, a, b) shape-column activation of edge `slot`
// into layer t (q[0] is empty).
struct PruningSolution {
  PruneMode mode = PruneMode::kChannel;
  std::vector<std::vector<std::uint8_t>> u;
  std::vector<std::vector<std::uint8_t>> v;
  std::vector<std::vector<std::vector<std::uint8_t>>> q;

  static PruningSolution AllOnes(const NetworkSpec& net, PruneMode mode);
  // v copied from u where no skip lands, q pinned to u.
  static PruningSolution FromChannels(const NetworkSpec& net, PruneMode mode,
                                      std::vector<std::vector<std::uint8_t>> u,
                                      std::vector<std::vector<std::uint8_t>> v);

  friend bool operator==(const PruningSolution&,
                         const PruningSolution&) = default;
};

// ShapeMismatch unless every vector has the network's dimensions.
void ValidateSolutionShape(const NetworkSpec& net, const PruningSolution& sol);

long long CountOnes(std::span<const std::uint8_t> bits);

// q[t][slot]_{j,a,b} = u[t]_j for every edge.
void PinShapeColumns(const NetworkSpec& net, PruningSolution& sol);

// ||A^(t)||_1 from the closed form sum_slots ||v^(src)||_1 * ||q^(t,slot)||_1.
long long MaskNorm(const NetworkSpec& net, const PruningSolution& sol, int t);

// A^(t) materialised over the layer's full c_in x c_out x K x K shape.
Tensor4<std::uint8_t> MaterializeMask(const NetworkSpec& net,
                                      const PruningSolution& sol, int t);

struct MaskView {
  int layer = 0;
  Tensor4<std::uint8_t> mask;
  long long norm = 0;
};

MaskView ViewMask(const NetworkSpec& net, const PruningSolution& sol, int t);

// sum_t sum_{i,j,a,b} I_{i,j,a,b} v_i q_{j,a,b}.
double ObjectiveValue(const NetworkSpec& net, const ImportanceSet& importance,
                      const PruningSolution& sol);

// Channel-only route: sum_t sum_slots v^(src)^T F^(t)[slice] u^(t).
double ObjectiveFromFilters(const NetworkSpec& net,
                            std::span<const FilterImportance> filters,
                            const PruningSolution& sol);

}  // namespace prunesolve

#endif  // PRUNESOLVE_MODEL_HPP_
