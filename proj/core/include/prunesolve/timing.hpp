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

#ifndef PRUNESOLVE_TIMING_HPP_
#define PRUNESOLVE_TIMING_HPP_

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "prunesolve/model.hpp"

namespace prunesolve {

struct TimingSample {
  int n_in = 0;
  int n_out = 0;
  double wall_clock_ms = 0.0;
};

// Family terms, in coefficient order (alpha, beta, gamma, delta):
//   M1 delta*n_in*n_out
//   M2 alpha + delta*n_in*n_out
//   M3 alpha + beta*n_in + gamma*n_out
//   M4 alpha + gamma*n_out + delta*n_in*n_out
//   M5 alpha + beta*n_in + delta*n_in*n_out
//   M6 alpha + beta*n_in + gamma*n_out + delta*n_in*n_out
enum class TimingFamily { kM1, kM2, kM3, kM4, kM5, kM6 };

inline constexpr TimingFamily kAllFamilies[] = {
    TimingFamily::kM1, TimingFamily::kM2, TimingFamily::kM3,
    TimingFamily::kM4, TimingFamily::kM5, TimingFamily::kM6};

std::string_view ToString(TimingFamily family);
TimingFamily ParseTimingFamily(std::string_view text);

// Which of (alpha, beta, gamma, delta) the family uses.
std::array<bool, 4> FamilyTerms(TimingFamily family);

struct TimingModel {
  int layer = 0;
  TimingFamily family = TimingFamily::kM5;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  double mpe = 0.0;
  double r_squared = 0.0;
  // max_k |x_k^T r| / (||x_k|| ||y||) over the design columns of the fit.
  double orthogonality = 0.0;
};

// Copy of `model` with the coefficients outside its family set to zero.
TimingModel ActiveTerms(const TimingModel& model);

struct FitMetrics {
  double mpe = 0.0;
  double r_squared = 0.0;
};

// Least-squares fit of one family. Throws TooFewSamples / RankDeficient.
TimingModel FitModel(std::span<const TimingSample> samples,
                     TimingFamily family, int layer = 0);

FitMetrics ModelMetrics(const TimingModel& model,
                        std::span<const TimingSample> samples);

double EstimateLayer(const TimingModel& model, double n_in, double n_out);

struct NetworkEstimate {
  double total_ms = 0.0;
  std::vector<double> per_layer_ms;  // index = layer - 1
};

// Throws MissingTimingModel unless `models` covers layers 1..L. Lookup is by
// TimingModel::layer.
NetworkEstimate EstimateNetwork(std::span<const TimingModel> models,
                                const NetworkSpec& net,
                                const PruningSolution& sol);

// n_in of layer t: active input channels summed over every source slice.
long long LayerInputCount(const NetworkSpec& net, const PruningSolution& sol,
                          int t);

struct LayerGeometry {
  int kernel = 3;
  int stride = 1;
  int h_in = 32;
  int w_in = 32;

  // k^2 H_in W_in / s^2.
  double units() const {
    return static_cast<double>(kernel) * kernel * h_in * w_in /
           (static_cast<double>(stride) * stride);
  }
};

// Ground-truth M6 law. beta, gamma and delta scale with LayerGeometry::units.
struct CoefficientLaw {
  double alpha = 0.02;
  double beta_per_unit = 1.949e-8;
  double gamma_per_unit = 2.0e-9;
  double delta_per_unit = 2.196e-10;
};

struct SampleGrid {
  int step = 16;   // channel counts are step * x
  int count = 10;  // x, y in 1..count
};

TimingModel GroundTruthModel(const LayerGeometry& geometry,
                             const CoefficientLaw& law, int layer = 0);

// Deterministic for a given seed; noise is multiplicative Gaussian with the
// given relative standard deviation.
std::vector<TimingSample> SynthSamples(const LayerGeometry& geometry,
                                       const CoefficientLaw& law, double noise,
                                       std::uint64_t seed,
                                       const SampleGrid& grid = {});

}  // namespace prunesolve

#endif  // PRUNESOLVE_TIMING_HPP_
