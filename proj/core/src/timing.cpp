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

#include "prunesolve/timing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "log.hpp"
#include "prunesolve/error.hpp"

namespace prunesolve {
namespace {

// Column features in coefficient order (1, n_in, n_out, n_in * n_out).
std::array<double, 4> Features(double n_in, double n_out) {
  return {1.0, n_in, n_out, n_in * n_out};
}

double Predict(const TimingModel& model, double n_in, double n_out) {
  const TimingModel m = ActiveTerms(model);
  const auto f = Features(n_in, n_out);
  return m.alpha * f[0] + m.beta * f[1] + m.gamma * f[2] + m.delta * f[3];
}

// Box-Muller over a 64-bit Mersenne twister, identical on every platform
// (std::normal_distribution is implementation defined).
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : engine_(seed) {}

  double Next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = Uniform();
    } while (u1 <= 0.0);
    const double u2 = Uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace

std::string_view ToString(TimingFamily family) {
  switch (family) {
    case TimingFamily::kM1: return "M1";
    case TimingFamily::kM2: return "M2";
    case TimingFamily::kM3: return "M3";
    case TimingFamily::kM4: return "M4";
    case TimingFamily::kM5: return "M5";
    case TimingFamily::kM6: return "M6";
  }
  return "M5";
}

TimingFamily ParseTimingFamily(std::string_view text) {
  for (TimingFamily f : kAllFamilies) {
    if (ToString(f) == text) return f;
  }
  if (text.size() == 2 && text[0] == 'm') {
    return ParseTimingFamily(std::string("M") + text[1]);
  }
  throw Error(ErrorCode::kParse,
              "unknown timing family '" + std::string(text) + "'");
}

std::array<bool, 4> FamilyTerms(TimingFamily family) {
  switch (family) {
    case TimingFamily::kM1: return {false, false, false, true};
    case TimingFamily::kM2: return {true, false, false, true};
    case TimingFamily::kM3: return {true, true, true, false};
    case TimingFamily::kM4: return {true, false, true, true};
    case TimingFamily::kM5: return {true, true, false, true};
    case TimingFamily::kM6: return {true, true, true, true};
  }
  return {true, true, true, true};
}

TimingModel FitModel(std::span<const TimingSample> samples,
                     TimingFamily family, int layer) {
  const std::array<bool, 4> terms = FamilyTerms(family);
  std::vector<int> cols;
  for (int c = 0; c < 4; ++c) {
    if (terms[c]) cols.push_back(c);
  }
  const int k = static_cast<int>(cols.size());
  const int n = static_cast<int>(samples.size());
  if (n < k) {
    throw Error(ErrorCode::kTooFewSamples,
                std::string(ToString(family)) + " needs at least " +
                    std::to_string(k) + " samples, got " + std::to_string(n));
  }

  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const auto f = Features(samples[i].n_in, samples[i].n_out);
    for (int c = 0; c < k; ++c) x(i, c) = f[cols[c]];
    y(i) = samples[i].wall_clock_ms;
  }
  // Unit-norm columns keep the rank test scale free.
  Eigen::VectorXd scale(k);
  for (int c = 0; c < k; ++c) {
    scale(c) = x.col(c).norm();
    if (scale(c) == 0.0) {
      throw Error(ErrorCode::kRankDeficient,
                  std::string(ToString(family)) + " design column " +
                      std::to_string(c) + " is zero");
    }
  }
  const Eigen::MatrixXd xs = x * scale.cwiseInverse().asDiagonal();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    throw Error(ErrorCode::kRankDeficient,
                std::string(ToString(family)) + " design matrix has rank " +
                    std::to_string(qr.rank()) + " < " + std::to_string(k));
  }
  const Eigen::VectorXd coef = qr.solve(y).cwiseQuotient(scale);

  TimingModel m;
  m.layer = layer;
  m.family = family;
  double* slots[4] = {&m.alpha, &m.beta, &m.gamma, &m.delta};
  for (int c = 0; c < k; ++c) *slots[cols[c]] = coef(c);

  const Eigen::VectorXd r = y - x * coef;
  const double ynorm = std::max(y.norm(), 1e-300);
  for (int c = 0; c < k; ++c) {
    const double dot = std::abs(x.col(c).dot(r)) / (scale(c) * ynorm);
    m.orthogonality = std::max(m.orthogonality, dot);
  }
  const FitMetrics metrics = ModelMetrics(m, samples);
  m.mpe = metrics.mpe;
  m.r_squared = metrics.r_squared;
  for (int c = 0; c < 4; ++c) {
    if (*slots[c] < 0.0) {
      detail::Log()->warn("layer {} {}: fitted coefficient {} is negative ({})",
                          layer, ToString(family), "abgd"[c], *slots[c]);
    }
  }
  return m;
}

FitMetrics ModelMetrics(const TimingModel& model,
                        std::span<const TimingSample> samples) {
  FitMetrics out;
  if (samples.empty()) return out;
  double mean = 0.0;
  for (const TimingSample& s : samples) mean += s.wall_clock_ms;
  mean /= static_cast<double>(samples.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  double pe = 0.0;
  for (const TimingSample& s : samples) {
    const double e = Predict(model, s.n_in, s.n_out);
    const double a = s.wall_clock_ms;
    pe += std::abs(e - a) / a;
    ss_res += (e - a) * (e - a);
    ss_tot += (a - mean) * (a - mean);
  }
  out.mpe = pe / static_cast<double>(samples.size());
  if (ss_tot > 0.0) {
    out.r_squared = 1.0 - ss_res / ss_tot;
  } else {
    out.r_squared = ss_res == 0.0 ? 1.0 : 0.0;
  }
  return out;
}

TimingModel ActiveTerms(const TimingModel& model) {
  const auto terms = FamilyTerms(model.family);
  TimingModel m = model;
  if (!terms[0]) m.alpha = 0.0;
  if (!terms[1]) m.beta = 0.0;
  if (!terms[2]) m.gamma = 0.0;
  if (!terms[3]) m.delta = 0.0;
  return m;
}

double EstimateLayer(const TimingModel& model, double n_in, double n_out) {
  return Predict(model, n_in, n_out);
}

long long LayerInputCount(const NetworkSpec& net, const PruningSolution& sol,
                          int t) {
  long long n = 0;
  for (const Edge& e : net.edges_into(t)) n += CountOnes(sol.v[e.source]);
  return n;
}

NetworkEstimate EstimateNetwork(std::span<const TimingModel> models,
                                const NetworkSpec& net,
                                const PruningSolution& sol) {
  const int L = net.num_layers();
  ValidateSolutionShape(net, sol);
  std::vector<const TimingModel*> by_layer(L + 1, nullptr);
  for (const TimingModel& m : models) {
    if (m.layer >= 1 && m.layer <= L) by_layer[m.layer] = &m;
  }
  NetworkEstimate out;
  out.per_layer_ms.resize(L);
  for (int t = 1; t <= L; ++t) {
    if (by_layer[t] == nullptr) {
      throw Error(ErrorCode::kMissingTimingModel,
                  "no timing model for layer " + std::to_string(t));
    }
    const double ms =
        EstimateLayer(*by_layer[t], static_cast<double>(LayerInputCount(net, sol, t)),
                      static_cast<double>(CountOnes(sol.u[t])));
    out.per_layer_ms[t - 1] = ms;
    out.total_ms += ms;
  }
  return out;
}

TimingModel GroundTruthModel(const LayerGeometry& geometry,
                             const CoefficientLaw& law, int layer) {
  const double units = geometry.units();
  TimingModel m;
  m.layer = layer;
  m.family = TimingFamily::kM6;
  m.alpha = law.alpha;
  m.beta = law.beta_per_unit * units;
  m.gamma = law.gamma_per_unit * units;
  m.delta = law.delta_per_unit * units;
  return m;
}

std::vector<TimingSample> SynthSamples(const LayerGeometry& geometry,
                                       const CoefficientLaw& law, double noise,
                                       std::uint64_t seed,
                                       const SampleGrid& grid) {
  if (grid.step < 1 || grid.count < 1) {
    throw Error(ErrorCode::kValidation, "sample grid must be positive");
  }
  if (noise < 0.0) {
    throw Error(ErrorCode::kValidation, "noise level must be >= 0");
  }
  const TimingModel truth = GroundTruthModel(geometry, law);
  Gaussian rng(seed);
  std::vector<TimingSample> out;
  out.reserve(static_cast<std::size_t>(grid.count) * grid.count);
  for (int x = 1; x <= grid.count; ++x) {
    for (int y = 1; y <= grid.count; ++y) {
      TimingSample s;
      s.n_in = grid.step * x;
      s.n_out = grid.step * y;
      const double clean = Predict(truth, s.n_in, s.n_out);
      double factor = 1.0;
      if (noise > 0.0) {
        // Keep the measured time positive.
        factor = std::max(1.0 + noise * rng.Next(), 1e-3);
      }
      s.wall_clock_ms = clean * factor;
      out.push_back(s);
    }
  }
  return out;
}

}  // namespace prunesolve
