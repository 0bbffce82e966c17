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

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>

#include "prunesolve/constraints.hpp"

namespace prunesolve::testing {
namespace {

int Uniform(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

ImportanceTensor Tensor(int layer, int rows, int cols,
                        const std::vector<double>& values) {
  ImportanceTensor t;
  t.layer = layer;
  t.values = Tensor4<double>(Shape4{rows, cols, 1, 1}, values);
  return t;
}

}  // namespace

NetworkSpec ToyNetwork(bool prune_input) {
  std::vector<LayerSpec> layers(2);
  layers[0] = LayerSpec{1, 3, 2, 1, 1, 1, 1, 1, 1, {}};
  layers[1] = LayerSpec{2, 2, 3, 1, 1, 1, 1, 1, 1, {}};
  return NetworkSpec(3, std::move(layers), {}, {}, prune_input);
}

ImportanceSet ToyImportance() {
  return {Tensor(1, 3, 2, {4, 1, 5, 2, 3, 1}),
          Tensor(2, 2, 3, {3, 3, 2, 9, 8, 7})};
}

Problem ToyProblem(double budget, bool prune_input, PruneMode mode) {
  NetworkSpec net = ToyNetwork(prune_input);
  ResourceSpec res = Coefficients(net, ResourceKind::kSize, budget);
  return Problem::Create(std::move(net), ToyImportance(), std::move(res),
                         mode);
}

PruningSolution ToySolution(std::vector<std::uint8_t> u1,
                            std::vector<std::uint8_t> u2) {
  const NetworkSpec net = ToyNetwork();
  std::vector<std::vector<std::uint8_t>> u{{1, 1, 1}, std::move(u1),
                                           std::move(u2)};
  std::vector<std::vector<std::uint8_t>> v = u;
  return PruningSolution::FromChannels(net, PruneMode::kChannel, std::move(u),
                                       std::move(v));
}

const char* ToString(Topology topology) {
  switch (topology) {
    case Topology::kSequential: return "sequential";
    case Topology::kIdentity: return "identity";
    case Topology::kZeroPad: return "zero_pad";
    case Topology::kConv1x1: return "conv1x1";
    case Topology::kConcat: return "concat";
  }
  return "?";
}

NetworkSpec RandomNetwork(Rng& rng, Topology topology,
                          const NetworkOptions& opts) {
  int min_layers = opts.min_layers;
  if (topology == Topology::kConcat) min_layers = std::max(min_layers, 2);
  const int L = Uniform(rng, min_layers, std::max(min_layers, opts.max_layers));
  std::vector<int> c(L + 1);
  for (int& x : c) x = Uniform(rng, 1, opts.max_channels);

  std::vector<SkipAddition> skips;
  std::vector<SkipConcat> concats;
  switch (topology) {
    case Topology::kSequential:
      break;
    case Topology::kIdentity:
    case Topology::kZeroPad:
    case Topology::kConv1x1: {
      const int t = Uniform(rng, 1, L);
      const int s = Uniform(rng, 0, t - 1);
      SkipKind kind = SkipKind::kIdentity;
      if (topology == Topology::kIdentity) {
        c[t] = c[s];
      } else {
        kind = topology == Topology::kZeroPad ? SkipKind::kZeroPad
                                              : SkipKind::kConv1x1;
        const int cap = std::max(2, opts.max_channels);
        c[s] = Uniform(rng, 1, cap - 1);
        c[t] = Uniform(rng, c[s] + 1, cap);
      }
      skips.push_back(SkipAddition{s, t, kind});
      break;
    }
    case Topology::kConcat: {
      const int q = Uniform(rng, 2, L);
      const int p = Uniform(rng, 0, q - 2);
      concats.push_back(SkipConcat{p, q, {}});
      break;
    }
  }

  std::vector<LayerSpec> layers(L);
  int h = Uniform(rng, 1, opts.max_spatial);
  int w = Uniform(rng, 1, opts.max_spatial);
  for (int l = 1; l <= L; ++l) {
    LayerSpec& s = layers[l - 1];
    s.id = l;
    s.c_in = c[l - 1];
    for (const SkipConcat& cc : concats) {
      if (cc.q == l) s.c_in += c[cc.p];
    }
    s.c_out = c[l];
    s.kernel = Uniform(rng, 1, opts.max_kernel);
    s.stride = 1;
    s.h_in = h;
    s.w_in = w;
    h = Uniform(rng, 1, opts.max_spatial);
    w = Uniform(rng, 1, opts.max_spatial);
    s.h_out = h;
    s.w_out = w;
  }
  return NetworkSpec(c[0], std::move(layers), std::move(skips),
                     std::move(concats), opts.prune_input);
}

ImportanceSet RandomImportance(Rng& rng, const NetworkSpec& net,
                               int max_value) {
  ImportanceSet out;
  for (int l = 1; l <= net.num_layers(); ++l) {
    const LayerSpec& s = net.layer(l);
    ImportanceTensor t;
    t.layer = l;
    t.values = Tensor4<double>(Shape4{s.c_in, s.c_out, s.kernel, s.kernel});
    for (double& x : t.values.data()) x = Uniform(rng, 0, max_value);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<TimingModel> RandomTimingModels(Rng& rng, const NetworkSpec& net) {
  std::vector<TimingModel> out;
  for (int l = 1; l <= net.num_layers(); ++l) {
    TimingModel m;
    m.layer = l;
    m.family = TimingFamily::kM6;
    m.alpha = 0.5 * Uniform(rng, 0, 4);
    m.beta = 0.25 * Uniform(rng, 0, 8);
    m.gamma = 0.25 * Uniform(rng, 0, 8);
    m.delta = 0.25 * Uniform(rng, 0, 8);
    out.push_back(m);
  }
  return out;
}

Problem Instance::MakeProblem() const {
  return Problem::Create(net, importance, resource, mode, scheme);
}

int CountFreeBits(const NetworkSpec& net, PruneMode mode) {
  return static_cast<int>(VariableLayout(net).FreeVariables(mode).size());
}

std::optional<Instance> RandomInstance(Rng& rng, Topology topology,
                                       ResourceKind kind, PruneMode mode,
                                       Scheme scheme, int max_free,
                                       const NetworkOptions& opts) {
  Instance in{std::string(ToString(topology)) + "/" +
                  std::string(prunesolve::ToString(kind)) + "/" +
                  std::string(prunesolve::ToString(mode)) + "/" +
                  std::string(prunesolve::ToString(scheme)),
              RandomNetwork(rng, topology, opts),
              {},
              {},
              mode,
              scheme,
              {}};
  if (CountFreeBits(in.net, mode) > max_free) return std::nullopt;
  in.importance = RandomImportance(rng, in.net);
  if (kind == ResourceKind::kTime) in.timing = RandomTimingModels(rng, in.net);
  ResourceSpec probe = Coefficients(in.net, kind, 0.0, in.timing);
  const double lo =
      Usage(in.net, MinimalSolution(in.net, mode, scheme), probe);
  const double hi = FullUsage(in.net, probe);
  const double frac = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double budget = lo + frac * (hi - lo);
  if (kind != ResourceKind::kTime) {
    budget = std::floor(budget);
  } else {
    budget = std::ldexp(std::floor(std::ldexp(budget, 4)), -4);
  }
  budget = std::max(budget, lo);
  in.resource = Coefficients(in.net, kind, budget + probe.constant, in.timing);
  return in;
}

Instance DrawInstance(Rng& rng, Topology topology, ResourceKind kind,
                      PruneMode mode, Scheme scheme, int max_free,
                      const NetworkOptions& opts) {
  for (;;) {
    if (auto in = RandomInstance(rng, topology, kind, mode, scheme, max_free,
                                 opts)) {
      return std::move(*in);
    }
  }
}

PruningSolution RandomSolution(Rng& rng, const NetworkSpec& net,
                               PruneMode mode) {
  std::bernoulli_distribution coin(0.5);
  PruningSolution sol = PruningSolution::AllOnes(net, mode);
  for (auto& u : sol.u) {
    for (auto& b : u) b = coin(rng);
  }
  for (auto& v : sol.v) {
    for (auto& b : v) b = coin(rng);
  }
  if (mode == PruneMode::kChannel) {
    PinShapeColumns(net, sol);
  } else {
    for (auto& slots : sol.q) {
      for (auto& cols : slots) {
        for (auto& b : cols) b = coin(rng);
      }
    }
  }
  return sol;
}

}  // namespace prunesolve::testing
