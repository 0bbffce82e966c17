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

#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "prunesolve/error.hpp"
#include "prunesolve/model.hpp"
#include "reference.hpp"

namespace prunesolve {
namespace {

using testing::Rng;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIo;
}

LayerSpec Layer(int id, int c_in, int c_out, int kernel = 1) {
  return LayerSpec{id, c_in, c_out, kernel, 1, 4, 4, 4, 4, {}};
}

TEST(NetworkSpecTest, ToyHasTwoLayers) {
  const NetworkSpec net = testing::ToyNetwork();
  EXPECT_EQ(net.num_layers(), 2);
  EXPECT_EQ(net.channels(0), 3);
  EXPECT_EQ(net.channels(1), 2);
  EXPECT_EQ(net.channels(2), 3);
  EXPECT_TRUE(net.is_sequential());
  ASSERT_EQ(net.edges_into(2).size(), 1u);
  EXPECT_EQ(net.edges_into(2)[0].source, 1);
}

TEST(NetworkSpecTest, RejectsEmptyLayerList) {
  EXPECT_EQ(CodeOf([] { NetworkSpec(3, {}); }), ErrorCode::kValidation);
}

TEST(NetworkSpecTest, RejectsIdentitySkipWithMismatchedChannels) {
  std::vector<LayerSpec> layers{Layer(1, 3, 4), Layer(2, 4, 5), Layer(3, 5, 6),
                                Layer(4, 6, 7)};
  EXPECT_EQ(CodeOf([&] {
              NetworkSpec(3, layers, {SkipAddition{2, 4, SkipKind::kIdentity}});
            }),
            ErrorCode::kValidation);
}

TEST(NetworkSpecTest, RejectsBrokenChannelChain) {
  EXPECT_EQ(CodeOf([] { NetworkSpec(3, {Layer(1, 3, 4), Layer(2, 5, 2)}); }),
            ErrorCode::kValidation);
}

TEST(NetworkSpecTest, RejectsTwoSkipsIntoOneTarget) {
  std::vector<LayerSpec> layers{Layer(1, 2, 2), Layer(2, 2, 2), Layer(3, 2, 2)};
  EXPECT_EQ(CodeOf([&] {
              NetworkSpec(2, layers,
                          {SkipAddition{0, 3, SkipKind::kIdentity},
                           SkipAddition{1, 3, SkipKind::kIdentity}});
            }),
            ErrorCode::kValidation);
}

TEST(NetworkSpecTest, RejectsZeroPadWithoutGrowth) {
  std::vector<LayerSpec> layers{Layer(1, 2, 2), Layer(2, 2, 2)};
  EXPECT_EQ(CodeOf([&] {
              NetworkSpec(2, layers, {SkipAddition{0, 2, SkipKind::kZeroPad}});
            }),
            ErrorCode::kValidation);
}

TEST(NetworkSpecTest, PaddingFormulaIsChecked) {
  LayerSpec ok{1, 3, 4, 3, 1, 8, 8, 8, 8, 1};
  EXPECT_NO_THROW(NetworkSpec(3, {ok}));
  LayerSpec strided{1, 3, 4, 3, 2, 8, 8, 4, 4, 1};
  EXPECT_NO_THROW(NetworkSpec(3, {strided}));
  LayerSpec bad{1, 3, 4, 3, 1, 8, 8, 7, 8, 1};
  EXPECT_EQ(CodeOf([&] { NetworkSpec(3, {bad}); }), ErrorCode::kValidation);
  LayerSpec free_dims{1, 3, 4, 3, 1, 8, 8, 5, 3, {}};
  EXPECT_NO_THROW(NetworkSpec(3, {free_dims}));
}

TEST(NetworkSpecTest, ConcatTargetSumsSourceChannels) {
  std::vector<LayerSpec> layers{Layer(1, 2, 3), Layer(2, 3, 4), Layer(3, 7, 2)};
  const NetworkSpec net(2, layers, {}, {SkipConcat{1, 3, {}}});
  const auto edges = net.edges_into(3);
  ASSERT_EQ(edges.size(), 2u);
  EXPECT_EQ(edges[0].source, 1);
  EXPECT_EQ(edges[0].row_offset, 0);
  EXPECT_EQ(edges[1].source, 2);
  EXPECT_EQ(edges[1].row_offset, 3);
  std::vector<LayerSpec> wrong{Layer(1, 2, 3), Layer(2, 3, 4), Layer(3, 4, 2)};
  EXPECT_EQ(CodeOf([&] { NetworkSpec(2, wrong, {}, {SkipConcat{1, 3, {}}}); }),
            ErrorCode::kValidation);
}

TEST(ImportanceTest, L2NormalisesMagnitudes) {
  Tensor4<double> w(Shape4{2, 1, 1, 1}, std::vector<double>{2.0, -2.0});
  const ImportanceTensor imp = ImportanceFromWeights(w, Normalization::kL2, 1);
  EXPECT_DOUBLE_EQ(imp.gamma, 1.0 / std::sqrt(8.0));
  EXPECT_DOUBLE_EQ(imp.values.at(0, 0, 0, 0), 2.0 / std::sqrt(8.0));
  EXPECT_DOUBLE_EQ(imp.values.at(1, 0, 0, 0), 2.0 / std::sqrt(8.0));
  EXPECT_FALSE(imp.zero_norm_warning);
}

TEST(ImportanceTest, ZeroWeightsWarn) {
  Tensor4<double> w(Shape4{2, 2, 3, 3}, 0.0);
  const ImportanceTensor imp = ImportanceFromWeights(w, Normalization::kL2, 1);
  EXPECT_TRUE(imp.zero_norm_warning);
  EXPECT_EQ(imp.gamma, 1.0);
  for (double x : imp.values.data()) EXPECT_EQ(x, 0.0);
}

TEST(ImportanceTest, NoNormalisationKeepsMagnitudes) {
  Tensor4<double> w(Shape4{3, 2, 1, 1},
                    std::vector<double>{-4, 1, 5, -2, 3, -1});
  const ImportanceTensor imp = ImportanceFromWeights(w, Normalization::kNone, 1);
  const FilterImportance f = ComputeFilterImportance(imp);
  const double want[3][2] = {{4, 1}, {5, 2}, {3, 1}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_EQ(f.values(i, j), want[i][j]);
  }
}

TEST(ImportanceTest, FilterSumsKernelWindow) {
  ImportanceTensor imp;
  imp.layer = 1;
  imp.values = Tensor4<double>(Shape4{2, 3, 3, 3}, 1.0);
  const FilterImportance f = ComputeFilterImportance(imp);
  for (double x : f.values.data) EXPECT_EQ(x, 9.0);
}

TEST(ImportanceTest, ValidationCatchesShapeAndSign) {
  const NetworkSpec net = testing::ToyNetwork();
  ImportanceSet imp = testing::ToyImportance();
  EXPECT_NO_THROW(ValidateImportance(net, imp));
  ImportanceSet negative = imp;
  negative[0].values.at(0, 0, 0, 0) = -1.0;
  EXPECT_EQ(CodeOf([&] { ValidateImportance(net, negative); }),
            ErrorCode::kValidation);
  ImportanceSet short_set{imp[0]};
  EXPECT_EQ(CodeOf([&] { ValidateImportance(net, short_set); }),
            ErrorCode::kShapeMismatch);
}

TEST(ObjectiveTest, ToyGreedyAndOptimalSelections) {
  const NetworkSpec net = testing::ToyNetwork();
  const ImportanceSet imp = testing::ToyImportance();
  // Conv-1 output a is the (4,5,3) column, output b the (1,2,1) column.
  EXPECT_EQ(ObjectiveValue(net, imp, testing::ToySolution({1, 0}, {1, 1, 0})),
            18.0);
  EXPECT_EQ(ObjectiveValue(net, imp, testing::ToySolution({0, 1}, {1, 1, 0})),
            21.0);
}

TEST(ObjectiveTest, AllZeroIsZero) {
  const NetworkSpec net = testing::ToyNetwork();
  PruningSolution sol = testing::ToySolution({0, 0}, {0, 0, 0});
  for (auto& b : sol.u[0]) b = 0;
  sol.v[0] = sol.u[0];
  EXPECT_EQ(ObjectiveValue(net, testing::ToyImportance(), sol), 0.0);
}

TEST(ObjectiveTest, ShapeMismatchIsRejected) {
  const NetworkSpec net = testing::ToyNetwork();
  PruningSolution sol = testing::ToySolution({1, 0}, {1, 1, 0});
  sol.u[2].push_back(1);
  EXPECT_EQ(CodeOf([&] { ObjectiveValue(net, testing::ToyImportance(), sol); }),
            ErrorCode::kShapeMismatch);
}

TEST(MaskTest, NormIdentityOnRandomSolutions) {
  Rng rng(11);
  testing::NetworkOptions opts;
  opts.max_kernel = 3;
  for (int trial = 0; trial < 60; ++trial) {
    const auto topo = testing::kAllTopologies[trial % 5];
    const NetworkSpec net = testing::RandomNetwork(rng, topo, opts);
    for (PruneMode mode : {PruneMode::kChannel, PruneMode::kChannelSpatial}) {
      const PruningSolution sol = testing::RandomSolution(rng, net, mode);
      for (int t = 1; t <= net.num_layers(); ++t) {
        const long long closed = MaskNorm(net, sol, t);
        const Tensor4<std::uint8_t> mask = MaterializeMask(net, sol, t);
        long long counted = 0;
        for (std::uint8_t b : mask.data()) counted += b;
        EXPECT_EQ(closed, counted);
        EXPECT_EQ(closed, testing::ReferenceMaskCount(net, sol, t));
        if (mode == PruneMode::kChannel && net.is_sequential()) {
          const int k = net.kernel(t);
          EXPECT_EQ(closed, static_cast<long long>(k) * k *
                                CountOnes(sol.v[t - 1]) * CountOnes(sol.u[t]));
        }
      }
    }
  }
}

TEST(ObjectiveTest, MaskAndFilterRoutesAgree) {
  Rng rng(12);
  testing::NetworkOptions opts;
  opts.max_kernel = 3;
  for (int trial = 0; trial < 20; ++trial) {
    const auto topo = testing::kAllTopologies[trial % 5];
    const NetworkSpec net = testing::RandomNetwork(rng, topo, opts);
    ImportanceSet imp = testing::RandomImportance(rng, net);
    std::uniform_real_distribution<double> real(0.0, 1.0);
    for (auto& t : imp) {
      for (double& x : t.values.data()) x *= real(rng);
    }
    std::vector<FilterImportance> filters;
    for (const auto& t : imp) filters.push_back(ComputeFilterImportance(t));
    for (int s = 0; s < 100; ++s) {
      const PruningSolution sol =
          testing::RandomSolution(rng, net, PruneMode::kChannel);
      const double a = ObjectiveValue(net, imp, sol);
      const double b = ObjectiveFromFilters(net, filters, sol);
      EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::abs(a)));
      EXPECT_NEAR(a, testing::ReferenceObjective(net, imp, sol),
                  1e-9 * std::max(1.0, std::abs(a)));
    }
  }
}

TEST(ObjectiveTest, PositiveScalingScalesExactly) {
  Rng rng(13);
  const NetworkSpec net =
      testing::RandomNetwork(rng, testing::Topology::kIdentity);
  const ImportanceSet imp = testing::RandomImportance(rng, net);
  ImportanceSet scaled = imp;
  for (auto& t : scaled) {
    for (double& x : t.values.data()) x *= 4.0;
  }
  for (int s = 0; s < 50; ++s) {
    const PruningSolution sol =
        testing::RandomSolution(rng, net, PruneMode::kChannelSpatial);
    EXPECT_EQ(ObjectiveValue(net, scaled, sol),
              4.0 * ObjectiveValue(net, imp, sol));
  }
}

TEST(SolutionTest, FromChannelsPinsColumns) {
  const NetworkSpec net = testing::ToyNetwork();
  const PruningSolution sol = testing::ToySolution({0, 1}, {1, 0, 1});
  EXPECT_EQ(sol.v[1], sol.u[1]);
  EXPECT_EQ(sol.q[2][0], (std::vector<std::uint8_t>{1, 0, 1}));
  EXPECT_NO_THROW(ValidateSolutionShape(net, sol));
}

TEST(ParseTest, ModeNames) {
  EXPECT_EQ(ParsePruneMode("channel"), PruneMode::kChannel);
  EXPECT_EQ(ParsePruneMode("channel-spatial"), PruneMode::kChannelSpatial);
  EXPECT_EQ(ParsePruneMode("channel_spatial"), PruneMode::kChannelSpatial);
  EXPECT_EQ(ParseSkipKind("zero_pad"), SkipKind::kZeroPad);
  EXPECT_EQ(CodeOf([] { ParsePruneMode("spatial"); }), ErrorCode::kParse);
}

}  // namespace
}  // namespace prunesolve
