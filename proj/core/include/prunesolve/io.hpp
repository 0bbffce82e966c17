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

#ifndef PRUNESOLVE_IO_HPP_
#define PRUNESOLVE_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "prunesolve/consistency.hpp"
#include "prunesolve/constraints.hpp"
#include "prunesolve/model.hpp"
#include "prunesolve/resources.hpp"
#include "prunesolve/solver.hpp"
#include "prunesolve/timing.hpp"

namespace prunesolve {

inline constexpr int kSchemaVersion = 1;

// Network document:
//   {"input_channels": 3, "prune_input_channels": false,
//    "layers": [{"id", "c_in", "c_out", "kernel", "stride", "h_in", "w_in",
//                "h_out", "w_out", "padding"?}, ...],
//    "skip_additions": [{"s", "t", "kind"}], "skip_concats": [{"p", "q"}]}
// Throws ParseError on malformed text, ValidationError on bad contents.
NetworkSpec ParseNetwork(std::string_view text);
NetworkSpec LoadNetwork(const std::filesystem::path& path);
std::string NetworkToJson(const NetworkSpec& net);

// Importance manifest:
//   {"source": "importance" | "weights", "normalization": "l2" | "none",
//    "layers": [{"layer": 1, "values": [[[[...]]]]},
//               {"layer": 2, "file": "w2.bin", "shape": [c_in, c_out, k, k]}]}
// Sidecar files hold little-endian float32 values in (i, j, a, b) order and
// are resolved relative to `base_dir`. With source = weights each tensor goes
// through ImportanceFromWeights.
ImportanceSet ParseImportance(std::string_view text,
                              const std::filesystem::path& base_dir,
                              const NetworkSpec& net);
ImportanceSet LoadImportance(const std::filesystem::path& path,
                             const NetworkSpec& net);
std::string ImportanceToJson(const ImportanceSet& importance);

struct SolutionEcho {
  std::optional<double> objective;
  std::optional<double> usage;
};

// Solution document: {"schema_version", "mode", "objective"?, "usage"?,
//   "feature_maps": [{"t", "u", "v", "q"?, "q_sources"?}, ...]}
// q lists one flat (j, a, b) array per source slot of layer t.
PruningSolution ParseSolution(std::string_view text, const NetworkSpec& net,
                              SolutionEcho* echo = nullptr);
PruningSolution LoadSolution(const std::filesystem::path& path,
                             const NetworkSpec& net,
                             SolutionEcho* echo = nullptr);
std::string SolutionToJson(const NetworkSpec& net, const PruningSolution& sol,
                           const SolutionEcho& echo = {});

std::string ResourceReportToJson(const ResourceReport& report);
std::string ActivityReportToJson(const NetworkSpec& net,
                                 const ActivityReport& report);
std::string SolveResultToJson(const NetworkSpec& net, const SolveResult& r,
                              const ResourceReport& report);

// Samples CSV with header n_in,n_out,wall_clock_ms.
std::vector<TimingSample> ParseSamplesCsv(std::string_view text);
std::vector<TimingSample> LoadSamplesCsv(const std::filesystem::path& path);
std::string SamplesToCsv(std::span<const TimingSample> samples);

// {"schema_version", "models": [{layer, family, alpha, ...}, ...]}; a bare
// model object or a bare array are accepted as well.
std::vector<TimingModel> ParseTimingModels(std::string_view text);
std::vector<TimingModel> LoadTimingModels(const std::filesystem::path& path);
std::string TimingModelsToJson(std::span<const TimingModel> models);

std::string ReadTextFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

}  // namespace prunesolve

#endif  // PRUNESOLVE_IO_HPP_
