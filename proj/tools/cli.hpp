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

#ifndef PRUNESOLVE_TOOLS_CLI_HPP_
#define PRUNESOLVE_TOOLS_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace prunesolve::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kInfeasible = 3;
inline constexpr int kTooLarge = 4;
inline constexpr int kInactive = 5;

// Runs one command line (args[0] is the program name). Documents and tables
// go to `out`, diagnostics to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace prunesolve::cli

#endif  // PRUNESOLVE_TOOLS_CLI_HPP_
