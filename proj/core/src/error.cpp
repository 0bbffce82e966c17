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

#include "prunesolve/error.hpp"

namespace prunesolve {

std::string_view ToString(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kValidation: return "ValidationError";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kMissingTimingModel: return "MissingTimingModel";
    case ErrorCode::kUnsupportedTopology: return "UnsupportedTopology";
    case ErrorCode::kNegativeCoefficient: return "NegativeCoefficient";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kInfeasibleBudget: return "InfeasibleBudget";
    case ErrorCode::kInfeasibleBlock: return "InfeasibleBlock";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kIo: return "IoError";
  }
  return "Error";
}

}  // namespace prunesolve
