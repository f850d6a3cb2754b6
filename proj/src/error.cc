//
// Copyright 2026 The infoch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "infoch/error.h"

#include <array>
#include <string>
#include <utility>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"

namespace infoch {
namespace {

constexpr std::array<std::pair<ErrorCode, absl::string_view>, 31> kNames = {{
    {ErrorCode::kTooFewSamples, "TooFewSamples"},
    {ErrorCode::kNonFinite, "NonFinite"},
    {ErrorCode::kNotSymmetric, "NotSymmetric"},
    {ErrorCode::kNotPsd, "NotPSD"},
    {ErrorCode::kNoConvergence, "NoConvergence"},
    {ErrorCode::kSingularLeadingMinor, "SingularLeadingMinor"},
    {ErrorCode::kNonPositiveBeta, "NonPositiveBeta"},
    {ErrorCode::kNonPositiveDefinite, "NonPositiveDefinite"},
    {ErrorCode::kNonPositiveSigma, "NonPositiveSigma"},
    {ErrorCode::kZeroSpectrum, "ZeroSpectrum"},
    {ErrorCode::kNonPositiveKappa, "NonPositiveKappa"},
    {ErrorCode::kInvalidDelta, "InvalidDelta"},
    {ErrorCode::kInvalidDpParams, "InvalidDpParams"},
    {ErrorCode::kZeroBatch, "ZeroBatch"},
    {ErrorCode::kEmptyCompressionSet, "EmptyCompressionSet"},
    {ErrorCode::kDegenerateDistribution, "DegenerateDistribution"},
    {ErrorCode::kDimensionMismatch, "DimensionMismatch"},
    {ErrorCode::kSingularNoise, "SingularNoise"},
    {ErrorCode::kNoiseUnderflow, "NoiseUnderflow"},
    {ErrorCode::kBracketFailure, "BracketFailure"},
    {ErrorCode::kShapeMismatch, "ShapeMismatch"},
    {ErrorCode::kBadWeights, "BadWeights"},
    {ErrorCode::kBadSchedule, "BadSchedule"},
    {ErrorCode::kBudgetExceeded, "BudgetExceeded"},
    {ErrorCode::kDeadNeurons, "DeadNeurons"},
    {ErrorCode::kNonPositiveVariance, "NonPositiveVariance"},
    {ErrorCode::kInvalidArgument, "InvalidArgument"},
    {ErrorCode::kCapacityViolation, "CapacityViolation"},
    {ErrorCode::kParseError, "ParseError"},
    {ErrorCode::kBoundViolation, "BoundViolation"},
    {ErrorCode::kUsage, "Usage"},
}};

}  // namespace

absl::string_view ErrorName(ErrorCode code) {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

absl::Status MakeError(ErrorCode code, absl::string_view detail) {
  std::string message = absl::StrCat(ErrorName(code), ": ", detail);
  if (code == ErrorCode::kInvalidArgument || code == ErrorCode::kParseError ||
      code == ErrorCode::kUsage) {
    return absl::InvalidArgumentError(message);
  }
  return absl::FailedPreconditionError(message);
}

std::optional<ErrorCode> ErrorCodeOf(const absl::Status& status) {
  if (status.ok()) return std::nullopt;
  for (const auto& [code, name] : kNames) {
    if (absl::StartsWith(status.message(), absl::StrCat(name, ":"))) {
      return code;
    }
  }
  return std::nullopt;
}

}  // namespace infoch
