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

#ifndef INFOCH_ERROR_H_
#define INFOCH_ERROR_H_

#include <optional>
#include "absl/strings/string_view.h"

#include "absl/status/status.h"

namespace infoch {

// Domain error kinds. Every failing operation returns an absl::Status whose
// message starts with "<Name>: ", so callers (and the CLI) can recover the
// kind with ErrorCodeOf().
enum class ErrorCode {
  kTooFewSamples,
  kNonFinite,
  kNotSymmetric,
  kNotPsd,
  kNoConvergence,
  kSingularLeadingMinor,
  kNonPositiveBeta,
  kNonPositiveDefinite,
  kNonPositiveSigma,
  kZeroSpectrum,
  kNonPositiveKappa,
  kInvalidDelta,
  kInvalidDpParams,
  kZeroBatch,
  kEmptyCompressionSet,
  kDegenerateDistribution,
  kDimensionMismatch,
  kSingularNoise,
  kNoiseUnderflow,
  kBracketFailure,
  kShapeMismatch,
  kBadWeights,
  kBadSchedule,
  kBudgetExceeded,
  kDeadNeurons,
  kNonPositiveVariance,
  kInvalidArgument,
  kCapacityViolation,
  kParseError,
  kBoundViolation,
  kUsage,
};

absl::string_view ErrorName(ErrorCode code);

// Builds a status carrying `code`. Usage-type errors map to
// kInvalidArgument, everything else to kFailedPrecondition.
absl::Status MakeError(ErrorCode code, absl::string_view detail);

// Recovers the domain error kind from a status built by MakeError().
std::optional<ErrorCode> ErrorCodeOf(const absl::Status& status);

}  // namespace infoch

#define INFOCH_STATUS_CONCAT_INNER_(a, b) a##b
#define INFOCH_STATUS_CONCAT_(a, b) INFOCH_STATUS_CONCAT_INNER_(a, b)

#define INFOCH_RETURN_IF_ERROR(expr)          \
  do {                                        \
    const absl::Status _infoch_st = (expr);   \
    if (!_infoch_st.ok()) return _infoch_st;  \
  } while (0)

#define INFOCH_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, expr) \
  auto tmp = (expr);                                  \
  if (!tmp.ok()) return tmp.status();                 \
  lhs = std::move(*tmp)

#define INFOCH_ASSIGN_OR_RETURN(lhs, expr) \
  INFOCH_ASSIGN_OR_RETURN_IMPL_(           \
      INFOCH_STATUS_CONCAT_(_infoch_or_, __LINE__), lhs, expr)

#endif  // INFOCH_ERROR_H_
