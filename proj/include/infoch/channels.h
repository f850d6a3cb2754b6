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

#ifndef INFOCH_CHANNELS_H_
#define INFOCH_CHANNELS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include "absl/strings/string_view.h"
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "infoch/matrix.h"
#include "infoch/spectral.h"

namespace infoch {

enum class ChannelKind { kNatural, kWhite, kPersonalized };

absl::string_view ChannelKindName(ChannelKind kind);
absl::StatusOr<ChannelKind> ParseChannelKind(absl::string_view name);

// Sigma_xi = sigma * I.
struct IsotropicShape {
  double sigma = 0.0;
};
// Sigma_xi = Q diag(psi) Q^T.
struct EigenDiagonalShape {
  std::vector<double> psi;
  Matrix basis;
};
// Sigma_xi = sigma * diag(beta).
struct ScaledDiagonalShape {
  double sigma = 0.0;
  std::vector<double> beta;
};

using NoiseShape =
    std::variant<IsotropicShape, EigenDiagonalShape, ScaledDiagonalShape>;

// A calibrated Gaussian noise covariance. Immutable once built.
struct NoisePlan {
  ChannelKind kind = ChannelKind::kNatural;
  std::size_t dim = 0;
  double kappa = 0.0;
  NoiseShape shape;
  std::uint64_t seed = 0;

  Matrix NoiseCovariance() const;
  // tr(Sigma_xi) / d.
  double MeanVariance() const;
};

struct NoisyDataset {
  Matrix data;
  NoisePlan plan;
  std::string original_checksum;
};

absl::StatusOr<NoisePlan> PlanNatural(const CovarianceSpectrum& spectrum,
                                      double kappa, std::uint64_t seed);
absl::StatusOr<NoisePlan> PlanWhite(const CovarianceSpectrum& spectrum,
                                    double kappa, std::uint64_t seed);
// Uses the conservative sigma solving U(sigma) = kappa.
absl::StatusOr<NoisePlan> PlanPersonalized(const Matrix& cov,
                                           std::span<const double> beta,
                                           double kappa, std::uint64_t seed);

// `count` x d matrix of noise rows. Entry (r, c) uses normal index r * d + c
// of stream `stream`, so output is a pure function of (seed, stream, count).
Matrix SampleNoise(const NoisePlan& plan, std::size_t count,
                   std::uint64_t stream = 0);

// Adds one independent noise draw to every row of `data`.
absl::StatusOr<NoisyDataset> ApplyNoise(const NoisePlan& plan,
                                        const Matrix& data,
                                        std::uint64_t stream = 0);

// Exact Gaussian-channel capacity 1/2 [ln det(Sigma_D + Sigma_xi) -
// ln det Sigma_xi] of the plan against the data spectrum. Noise-free
// directions are allowed only where the data has no variance.
absl::StatusOr<double> RealizedCapacity(const NoisePlan& plan,
                                        const CovarianceSpectrum& spectrum);

// SHA-256 hex digest of the matrix shape and its raw values.
std::string DataChecksum(const Matrix& m);

}  // namespace infoch

#endif  // INFOCH_CHANNELS_H_
