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

#ifndef INFOCH_CAPACITY_H_
#define INFOCH_CAPACITY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "infoch/matrix.h"
#include "infoch/spectral.h"

// Capacities are in nats throughout. "sigma" is always a noise *variance*.

namespace infoch {

inline constexpr double kDefaultSolverTolerance = 1e-12;
inline constexpr int kMaxBracketExpansions = 200;

// Gaussian-mechanism configuration. `sigma` is the variance of the added
// noise, i.e. the square of the usual noise multiplier.
struct DpParams {
  double epsilon = 0.0;
  double delta = 0.0;
  double clip = 0.0;
  std::int64_t batch = 1;
  double sigma = 0.0;
};

struct DpCapacityBounds {
  double noise_bound = 0.0;    // B * S^2 / sigma
  double epsilon_bound = 0.0;  // B * eps^2 / (2 ln(1.25 / delta))
  double Tightest() const;
};

struct BoundInputs {
  double entropy = 0.0;  // differential entropy h(D), nats
  std::size_t dim = 1;
  double info = 0.0;  // I(D; W), nats
};

struct CompressionDelta {
  double nats = 0.0;
  // All dimensions were compressed; `nats` is the whole capacity.
  bool full_compression = false;
};

double NatsToBits(double nats);
double BitsToNats(double bits);

// f(sigma) = 1/2 sum_i ln((lambda_i + sigma) / sigma).
absl::StatusOr<double> CapacityIsotropic(const CovarianceSpectrum& spectrum,
                                         double sigma);
// Same, parameterized by ln(sigma); never under- or overflows.
double CapacityIsotropicAtLogSigma(std::span<const double> eigenvalues,
                                   double log_sigma);

// Bisection for f(sigma) = kappa. Returns sigma (or ln sigma).
absl::StatusOr<double> SolveIsotropic(const CovarianceSpectrum& spectrum,
                                      double kappa,
                                      double rel_tol = kDefaultSolverTolerance);
absl::StatusOr<double> SolveIsotropicLogSigma(
    const CovarianceSpectrum& spectrum, double kappa,
    double rel_tol = kDefaultSolverTolerance);

// Equal-capacity allocation sigma_i = lambda_i / (exp(2 kappa / d') - 1),
// with d' the number of nonzero eigenvalues. Zero eigenvalues get zero noise.
// Same allocation as ln sigma_i; zero eigenvalues map to -infinity.
absl::StatusOr<std::vector<double>> WhiteNoiseLogEigenvalues(
    const CovarianceSpectrum& spectrum, double kappa);
absl::StatusOr<std::vector<double>> WhiteNoiseEigenvalues(
    const CovarianceSpectrum& spectrum, double kappa);

// Upper bound on 1/2 [ln det(Sigma + sigma diag(beta)) - sum ln(sigma beta_i)]
// from the leading-block recursion:
//   U = 1/2 [min(sum ln(c_ii + sigma beta_i), sum ln(u_i + sigma k_i))
//            - sum ln(sigma beta_i)].
absl::StatusOr<double> PersonalizedCapacityUpper(double sigma,
                                                 const SchurSequence& schur);
double PersonalizedCapacityUpperAtLogSigma(const SchurSequence& schur,
                                           double log_sigma);

absl::StatusOr<double> SolvePersonalized(
    const SchurSequence& schur, double kappa,
    double rel_tol = kDefaultSolverTolerance);
absl::StatusOr<double> SolvePersonalizedLogSigma(
    const SchurSequence& schur, double kappa,
    double rel_tol = kDefaultSolverTolerance);

absl::StatusOr<DpCapacityBounds> ComputeDpCapacityBounds(const DpParams& dp);
absl::StatusOr<double> DpNoiseBound(std::int64_t batch, double clip,
                                    double sigma);
absl::StatusOr<double> DpEpsilonBound(std::int64_t batch, double epsilon,
                                      double delta);
// Smallest noise variance giving (epsilon, delta)-DP for L2 sensitivity clip:
// clip^2 * 2 ln(1.25 / delta) / epsilon^2.
absl::StatusOr<double> MinimalDpSigma(double epsilon, double delta,
                                      double clip);

// Capacity with per-sample covariance averaged over a batch of `batch`
// i.i.d. samples (eigenvalues scaled by 1/batch).
absl::StatusOr<double> BatchScaledCapacity(const CovarianceSpectrum& spectrum,
                                           double sigma, std::int64_t batch);

// Capacity lost when the coordinates in `compressed` are dropped:
//   1/2 ln det(Q_k + sigma I - R^T (P + sigma I)^{-1} R) / sigma^k
// with P the kept block, Q_k the compressed block and R the cross block.
absl::StatusOr<CompressionDelta> ComputeCompressionDelta(
    const Matrix& cov, std::span<const std::size_t> compressed, double sigma);

// Per-dimension reconstruction MSE floor
//   exp(2h/d) / (2 pi e) * exp(-2 I / d).
absl::StatusOr<double> MseLowerBound(const BoundInputs& inputs);

// h = 1/2 [d ln(2 pi e) + sum ln lambda_i].
absl::StatusOr<double> GaussianEntropy(const CovarianceSpectrum& spectrum);

}  // namespace infoch

#endif  // INFOCH_CAPACITY_H_
