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

#ifndef INFOCH_SPECTRAL_H_
#define INFOCH_SPECTRAL_H_

#include <cstddef>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "infoch/matrix.h"

namespace infoch {

inline constexpr double kDefaultEigenTolerance = 1e-12;
inline constexpr int kMaxJacobiSweeps = 100;

// Eigenvalues (descending, clipped at zero) and the orthogonal basis whose
// columns are the matching eigenvectors, so that cov = Q diag(lambda) Q^T.
struct CovarianceSpectrum {
  std::vector<double> eigenvalues;
  Matrix basis;

  std::size_t dim() const { return eigenvalues.size(); }
  Matrix Reconstruct() const;
};

// Quantities of the leading-block recursion
//   Sigma_i = [[Sigma_{i-1}, rho_i], [rho_i^T, c_ii]]
// with u_i = c_ii - rho_i^T Sigma_{i-1}^{-1} rho_i (the Schur complement) and
// k_i = beta_i + x_i^T diag(beta) x_i where x_i = Sigma_{i-1}^{-1} rho_i.
struct SchurSequence {
  std::vector<double> diagonal;  // c_ii
  std::vector<double> u;
  std::vector<double> k;
  std::vector<double> beta;
  // Set when the input had a singular leading minor and `jitter * I` was
  // added before the recursion.
  bool jitter_applied = false;
  double jitter = 0.0;

  std::size_t dim() const { return u.size(); }
};

// Unbiased sample covariance of the rows of `data` (divides by rows - 1).
absl::StatusOr<Matrix> EstimateCovariance(const Matrix& data);

// Checks squareness and |a_ij - a_ji| <= 1e-10 * max|a|.
absl::Status CheckSymmetric(const Matrix& m);

// Cyclic Jacobi eigensolver for a symmetric PSD matrix. Sweeps until the
// largest off-diagonal magnitude is below tol * ||cov||_F. Eigenvalues in
// [-tol * trace, 0) are clipped to zero; anything more negative is NotPSD.
absl::StatusOr<CovarianceSpectrum> Eigendecompose(
    const Matrix& cov, double tol = kDefaultEigenTolerance);

absl::StatusOr<SchurSequence> ComputeSchurSequence(
    const Matrix& cov, std::span<const double> beta);

// ln det(cov) as the sum of log-eigenvalues.
absl::StatusOr<double> LogDet(const Matrix& cov);

// Lower-triangular Cholesky factor. Fails with NonPositiveDefinite when a
// pivot drops below 1e-12 * max diagonal.
absl::StatusOr<Matrix> Cholesky(const Matrix& spd);

// Solves spd * X = rhs.
absl::StatusOr<Matrix> SolveSpd(const Matrix& spd, const Matrix& rhs);

}  // namespace infoch

#endif  // INFOCH_SPECTRAL_H_
