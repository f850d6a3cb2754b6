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

#include "infoch/spectral.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "infoch/error.h"

namespace infoch {
namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kPivotTolerance = 1e-12;
constexpr double kJitterScale = 1e-9;

double MaxOffDiagonal(const Matrix& a) {
  double m = 0.0;
  for (std::size_t p = 0; p < a.rows(); ++p) {
    for (std::size_t q = p + 1; q < a.cols(); ++q) {
      m = std::max(m, std::abs(a(p, q)));
    }
  }
  return m;
}

// One Jacobi rotation annihilating a(p, q); accumulates into v.
void Rotate(Matrix& a, Matrix& v, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = std::copysign(1.0, theta) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;
  const std::size_t n = a.rows();
  for (std::size_t k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

// Runs the factorization; returns the index of the first failing pivot or -1.
long CholeskyInPlace(const Matrix& spd, Matrix& lower) {
  const std::size_t n = spd.rows();
  lower = Matrix(n, n);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, spd(i, i));
  const double threshold = kPivotTolerance * max_diag;
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = spd(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
    if (!(pivot > threshold) || max_diag <= 0.0) return static_cast<long>(j);
    const double ljj = std::sqrt(pivot);
    lower(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = spd(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / ljj;
    }
  }
  return -1;
}

void ForwardSubstitute(const Matrix& lower, std::span<double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= lower(i, k) * x[k];
    x[i] = s / lower(i, i);
  }
}

void BackSubstitute(const Matrix& lower, std::span<double> x) {
  for (std::size_t ii = x.size(); ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < x.size(); ++k) s -= lower(k, ii) * x[k];
    x[ii] = s / lower(ii, ii);
  }
}

absl::StatusOr<SchurSequence> SchurFromMatrix(const Matrix& cov,
                                              std::span<const double> beta) {
  Matrix lower;
  const long failed = CholeskyInPlace(cov, lower);
  if (failed >= 0) {
    return MakeError(ErrorCode::kSingularLeadingMinor,
                     absl::StrCat("leading minor of order ", failed + 1,
                                  " is not positive definite"));
  }
  const std::size_t d = cov.rows();
  SchurSequence out;
  out.beta.assign(beta.begin(), beta.end());
  out.diagonal.resize(d);
  out.u.resize(d);
  out.k.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double cii = cov(i, i);
    out.diagonal[i] = cii;
    // rho_i = L_{i-1} l_i where l_i is row i of L (first i entries), so
    // rho_i^T Sigma_{i-1}^{-1} rho_i = |l_i|^2.
    std::vector<double> x(lower.row(i).begin(), lower.row(i).begin() + i);
    double explained = 0.0;
    for (double v : x) explained += v * v;
    out.u[i] = cii - explained;
    // x_i = Sigma_{i-1}^{-1} rho_i = L_{i-1}^{-T} l_i.
    BackSubstitute(lower, x);
    double k = beta[i];
    for (std::size_t j = 0; j < i; ++j) k += beta[j] * x[j] * x[j];
    out.k[i] = k;
    if (!(out.u[i] > 0.0)) {
      return MakeError(ErrorCode::kSingularLeadingMinor,
                       absl::StrCat("Schur complement u_", i,
                                    " is not positive"));
    }
  }
  return out;
}

}  // namespace

Matrix CovarianceSpectrum::Reconstruct() const {
  const std::size_t d = dim();
  Matrix out(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        s += basis(i, k) * eigenvalues[k] * basis(j, k);
      }
      out(i, j) = s;
    }
  }
  return out;
}

absl::StatusOr<Matrix> EstimateCovariance(const Matrix& data) {
  if (data.rows() < 2) {
    return MakeError(ErrorCode::kTooFewSamples,
                     absl::StrCat("need at least 2 samples, got ",
                                  data.rows()));
  }
  if (!data.AllFinite()) {
    return MakeError(ErrorCode::kNonFinite, "data contains non-finite values");
  }
  const std::size_t n = data.rows();
  const std::size_t d = data.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) mean[c] += data(r, c);
  }
  for (double& m : mean) m /= static_cast<double>(n);
  Matrix cov(d, d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = data.row(r);
    for (std::size_t i = 0; i < d; ++i) {
      const double di = row[i] - mean[i];
      for (std::size_t j = i; j < d; ++j) cov(i, j) += di * (row[j] - mean[j]);
    }
  }
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      cov(i, j) /= denom;
      cov(j, i) = cov(i, j);
    }
  }
  return cov;
}

absl::Status CheckSymmetric(const Matrix& m) {
  if (!m.is_square()) {
    return MakeError(ErrorCode::kNotSymmetric,
                     absl::StrCat("matrix is ", m.rows(), "x", m.cols()));
  }
  if (!m.AllFinite()) {
    return MakeError(ErrorCode::kNonFinite, "matrix has non-finite entries");
  }
  const double limit = kSymmetryTolerance * m.MaxAbs();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > limit) {
        return MakeError(ErrorCode::kNotSymmetric,
                         absl::StrCat("entry (", i, ",", j,
                                      ") differs from its transpose"));
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<CovarianceSpectrum> Eigendecompose(const Matrix& cov,
                                                  double tol) {
  INFOCH_RETURN_IF_ERROR(CheckSymmetric(cov));
  const std::size_t n = cov.rows();
  Matrix a = cov;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = avg;
      a(j, i) = avg;
    }
  }
  Matrix v = Matrix::Identity(n);
  const double threshold = tol * cov.FrobeniusNorm();
  bool converged = false;
  for (int sweep = 0; sweep <= kMaxJacobiSweeps; ++sweep) {
    if (MaxOffDiagonal(a) <= threshold) {
      converged = true;
      break;
    }
    if (sweep == kMaxJacobiSweeps) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) Rotate(a, v, p, q);
    }
  }
  if (!converged) {
    return MakeError(ErrorCode::kNoConvergence,
                     absl::StrCat("Jacobi did not converge in ",
                                  kMaxJacobiSweeps, " sweeps"));
  }

  const double clip_floor = -tol * std::abs(cov.Trace());
  std::vector<double> lambda(n);
  for (std::size_t i = 0; i < n; ++i) {
    double l = a(i, i);
    if (l < 0.0) {
      if (l < clip_floor) {
        return MakeError(ErrorCode::kNotPsd,
                         absl::StrCat("eigenvalue ", l, " is negative"));
      }
      l = 0.0;
    }
    lambda[i] = l;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return lambda[x] > lambda[y];
  });

  CovarianceSpectrum out;
  out.eigenvalues.resize(n);
  out.basis = Matrix(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    const std::size_t src = order[col];
    out.eigenvalues[col] = lambda[src];
    // Sign convention: the largest-magnitude component is positive.
    std::size_t arg = 0;
    for (std::size_t r = 1; r < n; ++r) {
      if (std::abs(v(r, src)) > std::abs(v(arg, src))) arg = r;
    }
    const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < n; ++r) out.basis(r, col) = sign * v(r, src);
  }
  return out;
}

absl::StatusOr<SchurSequence> ComputeSchurSequence(
    const Matrix& cov, std::span<const double> beta) {
  INFOCH_RETURN_IF_ERROR(CheckSymmetric(cov));
  if (beta.size() != cov.rows()) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     absl::StrCat("beta has ", beta.size(),
                                  " entries for a ", cov.rows(), "-dim matrix"));
  }
  for (double b : beta) {
    if (!(b > 0.0) || !std::isfinite(b)) {
      return MakeError(ErrorCode::kNonPositiveBeta,
                       "importance weights must be positive and finite");
    }
  }
  auto first = SchurFromMatrix(cov, beta);
  if (first.ok() ||
      ErrorCodeOf(first.status()) != ErrorCode::kSingularLeadingMinor) {
    return first;
  }
  const std::size_t d = cov.rows();
  const double jitter = kJitterScale * cov.Trace() / static_cast<double>(d);
  if (!(jitter > 0.0)) return first;
  Matrix jittered = cov;
  for (std::size_t i = 0; i < d; ++i) jittered(i, i) += jitter;
  INFOCH_ASSIGN_OR_RETURN(SchurSequence out, SchurFromMatrix(jittered, beta));
  out.jitter_applied = true;
  out.jitter = jitter;
  return out;
}

absl::StatusOr<double> LogDet(const Matrix& cov) {
  INFOCH_ASSIGN_OR_RETURN(CovarianceSpectrum spectrum, Eigendecompose(cov));
  double s = 0.0;
  for (double l : spectrum.eigenvalues) {
    if (!(l > 0.0)) {
      return MakeError(ErrorCode::kNonPositiveDefinite,
                       "matrix has a zero eigenvalue");
    }
    s += std::log(l);
  }
  return s;
}

absl::StatusOr<Matrix> Cholesky(const Matrix& spd) {
  INFOCH_RETURN_IF_ERROR(CheckSymmetric(spd));
  Matrix lower;
  const long failed = CholeskyInPlace(spd, lower);
  if (failed >= 0) {
    return MakeError(ErrorCode::kNonPositiveDefinite,
                     absl::StrCat("pivot ", failed, " is not positive"));
  }
  return lower;
}

absl::StatusOr<Matrix> SolveSpd(const Matrix& spd, const Matrix& rhs) {
  if (rhs.rows() != spd.rows()) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     "right-hand side row count differs from the matrix");
  }
  INFOCH_ASSIGN_OR_RETURN(Matrix lower, Cholesky(spd));
  Matrix out = rhs;
  std::vector<double> col(spd.rows());
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    for (std::size_t r = 0; r < rhs.rows(); ++r) col[r] = rhs(r, c);
    ForwardSubstitute(lower, col);
    BackSubstitute(lower, col);
    for (std::size_t r = 0; r < rhs.rows(); ++r) out(r, c) = col[r];
  }
  return out;
}

}  // namespace infoch
