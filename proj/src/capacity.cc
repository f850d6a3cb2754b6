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

#include "infoch/capacity.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "infoch/error.h"

namespace infoch {
namespace {

const double kLog2PiE = std::log(2.0 * std::numbers::pi * std::numbers::e);

// ln(1 + e^x) without overflow.
double Softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// ln(e^x - 1) for x > 0.
double LogExpm1(double x) {
  if (x > 30.0) return x + std::log1p(-std::exp(-x));
  return std::log(std::expm1(x));
}

absl::Status CheckKappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    return MakeError(ErrorCode::kNonPositiveKappa,
                     absl::StrCat("kappa must be positive and finite, got ",
                                  kappa));
  }
  return absl::OkStatus();
}

absl::Status CheckSigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    return MakeError(ErrorCode::kNonPositiveSigma,
                     absl::StrCat("sigma must be positive and finite, got ",
                                  sigma));
  }
  return absl::OkStatus();
}

absl::StatusOr<double> ExpOfLogSigma(double log_sigma) {
  const double sigma = std::exp(log_sigma);
  if (!(sigma >= std::numeric_limits<double>::min())) {
    return MakeError(ErrorCode::kNoiseUnderflow,
                     absl::StrCat("noise variance exp(", log_sigma,
                                  ") underflows double precision"));
  }
  if (!std::isfinite(sigma)) {
    return MakeError(ErrorCode::kNoiseUnderflow,
                     absl::StrCat("noise variance exp(", log_sigma,
                                  ") overflows double precision"));
  }
  return sigma;
}

// Finds s with capacity(s) = kappa for a capacity strictly decreasing in s.
absl::StatusOr<double> BisectLogSigma(
    const std::function<double(double)>& capacity, double kappa,
    double start, double rel_tol) {
  const double step = std::log(4.0);
  double lo = start;
  double hi = start;
  int expansions = 0;
  while (capacity(lo) < kappa) {
    lo -= step;
    if (++expansions > kMaxBracketExpansions) {
      return MakeError(ErrorCode::kBracketFailure,
                       "could not bracket the root from below");
    }
  }
  expansions = 0;
  while (capacity(hi) > kappa) {
    hi += step;
    if (++expansions > kMaxBracketExpansions) {
      return MakeError(ErrorCode::kBracketFailure,
                       "could not bracket the root from above");
    }
  }
  const double target = rel_tol * kappa;
  double best = lo;
  double best_err = std::abs(capacity(lo) - kappa);
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double value = capacity(mid);
    const double err = std::abs(value - kappa);
    if (err < best_err) {
      best = mid;
      best_err = err;
    }
    if (err <= target || mid <= lo || mid >= hi) break;
    if (value > kappa) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double hi_err = std::abs(capacity(hi) - kappa);
  if (hi_err < best_err) best = hi;
  return best;
}

}  // namespace

double DpCapacityBounds::Tightest() const {
  return std::min(noise_bound, epsilon_bound);
}

double NatsToBits(double nats) { return nats / std::numbers::ln2; }
double BitsToNats(double bits) { return bits * std::numbers::ln2; }

double CapacityIsotropicAtLogSigma(std::span<const double> eigenvalues,
                                   double log_sigma) {
  double total = 0.0;
  for (double lambda : eigenvalues) {
    if (lambda > 0.0) total += Softplus(std::log(lambda) - log_sigma);
  }
  return 0.5 * total;
}

absl::StatusOr<double> CapacityIsotropic(const CovarianceSpectrum& spectrum,
                                         double sigma) {
  INFOCH_RETURN_IF_ERROR(CheckSigma(sigma));
  return CapacityIsotropicAtLogSigma(spectrum.eigenvalues, std::log(sigma));
}

absl::StatusOr<double> SolveIsotropicLogSigma(
    const CovarianceSpectrum& spectrum, double kappa, double rel_tol) {
  INFOCH_RETURN_IF_ERROR(CheckKappa(kappa));
  const auto& lambda = spectrum.eigenvalues;
  if (lambda.empty() ||
      std::none_of(lambda.begin(), lambda.end(),
                   [](double l) { return l > 0.0; })) {
    return MakeError(ErrorCode::kZeroSpectrum,
                     "all eigenvalues are zero; capacity is 0 for any noise");
  }
  const double d = static_cast<double>(lambda.size());
  const double mean = std::accumulate(lambda.begin(), lambda.end(), 0.0) / d;
  // Exact root when all eigenvalues are equal.
  const double start = std::log(mean) - LogExpm1(2.0 * kappa / d);
  return BisectLogSigma(
      [&](double s) { return CapacityIsotropicAtLogSigma(lambda, s); }, kappa,
      start, rel_tol);
}

absl::StatusOr<double> SolveIsotropic(const CovarianceSpectrum& spectrum,
                                      double kappa, double rel_tol) {
  INFOCH_ASSIGN_OR_RETURN(double log_sigma,
                          SolveIsotropicLogSigma(spectrum, kappa, rel_tol));
  return ExpOfLogSigma(log_sigma);
}

absl::StatusOr<std::vector<double>> WhiteNoiseLogEigenvalues(
    const CovarianceSpectrum& spectrum, double kappa) {
  INFOCH_RETURN_IF_ERROR(CheckKappa(kappa));
  const auto& lambda = spectrum.eigenvalues;
  const auto active = static_cast<double>(std::count_if(
      lambda.begin(), lambda.end(), [](double l) { return l > 0.0; }));
  if (active == 0.0) {
    return MakeError(ErrorCode::kZeroSpectrum,
                     "all eigenvalues are zero; nothing to calibrate");
  }
  const double log_denominator = LogExpm1(2.0 * kappa / active);
  std::vector<double> log_psi(lambda.size(),
                              -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (lambda[i] > 0.0) log_psi[i] = std::log(lambda[i]) - log_denominator;
  }
  return log_psi;
}

absl::StatusOr<std::vector<double>> WhiteNoiseEigenvalues(
    const CovarianceSpectrum& spectrum, double kappa) {
  INFOCH_ASSIGN_OR_RETURN(std::vector<double> log_psi,
                          WhiteNoiseLogEigenvalues(spectrum, kappa));
  std::vector<double> psi(log_psi.size(), 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (std::isfinite(log_psi[i])) {
      INFOCH_ASSIGN_OR_RETURN(psi[i], ExpOfLogSigma(log_psi[i]));
    }
  }
  return psi;
}

double PersonalizedCapacityUpperAtLogSigma(const SchurSequence& schur,
                                           double log_sigma) {
  double diagonal_branch = 0.0;
  double schur_branch = 0.0;
  for (std::size_t i = 0; i < schur.dim(); ++i) {
    const double log_beta = std::log(schur.beta[i]);
    const double log_k = std::log(schur.k[i]);
    diagonal_branch +=
        Softplus(std::log(schur.diagonal[i]) - log_sigma - log_beta);
    schur_branch += (log_k - log_beta) +
                    Softplus(std::log(schur.u[i]) - log_sigma - log_k);
  }
  return 0.5 * std::min(diagonal_branch, schur_branch);
}

absl::StatusOr<double> PersonalizedCapacityUpper(double sigma,
                                                 const SchurSequence& schur) {
  INFOCH_RETURN_IF_ERROR(CheckSigma(sigma));
  return PersonalizedCapacityUpperAtLogSigma(schur, std::log(sigma));
}

absl::StatusOr<double> SolvePersonalizedLogSigma(const SchurSequence& schur,
                                                 double kappa,
                                                 double rel_tol) {
  INFOCH_RETURN_IF_ERROR(CheckKappa(kappa));
  if (schur.dim() == 0) {
    return MakeError(ErrorCode::kZeroSpectrum, "empty Schur sequence");
  }
  double mean_ratio = 0.0;
  for (std::size_t i = 0; i < schur.dim(); ++i) {
    if (!(schur.beta[i] > 0.0)) {
      return MakeError(ErrorCode::kNonPositiveBeta,
                       "importance weights must be positive");
    }
    mean_ratio += schur.diagonal[i] / schur.beta[i];
  }
  const double d = static_cast<double>(schur.dim());
  mean_ratio /= d;
  const double start = std::log(mean_ratio) - LogExpm1(2.0 * kappa / d);
  return BisectLogSigma(
      [&](double s) { return PersonalizedCapacityUpperAtLogSigma(schur, s); },
      kappa, start, rel_tol);
}

absl::StatusOr<double> SolvePersonalized(const SchurSequence& schur,
                                         double kappa, double rel_tol) {
  INFOCH_ASSIGN_OR_RETURN(double log_sigma,
                          SolvePersonalizedLogSigma(schur, kappa, rel_tol));
  return ExpOfLogSigma(log_sigma);
}

absl::StatusOr<double> DpNoiseBound(std::int64_t batch, double clip,
                                    double sigma) {
  if (batch < 1) return MakeError(ErrorCode::kZeroBatch, "batch must be >= 1");
  if (!(clip > 0.0)) {
    return MakeError(ErrorCode::kInvalidDpParams, "clip bound must be > 0");
  }
  INFOCH_RETURN_IF_ERROR(CheckSigma(sigma));
  return static_cast<double>(batch) * clip * clip / sigma;
}

absl::StatusOr<double> DpEpsilonBound(std::int64_t batch, double epsilon,
                                      double delta) {
  if (batch < 1) return MakeError(ErrorCode::kZeroBatch, "batch must be >= 1");
  if (!(epsilon > 0.0)) {
    return MakeError(ErrorCode::kInvalidDpParams, "epsilon must be > 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return MakeError(ErrorCode::kInvalidDelta,
                     absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  return static_cast<double>(batch) * epsilon * epsilon /
         (2.0 * std::log(1.25 / delta));
}

absl::StatusOr<double> MinimalDpSigma(double epsilon, double delta,
                                      double clip) {
  if (!(epsilon > 0.0) || !(clip > 0.0)) {
    return MakeError(ErrorCode::kInvalidDpParams,
                     "epsilon and clip must be > 0");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    return MakeError(ErrorCode::kInvalidDelta,
                     absl::StrCat("delta must lie in (0, 1), got ", delta));
  }
  return clip * clip * 2.0 * std::log(1.25 / delta) / (epsilon * epsilon);
}

absl::StatusOr<DpCapacityBounds> ComputeDpCapacityBounds(const DpParams& dp) {
  DpCapacityBounds out;
  INFOCH_ASSIGN_OR_RETURN(out.epsilon_bound,
                          DpEpsilonBound(dp.batch, dp.epsilon, dp.delta));
  INFOCH_ASSIGN_OR_RETURN(out.noise_bound,
                          DpNoiseBound(dp.batch, dp.clip, dp.sigma));
  return out;
}

absl::StatusOr<double> BatchScaledCapacity(const CovarianceSpectrum& spectrum,
                                           double sigma, std::int64_t batch) {
  INFOCH_RETURN_IF_ERROR(CheckSigma(sigma));
  if (batch < 1) return MakeError(ErrorCode::kZeroBatch, "batch must be >= 1");
  std::vector<double> scaled = spectrum.eigenvalues;
  for (double& l : scaled) l /= static_cast<double>(batch);
  return CapacityIsotropicAtLogSigma(scaled, std::log(sigma));
}

absl::StatusOr<CompressionDelta> ComputeCompressionDelta(
    const Matrix& cov, std::span<const std::size_t> compressed, double sigma) {
  INFOCH_RETURN_IF_ERROR(CheckSymmetric(cov));
  INFOCH_RETURN_IF_ERROR(CheckSigma(sigma));
  if (compressed.empty()) {
    return MakeError(ErrorCode::kEmptyCompressionSet,
                     "no dimensions selected for compression");
  }
  const std::size_t d = cov.rows();
  std::vector<bool> is_compressed(d, false);
  for (std::size_t idx : compressed) {
    if (idx >= d || is_compressed[idx]) {
      return MakeError(ErrorCode::kInvalidArgument,
                       absl::StrCat("bad compression index ", idx));
    }
    is_compressed[idx] = true;
  }
  std::vector<std::size_t> kept_idx;
  std::vector<std::size_t> comp_idx;
  for (std::size_t i = 0; i < d; ++i) {
    (is_compressed[i] ? comp_idx : kept_idx).push_back(i);
  }

  if (kept_idx.empty()) {
    INFOCH_ASSIGN_OR_RETURN(CovarianceSpectrum spectrum, Eigendecompose(cov));
    INFOCH_ASSIGN_OR_RETURN(double full, CapacityIsotropic(spectrum, sigma));
    return CompressionDelta{full, /*full_compression=*/true};
  }

  Matrix kept = cov.Select(kept_idx, kept_idx);
  for (std::size_t i = 0; i < kept.rows(); ++i) kept(i, i) += sigma;
  const Matrix cross = cov.Select(kept_idx, comp_idx);
  const Matrix block = cov.Select(comp_idx, comp_idx);
  INFOCH_ASSIGN_OR_RETURN(Matrix solved, SolveSpd(kept, cross));
  // Conditional covariance of the compressed block given the noisy kept
  // block; PSD, so every eigenvalue of (it + sigma I) is >= sigma.
  Matrix conditional = block - cross.Transpose() * solved;
  for (std::size_t i = 0; i < conditional.rows(); ++i) {
    for (std::size_t j = i + 1; j < conditional.cols(); ++j) {
      const double avg = 0.5 * (conditional(i, j) + conditional(j, i));
      conditional(i, j) = avg;
      conditional(j, i) = avg;
    }
  }
  INFOCH_ASSIGN_OR_RETURN(CovarianceSpectrum spectrum,
                          Eigendecompose(conditional));
  INFOCH_ASSIGN_OR_RETURN(double delta, CapacityIsotropic(spectrum, sigma));
  return CompressionDelta{delta, /*full_compression=*/false};
}

absl::StatusOr<double> MseLowerBound(const BoundInputs& inputs) {
  if (inputs.dim < 1) {
    return MakeError(ErrorCode::kInvalidArgument, "dimension must be >= 1");
  }
  if (!(inputs.info >= 0.0)) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "mutual information must be >= 0");
  }
  const double d = static_cast<double>(inputs.dim);
  return std::exp(2.0 * (inputs.entropy - inputs.info) / d - kLog2PiE);
}

absl::StatusOr<double> GaussianEntropy(const CovarianceSpectrum& spectrum) {
  double log_det = 0.0;
  for (double l : spectrum.eigenvalues) {
    if (!(l > 0.0)) {
      return MakeError(ErrorCode::kDegenerateDistribution,
                       "covariance has a zero eigenvalue");
    }
    log_det += std::log(l);
  }
  const double d = static_cast<double>(spectrum.dim());
  return 0.5 * (d * kLog2PiE + log_det);
}

}  // namespace infoch
