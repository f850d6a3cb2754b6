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

#include "infoch/channels.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <openssl/evp.h>

#include "absl/strings/escaping.h"
#include "absl/strings/str_cat.h"
#include "infoch/capacity.h"
#include "infoch/error.h"
#include "infoch/rng.h"

namespace infoch {
namespace {

// Variance threshold below which a direction counts as noise-free data.
constexpr double kNullDirectionTolerance = 1e-10;

// Variances below the smallest normal double are raised to it. Extra noise
// only lowers capacity, so the plan stays within its budget.
absl::StatusOr<double> FloorVariance(double log_variance, double floor) {
  if (log_variance < std::log(floor)) return floor;
  const double v = std::exp(log_variance);
  if (!std::isfinite(v)) {
    return MakeError(ErrorCode::kNoiseUnderflow,
                     absl::StrCat("noise variance exp(", log_variance,
                                  ") overflows double precision"));
  }
  return v;
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// Capacity 1/2 sum ln(1 + mu_j) where mu are the eigenvalues of
// D^{-1/2} A D^{-1/2}, restricted to directions with positive noise.
absl::StatusOr<double> WhitenedCapacity(const Matrix& data_cov,
                                        std::span<const double> noise_diag) {
  const std::size_t d = data_cov.rows();
  const double scale = std::max(std::abs(data_cov.Trace()), 1e-300);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < d; ++i) {
    if (noise_diag[i] > 0.0) {
      active.push_back(i);
    } else if (data_cov(i, i) > kNullDirectionTolerance * scale) {
      return MakeError(ErrorCode::kSingularNoise,
                       absl::StrCat("direction ", i,
                                    " carries data variance but no noise"));
    }
  }
  if (active.empty()) return 0.0;
  // Whiten against D / floor with floor the smallest noise variance, so
  // every factor is at most one; the floor goes back in log space.
  double floor = std::numeric_limits<double>::infinity();
  for (std::size_t i : active) floor = std::min(floor, noise_diag[i]);
  std::vector<double> factor(active.size());
  for (std::size_t a = 0; a < active.size(); ++a) {
    factor[a] = std::sqrt(floor / noise_diag[active[a]]);
  }
  Matrix whitened(active.size(), active.size());
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t b = 0; b < active.size(); ++b) {
      whitened(a, b) = data_cov(active[a], active[b]) * factor[a] * factor[b];
    }
  }
  for (std::size_t a = 0; a < active.size(); ++a) {
    for (std::size_t b = a + 1; b < active.size(); ++b) {
      const double avg = 0.5 * (whitened(a, b) + whitened(b, a));
      whitened(a, b) = avg;
      whitened(b, a) = avg;
    }
  }
  INFOCH_ASSIGN_OR_RETURN(CovarianceSpectrum spectrum,
                          Eigendecompose(whitened));
  const double log_floor = std::log(floor);
  double total = 0.0;
  for (double mu : spectrum.eigenvalues) {
    if (mu <= 0.0) continue;
    const double x = std::log(mu) - log_floor;
    total += x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }
  return 0.5 * total;
}

}  // namespace

absl::string_view ChannelKindName(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kNatural:
      return "natural";
    case ChannelKind::kWhite:
      return "white";
    case ChannelKind::kPersonalized:
      return "personalized";
  }
  return "unknown";
}

absl::StatusOr<ChannelKind> ParseChannelKind(absl::string_view name) {
  if (name == "natural") return ChannelKind::kNatural;
  if (name == "white") return ChannelKind::kWhite;
  if (name == "personalized") return ChannelKind::kPersonalized;
  return MakeError(ErrorCode::kParseError,
                   absl::StrCat("unknown channel kind '", name, "'"));
}

Matrix NoisePlan::NoiseCovariance() const {
  return std::visit(
      Overloaded{
          [&](const IsotropicShape& s) {
            return s.sigma * Matrix::Identity(dim);
          },
          [&](const EigenDiagonalShape& s) {
            CovarianceSpectrum spectrum{s.psi, s.basis};
            return spectrum.Reconstruct();
          },
          [&](const ScaledDiagonalShape& s) {
            std::vector<double> diag(s.beta);
            for (double& v : diag) v *= s.sigma;
            return Matrix::Diagonal(diag);
          },
      },
      shape);
}

double NoisePlan::MeanVariance() const {
  return NoiseCovariance().Trace() / static_cast<double>(dim);
}

absl::StatusOr<NoisePlan> PlanNatural(const CovarianceSpectrum& spectrum,
                                      double kappa, std::uint64_t seed) {
  INFOCH_ASSIGN_OR_RETURN(double log_sigma,
                          SolveIsotropicLogSigma(spectrum, kappa));
  INFOCH_ASSIGN_OR_RETURN(
      double sigma,
      FloorVariance(log_sigma, std::numeric_limits<double>::min()));
  return NoisePlan{ChannelKind::kNatural, spectrum.dim(), kappa,
                   IsotropicShape{sigma}, seed};
}

absl::StatusOr<NoisePlan> PlanWhite(const CovarianceSpectrum& spectrum,
                                    double kappa, std::uint64_t seed) {
  INFOCH_ASSIGN_OR_RETURN(std::vector<double> log_psi,
                          WhiteNoiseLogEigenvalues(spectrum, kappa));
  std::vector<double> psi(log_psi.size(), 0.0);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    if (std::isfinite(log_psi[i])) {
      INFOCH_ASSIGN_OR_RETURN(
          psi[i],
          FloorVariance(log_psi[i], std::numeric_limits<double>::min()));
    }
  }
  return NoisePlan{ChannelKind::kWhite, spectrum.dim(), kappa,
                   EigenDiagonalShape{std::move(psi), spectrum.basis}, seed};
}

absl::StatusOr<NoisePlan> PlanPersonalized(const Matrix& cov,
                                           std::span<const double> beta,
                                           double kappa, std::uint64_t seed) {
  INFOCH_ASSIGN_OR_RETURN(SchurSequence schur, ComputeSchurSequence(cov, beta));
  INFOCH_ASSIGN_OR_RETURN(double log_sigma,
                          SolvePersonalizedLogSigma(schur, kappa));
  // Keep every sigma * beta_i a normal double.
  const double min_beta = *std::min_element(beta.begin(), beta.end());
  INFOCH_ASSIGN_OR_RETURN(
      double sigma,
      FloorVariance(log_sigma, std::numeric_limits<double>::min() /
                                   std::min(1.0, min_beta)));
  return NoisePlan{
      ChannelKind::kPersonalized, cov.rows(), kappa,
      ScaledDiagonalShape{sigma, std::vector<double>(beta.begin(), beta.end())},
      seed};
}

Matrix SampleNoise(const NoisePlan& plan, std::size_t count,
                   std::uint64_t stream) {
  const std::size_t d = plan.dim;
  const CounterRng rng(plan.seed, stream);
  Matrix out(count, d);
  std::vector<double> z(d);
  for (std::size_t r = 0; r < count; ++r) {
    for (std::size_t c = 0; c < d; ++c) z[c] = rng.NormalAt(r * d + c);
    auto row = out.row(r);
    std::visit(
        Overloaded{
            [&](const IsotropicShape& s) {
              const double scale = std::sqrt(s.sigma);
              for (std::size_t c = 0; c < d; ++c) row[c] = scale * z[c];
            },
            [&](const EigenDiagonalShape& s) {
              for (std::size_t c = 0; c < d; ++c) z[c] *= std::sqrt(s.psi[c]);
              for (std::size_t i = 0; i < d; ++i) {
                double v = 0.0;
                for (std::size_t c = 0; c < d; ++c) v += s.basis(i, c) * z[c];
                row[i] = v;
              }
            },
            [&](const ScaledDiagonalShape& s) {
              for (std::size_t c = 0; c < d; ++c) {
                row[c] = std::sqrt(s.sigma * s.beta[c]) * z[c];
              }
            },
        },
        plan.shape);
  }
  return out;
}

absl::StatusOr<NoisyDataset> ApplyNoise(const NoisePlan& plan,
                                        const Matrix& data,
                                        std::uint64_t stream) {
  if (data.cols() != plan.dim) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     absl::StrCat("plan has dimension ", plan.dim,
                                  " but data has ", data.cols(), " columns"));
  }
  NoisyDataset out{data + SampleNoise(plan, data.rows(), stream), plan,
                   DataChecksum(data)};
  return out;
}

absl::StatusOr<double> RealizedCapacity(const NoisePlan& plan,
                                        const CovarianceSpectrum& spectrum) {
  if (spectrum.dim() != plan.dim) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     absl::StrCat("plan has dimension ", plan.dim,
                                  " but spectrum has ", spectrum.dim()));
  }
  return std::visit(
      Overloaded{
          [&](const IsotropicShape& s) -> absl::StatusOr<double> {
            if (!(s.sigma > 0.0)) {
              return MakeError(ErrorCode::kSingularNoise,
                               "isotropic noise variance is zero");
            }
            return CapacityIsotropic(spectrum, s.sigma);
          },
          [&](const EigenDiagonalShape& s) -> absl::StatusOr<double> {
            // Express the data covariance in the plan's eigenbasis; when the
            // plan was calibrated on this spectrum the result is diagonal.
            const Matrix rotated =
                s.basis.Transpose() * spectrum.Reconstruct() * s.basis;
            return WhitenedCapacity(rotated, s.psi);
          },
          [&](const ScaledDiagonalShape& s) -> absl::StatusOr<double> {
            std::vector<double> diag(s.beta);
            for (double& v : diag) v *= s.sigma;
            return WhitenedCapacity(spectrum.Reconstruct(), diag);
          },
      },
      plan.shape);
}

std::string DataChecksum(const Matrix& m) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  const std::uint64_t shape[2] = {m.rows(), m.cols()};
  EVP_DigestUpdate(ctx, shape, sizeof(shape));
  const auto values = m.values();
  EVP_DigestUpdate(ctx, values.data(), values.size() * sizeof(double));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  return absl::BytesToHexString(
      absl::string_view(reinterpret_cast<const char*>(digest), len));
}

}  // namespace infoch
