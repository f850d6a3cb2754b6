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
#include <numbers>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace infoch {
namespace {

using ::infoch::testing::BruteLogDet;
using ::infoch::testing::HasErrorCode;
using ::infoch::testing::RandomSpd;
using ::infoch::testing::RandomSpectrum;

const double kE2m1 = std::expm1(2.0);
const double kLn2 = std::numbers::ln2;

CovarianceSpectrum Spectrum(std::vector<double> eigenvalues) {
  std::sort(eigenvalues.rbegin(), eigenvalues.rend());
  const std::size_t d = eigenvalues.size();
  return {std::move(eigenvalues), Matrix::Identity(d)};
}

// 1/2 [ln det(Sigma + noise) - ln det(noise)] by Gaussian elimination.
double BruteCapacity(const Matrix& cov, const Matrix& noise) {
  return 0.5 * (BruteLogDet(cov + noise) - BruteLogDet(noise));
}

TEST(CapacityIsotropicTest, ClosedForms) {
  EXPECT_NEAR(*CapacityIsotropic(Spectrum({1, 1}), 1.0), kLn2, 1e-15);
  EXPECT_NEAR(*CapacityIsotropic(Spectrum({3, 1}), 1.0),
              0.5 * (std::log(4.0) + std::log(2.0)), 1e-15);
  EXPECT_NEAR(*CapacityIsotropic(Spectrum({3, 1}), 1.0),
              BruteCapacity(Matrix{{3, 0}, {0, 1}}, Matrix::Identity(2)),
              1e-14);
  EXPECT_DOUBLE_EQ(*CapacityIsotropic(Spectrum({0, 0}), 2.0), 0.0);
}

TEST(CapacityIsotropicTest, ToyParameterSpace) {
  // Gradient 2WD at W=2 with Var(D)=1 has variance 16.
  EXPECT_NEAR(*CapacityIsotropic(Spectrum({16}), 16.0 / kE2m1), 1.0, 1e-12);
}

TEST(CapacityIsotropicTest, RejectsBadSigma) {
  EXPECT_THAT(CapacityIsotropic(Spectrum({1}), 0.0),
              HasErrorCode(ErrorCode::kNonPositiveSigma));
  EXPECT_THAT(CapacityIsotropic(Spectrum({1}), -1.0),
              HasErrorCode(ErrorCode::kNonPositiveSigma));
}

TEST(CapacityIsotropicTest, Monotonicity) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto lambda = RandomSpectrum(1 + trial % 10, gen);
    const auto spectrum = Spectrum(lambda);
    const double sigma = 0.7;
    const double base = *CapacityIsotropic(spectrum, sigma);
    EXPECT_GT(base, *CapacityIsotropic(spectrum, sigma * 1.01));
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      auto bumped = spectrum;
      bumped.eigenvalues[i] *= 1.01;
      EXPECT_GT(*CapacityIsotropic(bumped, sigma), base);
    }
  }
}

TEST(SolveIsotropicTest, ClosedForms) {
  EXPECT_NEAR(*SolveIsotropic(Spectrum({1, 1}), kLn2), 1.0, 1e-12);
  EXPECT_NEAR(*SolveIsotropic(Spectrum({1}), 1.0), 1.0 / kE2m1, 1e-13);
  const auto spectrum = Spectrum({4, 1});
  const double sigma = *SolveIsotropic(spectrum, 2.0);
  EXPECT_NEAR(*CapacityIsotropic(spectrum, sigma), 2.0, 2e-9);
}

TEST(SolveIsotropicTest, Errors) {
  EXPECT_THAT(SolveIsotropic(Spectrum({0, 0}), 1.0),
              HasErrorCode(ErrorCode::kZeroSpectrum));
  EXPECT_THAT(SolveIsotropic(Spectrum({1}), 0.0),
              HasErrorCode(ErrorCode::kNonPositiveKappa));
  // ln sigma would be about -2e4: not representable as a double.
  EXPECT_THAT(SolveIsotropic(Spectrum({1}), 1e4),
              HasErrorCode(ErrorCode::kNoiseUnderflow));
  auto log_sigma = SolveIsotropicLogSigma(Spectrum({1}), 1e4);
  ASSERT_TRUE(log_sigma.ok());
  EXPECT_NEAR(*log_sigma, -2e4, 1e-6);
}

TEST(SolveIsotropicTest, RoundTripProperty) {
  std::mt19937_64 gen(41);
  std::uniform_int_distribution<int> dim(1, 64);
  for (int trial = 0; trial < 100; ++trial) {
    const auto spectrum = Spectrum(RandomSpectrum(dim(gen), gen));
    for (double kappa : {0.01, 1.0, 100.0, 1e4}) {
      auto log_sigma = SolveIsotropicLogSigma(spectrum, kappa);
      ASSERT_TRUE(log_sigma.ok()) << log_sigma.status();
      const double achieved =
          CapacityIsotropicAtLogSigma(spectrum.eigenvalues, *log_sigma);
      EXPECT_NEAR(achieved / kappa, 1.0, 1e-8);
    }
  }
}

TEST(SolveIsotropicTest, ZeroEigenvaluesContributeNothing) {
  const double with_zero = *SolveIsotropic(Spectrum({2, 1, 0}), 0.5);
  const double without = *SolveIsotropic(Spectrum({2, 1}), 0.5);
  EXPECT_NEAR(with_zero, without, 1e-12 * without);
}

TEST(WhiteNoiseTest, ClosedForms) {
  auto psi = WhiteNoiseEigenvalues(Spectrum({4, 1}), kLn2);
  ASSERT_TRUE(psi.ok());
  EXPECT_NEAR((*psi)[0], 4.0, 1e-14);
  EXPECT_NEAR((*psi)[1], 1.0, 1e-15);

  psi = WhiteNoiseEigenvalues(Spectrum({4, 1}), 2.0);
  ASSERT_TRUE(psi.ok());
  EXPECT_NEAR((*psi)[0], 4.0 / kE2m1, 1e-15);
  EXPECT_NEAR((*psi)[1], 1.0 / kE2m1, 1e-15);
  double total = 0.0;
  for (int i = 0; i < 2; ++i) {
    total += 0.5 * std::log(((i == 0 ? 4.0 : 1.0) + (*psi)[i]) / (*psi)[i]);
  }
  EXPECT_NEAR(total, 2.0, 1e-14);
}

TEST(WhiteNoiseTest, EqualAllocationAndMonotonicity) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto lambda = RandomSpectrum(1 + trial % 12, gen);
    const auto spectrum = Spectrum(lambda);
    const double kappa = 0.3 + trial;
    auto psi = WhiteNoiseEigenvalues(spectrum, kappa);
    ASSERT_TRUE(psi.ok());
    const double share = kappa / static_cast<double>(lambda.size());
    double total = 0.0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      const double c = 0.5 * std::log1p(spectrum.eigenvalues[i] / (*psi)[i]);
      EXPECT_NEAR(c, share, 1e-10);
      total += c;
    }
    EXPECT_NEAR(total, kappa, 1e-10 * std::max(1.0, kappa));
    auto larger = WhiteNoiseEigenvalues(spectrum, kappa * 2.0);
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      EXPECT_LT((*larger)[i], (*psi)[i]);
    }
  }
}

TEST(WhiteNoiseTest, ZeroEigenvaluesGetZeroNoise) {
  auto psi = WhiteNoiseEigenvalues(Spectrum({3, 1, 0}), 1.0);
  ASSERT_TRUE(psi.ok());
  EXPECT_EQ((*psi)[2], 0.0);
  const double c0 = 0.5 * std::log1p(3.0 / (*psi)[0]);
  const double c1 = 0.5 * std::log1p(1.0 / (*psi)[1]);
  EXPECT_NEAR(c0 + c1, 1.0, 1e-14);
  EXPECT_THAT(WhiteNoiseEigenvalues(Spectrum({1}), -1.0),
              HasErrorCode(ErrorCode::kNonPositiveKappa));
}

TEST(PersonalizedUpperTest, DiagonalIsTight) {
  const std::vector<double> beta = {1, 1};
  auto schur = ComputeSchurSequence(Matrix{{2, 0}, {0, 5}}, beta);
  ASSERT_TRUE(schur.ok());
  EXPECT_NEAR(*PersonalizedCapacityUpper(1.0, *schur), 0.5 * std::log(18.0),
              1e-15);
}

TEST(PersonalizedUpperTest, CorrelatedTwoByTwoDominatesExact) {
  const std::vector<double> beta = {1, 1};
  auto schur = ComputeSchurSequence(Matrix{{2, 1}, {1, 2}}, beta);
  ASSERT_TRUE(schur.ok());
  const double exact = 0.5 * std::log(8.0);
  EXPECT_GE(*PersonalizedCapacityUpper(1.0, *schur), exact);
  EXPECT_GE(*PersonalizedCapacityUpper(1.0, *schur), 1.0397);
}

TEST(PersonalizedUpperTest, DominanceOnRandomMatrices) {
  std::mt19937_64 gen(100);
  std::uniform_real_distribution<double> beta_dist(0.2, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + trial % 8;
    const Matrix cov = RandomSpd(d, gen);
    std::vector<double> beta(d);
    for (double& b : beta) b = beta_dist(gen);
    auto schur = ComputeSchurSequence(cov, beta);
    ASSERT_TRUE(schur.ok());
    for (double sigma : {0.1, 1.0, 10.0}) {
      std::vector<double> diag(beta);
      for (double& v : diag) v *= sigma;
      const double exact = BruteCapacity(cov, Matrix::Diagonal(diag));
      const double upper = *PersonalizedCapacityUpper(sigma, *schur);
      EXPECT_GE(upper, exact - 1e-12) << "trial " << trial;
    }
  }
}

TEST(SolvePersonalizedTest, ReducesToIsotropic) {
  const std::vector<double> ones = {1, 1};
  auto schur = ComputeSchurSequence(Matrix::Identity(2), ones);
  EXPECT_NEAR(*SolvePersonalized(*schur, kLn2), 1.0, 1e-12);

  const std::vector<double> beta = {4, 1};
  schur = ComputeSchurSequence(Matrix{{4, 0}, {0, 1}}, beta);
  EXPECT_NEAR(*SolvePersonalized(*schur, kLn2), 1.0, 1e-12);
}

TEST(SolvePersonalizedTest, RoundTripProperty) {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> beta_dist(0.2, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + trial % 8;
    const Matrix cov = RandomSpd(d, gen);
    std::vector<double> beta(d);
    for (double& b : beta) b = beta_dist(gen);
    auto schur = ComputeSchurSequence(cov, beta);
    ASSERT_TRUE(schur.ok());
    for (double kappa : {0.01, 1.0, 100.0}) {
      auto log_sigma = SolvePersonalizedLogSigma(*schur, kappa);
      ASSERT_TRUE(log_sigma.ok());
      EXPECT_NEAR(PersonalizedCapacityUpperAtLogSigma(*schur, *log_sigma) /
                      kappa,
                  1.0, 1e-8);
    }
  }
}

TEST(SolvePersonalizedTest, Errors) {
  const std::vector<double> ones = {1};
  auto schur = ComputeSchurSequence(Matrix::Identity(1), ones);
  EXPECT_THAT(SolvePersonalized(*schur, 0.0),
              HasErrorCode(ErrorCode::kNonPositiveKappa));
  SchurSequence bad = *schur;
  bad.beta[0] = -1.0;
  EXPECT_THAT(SolvePersonalized(bad, 1.0),
              HasErrorCode(ErrorCode::kNonPositiveBeta));
}

TEST(DpBoundsTest, ExperimentTable) {
  EXPECT_NEAR(*DpNoiseBound(64, 1.0, 0.8 * 0.8), 100.0, 1e-12);
  const double largest = *DpNoiseBound(64, 1.0, 0.2066 * 0.2066);
  EXPECT_NEAR(largest, 1500.0, 1500.0 * 1e-3);
}

TEST(DpBoundsTest, UnitPlugIn) {
  DpParams dp{.epsilon = 1.0,
              .delta = 1.25 / std::numbers::e,
              .clip = 1.0,
              .batch = 1,
              .sigma = 1.0};
  auto bounds = ComputeDpCapacityBounds(dp);
  ASSERT_TRUE(bounds.ok());
  EXPECT_DOUBLE_EQ(bounds->noise_bound, 1.0);
  EXPECT_NEAR(bounds->epsilon_bound, 0.5, 1e-15);
  EXPECT_NEAR(bounds->Tightest(), 0.5, 1e-15);
}

TEST(DpBoundsTest, MinimalSigmaReproducesEpsilonBound) {
  for (double eps : {0.1, 1.0, 4.0}) {
    for (double delta : {1e-5, 1e-3, 0.2}) {
      for (std::int64_t batch : {1, 16, 256}) {
        const double sigma = *MinimalDpSigma(eps, delta, 2.0);
        EXPECT_NEAR(*DpNoiseBound(batch, 2.0, sigma) /
                        *DpEpsilonBound(batch, eps, delta),
                    1.0, 1e-14);
      }
    }
  }
}

TEST(DpBoundsTest, Errors) {
  EXPECT_THAT(DpEpsilonBound(1, 1.0, 1.0),
              HasErrorCode(ErrorCode::kInvalidDelta));
  EXPECT_THAT(DpEpsilonBound(1, 1.0, 0.0),
              HasErrorCode(ErrorCode::kInvalidDelta));
  EXPECT_THAT(DpNoiseBound(0, 1.0, 1.0), HasErrorCode(ErrorCode::kZeroBatch));
  EXPECT_THAT(DpNoiseBound(1, 1.0, 0.0),
              HasErrorCode(ErrorCode::kNonPositiveSigma));
  EXPECT_THAT(DpEpsilonBound(1, -1.0, 0.5),
              HasErrorCode(ErrorCode::kInvalidDpParams));
}

TEST(BatchScaledCapacityTest, Values) {
  const auto spectrum = Spectrum({3, 1, 0.5});
  EXPECT_DOUBLE_EQ(*BatchScaledCapacity(spectrum, 0.7, 1),
                   *CapacityIsotropic(spectrum, 0.7));
  EXPECT_NEAR(*BatchScaledCapacity(Spectrum({1}), 1.0, 4),
              0.5 * std::log(1.25), 1e-15);
  EXPECT_LT(*BatchScaledCapacity(spectrum, 1.0, 8),
            *BatchScaledCapacity(spectrum, 1.0, 2));
  EXPECT_THAT(BatchScaledCapacity(spectrum, 1.0, 0),
              HasErrorCode(ErrorCode::kZeroBatch));
  EXPECT_THAT(BatchScaledCapacity(spectrum, 0.0, 1),
              HasErrorCode(ErrorCode::kNonPositiveSigma));
}

TEST(CompressionDeltaTest, DiagonalCase) {
  const std::vector<std::size_t> dims = {1};
  auto delta = ComputeCompressionDelta(Matrix{{2, 0}, {0, 2}}, dims, 1.0);
  ASSERT_TRUE(delta.ok());
  EXPECT_NEAR(delta->nats, 0.5 * std::log(3.0), 1e-15);
  EXPECT_FALSE(delta->full_compression);
}

TEST(CompressionDeltaTest, LargeEigenvalueDimensionMattersMore) {
  const Matrix cov{{10, 0}, {0, 1}};
  const std::vector<std::size_t> big = {0};
  const std::vector<std::size_t> small = {1};
  EXPECT_GT(ComputeCompressionDelta(cov, big, 1.0)->nats,
            ComputeCompressionDelta(cov, small, 1.0)->nats);
}

TEST(CompressionDeltaTest, MatchesDeterminantDifference) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + trial % 7;
    const Matrix cov = RandomSpd(d, gen);
    std::vector<std::size_t> comp;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < d; ++i) {
      ((gen() % 3 == 0) ? comp : kept).push_back(i);
    }
    if (comp.empty()) comp.push_back(kept.back()), kept.pop_back();
    if (kept.empty()) kept.push_back(comp.back()), comp.pop_back();
    const double sigma = 0.5 + trial % 3;
    auto delta = ComputeCompressionDelta(cov, comp, sigma);
    ASSERT_TRUE(delta.ok());
    const double full =
        BruteCapacity(cov, sigma * Matrix::Identity(d));
    const double kept_cap = BruteCapacity(
        cov.Select(kept, kept), sigma * Matrix::Identity(kept.size()));
    EXPECT_NEAR(delta->nats, full - kept_cap, 1e-10);
    EXPECT_GE(delta->nats, 0.0);
  }
}

TEST(CompressionDeltaTest, FullAndEmptySets) {
  const Matrix cov{{2, 0.5}, {0.5, 1}};
  const std::vector<std::size_t> all = {0, 1};
  auto full = ComputeCompressionDelta(cov, all, 1.0);
  ASSERT_TRUE(full.ok());
  EXPECT_TRUE(full->full_compression);
  EXPECT_NEAR(full->nats, BruteCapacity(cov, Matrix::Identity(2)), 1e-14);
  EXPECT_THAT(ComputeCompressionDelta(cov, {}, 1.0),
              HasErrorCode(ErrorCode::kEmptyCompressionSet));
  const std::vector<std::size_t> out_of_range = {5};
  EXPECT_THAT(ComputeCompressionDelta(cov, out_of_range, 1.0),
              HasErrorCode(ErrorCode::kInvalidArgument));
}

TEST(MseLowerBoundTest, Values) {
  const double h_unit = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  EXPECT_NEAR(*MseLowerBound({h_unit, 1, 0.0}), 1.0, 1e-15);
  EXPECT_NEAR(*MseLowerBound({h_unit, 1, 1.0}), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(*MseLowerBound({h_unit, 1, 0.5 * kLn2}), 0.5, 1e-15);
  EXPECT_EQ(*MseLowerBound({h_unit, 1, INFINITY}), 0.0);
  EXPECT_THAT(MseLowerBound({h_unit, 0, 0.0}),
              HasErrorCode(ErrorCode::kInvalidArgument));
}

TEST(MseLowerBoundTest, TightForScalarGaussianChannels) {
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double prior = std::pow(10.0, -2.0 + 0.4 * i);
      const double noise = std::pow(10.0, -2.0 + 0.4 * j);
      const double h = *GaussianEntropy(Spectrum({prior}));
      const double info = 0.5 * std::log1p(prior / noise);
      const double bayes = prior * noise / (prior + noise);
      EXPECT_NEAR(*MseLowerBound({h, 1, info}), bayes, 1e-9 * bayes);
    }
  }
}

TEST(GaussianEntropyTest, Values) {
  const double half_log = 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e);
  EXPECT_NEAR(*GaussianEntropy(Spectrum({1})), half_log, 1e-15);
  EXPECT_NEAR(*GaussianEntropy(Spectrum({1, 1})), 2.0 * half_log, 1e-15);
  EXPECT_NEAR(*GaussianEntropy(Spectrum({std::exp(2.0)})), half_log + 1.0,
              1e-15);
  EXPECT_THAT(GaussianEntropy(Spectrum({1, 0})),
              HasErrorCode(ErrorCode::kDegenerateDistribution));
}

TEST(UnitsTest, BitsConversion) {
  EXPECT_DOUBLE_EQ(NatsToBits(kLn2), 1.0);
  EXPECT_DOUBLE_EQ(BitsToNats(1.0), kLn2);
}

}  // namespace
}  // namespace infoch
