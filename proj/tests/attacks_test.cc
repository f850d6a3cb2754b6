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

#include "infoch/attacks.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "infoch/capacity.h"
#include "infoch/fl_sim.h"
#include "infoch/simulation.h"
#include "infoch/spectral.h"
#include "test_util.h"

namespace infoch {
namespace {

using ::infoch::testing::HasErrorCode;
using ::infoch::testing::RandomSpd;

TEST(MetricsTest, Examples) {
  auto same = ComputeMetrics(Matrix{{1, 2}}, Matrix{{1, 2}}, 1.0);
  ASSERT_TRUE(same.ok());
  EXPECT_EQ(same->mse, 0.0);
  EXPECT_TRUE(same->psnr_infinite);
  EXPECT_NEAR(same->cosine, 1.0, 1e-15);

  auto orth = ComputeMetrics(Matrix{{1, 0}}, Matrix{{0, 1}}, 1.0);
  EXPECT_EQ(orth->mse, 1.0);
  EXPECT_EQ(orth->cosine, 0.0);
  EXPECT_FALSE(orth->psnr_infinite);

  auto psnr = ComputeMetrics(Matrix{{0.1}}, Matrix{{0.0}}, 1.0);
  EXPECT_NEAR(psnr->mse, 0.01, 1e-15);
  EXPECT_NEAR(psnr->psnr_db, 20.0, 1e-12);

  EXPECT_EQ(ComputeMetrics(Matrix{{0, 0}}, Matrix{{1, 1}}, 1.0)->cosine, 0.0);
  EXPECT_THAT(ComputeMetrics(Matrix{{1}}, Matrix{{1, 2}}, 1.0),
              HasErrorCode(ErrorCode::kShapeMismatch));
  EXPECT_THAT(ComputeMetrics(Matrix{{1}}, Matrix{{1}}, 0.0),
              HasErrorCode(ErrorCode::kInvalidArgument));
}

TEST(MetricsTest, Sanity) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  double prev_psnr = INFINITY;
  for (int trial = 0; trial < 50; ++trial) {
    Matrix a(2, 3);
    Matrix b(2, 3);
    for (double& v : a.values()) v = normal(gen);
    for (double& v : b.values()) v = normal(gen);
    const Metrics ab = *ComputeMetrics(a, b, 2.0);
    const Metrics ba = *ComputeMetrics(b, a, 2.0);
    EXPECT_EQ(ab.cosine, ba.cosine);
    EXPECT_GE(ab.cosine, -1.0);
    EXPECT_LE(ab.cosine, 1.0);
    EXPECT_GT(ab.mse, 0.0);
    EXPECT_EQ(ComputeMetrics(a, a, 2.0)->mse, 0.0);
    // Larger error, lower PSNR.
    const Matrix c{{0.0}};
    const double err = 0.01 * (trial + 1);
    const Metrics m = *ComputeMetrics(Matrix{{err}}, c, 1.0);
    EXPECT_LT(m.psnr_db, prev_psnr);
    prev_psnr = m.psnr_db;
  }
  Matrix a{{1.0, 2.0}};
  Matrix b{{1.0, std::nextafter(2.0, 3.0)}};
  EXPECT_GT(ComputeMetrics(a, b, 1.0)->mse, 0.0);
}

TEST(BayesOracleTest, Examples) {
  const std::vector<double> one = {1.0};
  auto r = BayesGaussianOracle(one, one);
  ASSERT_TRUE(r.ok());
  EXPECT_DOUBLE_EQ(r->mse, 0.5);
  EXPECT_NEAR(r->info, 0.5 * std::log(2.0), 1e-15);

  const std::vector<double> prior = {3.0};
  const std::vector<double> huge = {1e12};
  r = BayesGaussianOracle(prior, huge);
  EXPECT_NEAR(r->mse, 3.0, 1e-10);
  EXPECT_NEAR(r->info, 0.0, 1e-11);

  const std::vector<double> zero = {0.0};
  EXPECT_THAT(BayesGaussianOracle(one, zero),
              HasErrorCode(ErrorCode::kNonPositiveVariance));
  EXPECT_THAT(BayesGaussianOracle(zero, one),
              HasErrorCode(ErrorCode::kNonPositiveVariance));
}

TEST(BayesOracleTest, TightAgainstFloorAtDimensionOne) {
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const std::vector<double> prior = {std::pow(10.0, -2.0 + 0.45 * i)};
      const std::vector<double> noise = {std::pow(10.0, -2.0 + 0.45 * j)};
      const BayesResult r = *BayesGaussianOracle(prior, noise);
      const double h =
          *GaussianEntropy({prior, Matrix::Identity(1)});
      const double bound = *MseLowerBound({h, 1, r.info});
      const BoundCheck check = VerifyBound(r.mse, bound, 0.0);
      EXPECT_TRUE(check.pass || std::abs(check.margin) <= 1e-9 * r.mse);
      EXPECT_LE(std::abs(check.margin), 1e-9 * std::max(1.0, r.mse));
    }
  }
}

TEST(BayesOracleTest, FullCovarianceMatchesDiagonal) {
  const std::vector<double> prior = {4.0, 1.0, 0.25};
  const std::vector<double> noise = {1.0, 2.0, 0.5};
  const BayesResult diag = *BayesGaussianOracle(prior, noise);
  const BayesResult full =
      *BayesGaussianOracle(Matrix::Diagonal(prior), Matrix::Diagonal(noise));
  EXPECT_NEAR(full.mse, diag.mse, 1e-14);
  EXPECT_NEAR(full.info, diag.info, 1e-14);
}

TEST(BayesOracleTest, DominatesFloorForCorrelatedGaussians) {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t d = 1 + trial % 6;
    const Matrix prior = RandomSpd(d, gen);
    const Matrix noise = RandomSpd(d, gen);
    const BayesResult r = *BayesGaussianOracle(prior, noise);
    const double h = *GaussianEntropy(*Eigendecompose(prior));
    EXPECT_GE(r.mse, *MseLowerBound({h, d, r.info}) * (1 - 1e-9));
  }
}

TEST(VerifyBoundTest, Examples) {
  ReconstructionReport report;
  report.mse_per_dim = 0.5;
  report.bound = 0.5;
  BoundCheck check = VerifyBound(report, 0.0);
  EXPECT_TRUE(check.pass);
  EXPECT_EQ(check.margin, 0.0);
  report.mse_per_dim = 1e-20;
  report.bound = *MseLowerBound({1.0, 1, INFINITY});
  EXPECT_TRUE(VerifyBound(report, 0.0).pass);
  EXPECT_FALSE(VerifyBound(0.4, 0.5, 0.1).pass);
  EXPECT_TRUE(VerifyBound(0.45, 0.5, 0.1).pass);
}

GradientObservation Observe(const ModelParams& model, const LabeledData& one) {
  return {model, *model.Gradient(one), 1};
}

TEST(BiasRatioTest, ExactOnUndefendedSingleSamples) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const ModelKind kind = trial % 3 == 0   ? ModelKind::kLinearRegression
                           : trial % 3 == 1 ? ModelKind::kLogisticRegression
                                            : ModelKind::kMlp;
    const std::size_t d = 2 + trial % 7;
    auto model = ModelParams::Create(
        kind, d, 3,
        kind == ModelKind::kMlp ? std::vector<std::size_t>{6}
                                : std::vector<std::size_t>{});
    model->InitRandom(trial);
    LabeledData one;
    one.features = Matrix(1, d);
    for (double& v : one.features.values()) v = normal(gen);
    one.labels = {static_cast<std::size_t>(trial % 3)};
    auto x = BiasRatioInvert(Observe(*model, one));
    ASSERT_TRUE(x.ok());
    EXPECT_LT(ComputeMetrics(*x, one.features, 1.0)->mse, 1e-10);
  }
}

TEST(BiasRatioTest, DeadNeurons) {
  auto model = ModelParams::Create(ModelKind::kLogisticRegression, 2, 2);
  GradientObservation obs{*model, std::vector<double>(model->size(), 0.0), 1};
  EXPECT_THAT(BiasRatioInvert(obs), HasErrorCode(ErrorCode::kDeadNeurons));
}

TEST(InferLabelTest, NegativeBiasGradientMarksTheClass) {
  auto model = ModelParams::Create(ModelKind::kLogisticRegression, 3, 4);
  model->InitRandom(7);
  for (std::size_t label = 0; label < 4; ++label) {
    LabeledData one{Matrix{{0.3, -1.2, 0.8}}, {label}, {}};
    EXPECT_EQ(*InferLabel(Observe(*model, one)), label);
  }
}

LabeledData RegressionSample(std::span<const double> x, double y) {
  return {Matrix::Row(x), {}, Matrix{{y}}};
}

TEST(GradientMatchingTest, SolvesMostUndefendedLinearTargets) {
  // Failures come from targets whose side of the r = 0 hyperplane is rarely
  // hit by an N(0, I) start: the cosine objective flips sign across it.
  std::mt19937_64 gen(6);
  std::normal_distribution<double> normal;
  int solved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    auto model = ModelParams::Create(ModelKind::kLinearRegression, 8, 1);
    model->InitRandom(200 + trial);
    std::vector<double> x(8);
    for (double& v : x) v = normal(gen);
    const double y = normal(gen);
    GradientMatchingOptions options;
    options.seed = trial;
    options.target = {y};
    auto result = GradientMatchingInvert(
        Observe(*model, RegressionSample(x, y)), options);
    ASSERT_TRUE(result.ok());
    if (ComputeMetrics(result->reconstructed, Matrix::Row(x), 1.0)->mse <
        1e-4) {
      ++solved;
    }
  }
  EXPECT_GE(solved, 90);
}

TEST(GradientMatchingTest, SolvesUndefendedLinearRegression) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 5; ++trial) {
    auto model = ModelParams::Create(ModelKind::kLinearRegression, 8, 1);
    model->InitRandom(100 + trial);
    std::vector<double> x(8);
    for (double& v : x) v = normal(gen);
    const double y = normal(gen);
    GradientMatchingOptions options;
    options.seed = trial;
    options.target = {y};
    auto result = GradientMatchingInvert(
        Observe(*model, RegressionSample(x, y)), options);
    ASSERT_TRUE(result.ok());
    EXPECT_LT(ComputeMetrics(result->reconstructed, Matrix::Row(x), 1.0)->mse,
              1e-4)
        << "trial " << trial;
  }
}

TEST(GradientMatchingTest, RespectsFloorUnderNaturalChannel) {
  std::mt19937_64 gen(5);
  const Matrix cov = RandomSpd(8, gen, 0.5);
  const CovarianceSpectrum spectrum = *Eigendecompose(cov);
  const double h = *GaussianEntropy(spectrum);
  const NoisePlan plan = *PlanNatural(spectrum, 0.5, 77);
  const Matrix chol = *Cholesky(cov);
  const Matrix noise = SampleNoise(plan, 30);
  std::normal_distribution<double> normal;
  int passes = 0;
  for (std::size_t t = 0; t < 30; ++t) {
    std::vector<double> z(8);
    for (double& v : z) v = normal(gen);
    const std::vector<double> x = MatVec(chol, z);
    std::vector<double> noisy(x);
    for (std::size_t i = 0; i < 8; ++i) noisy[i] += noise(t, i);
    auto model = ModelParams::Create(ModelKind::kLinearRegression, 8, 1);
    model->InitRandom(t);
    const double y = normal(gen);
    GradientMatchingOptions options;
    options.seed = t;
    options.target = {y};
    auto result = GradientMatchingInvert(
        Observe(*model, RegressionSample(noisy, y)), options);
    ASSERT_TRUE(result.ok());
    const double mse =
        ComputeMetrics(result->reconstructed, Matrix::Row(x), 1.0)->mse;
    const double bound = *MseLowerBound({h, 8, plan.kappa});
    if (VerifyBound(mse, bound, 1e-6).pass) ++passes;
  }
  EXPECT_GE(passes, 27);
}

TEST(GradientMatchingTest, Preconditions) {
  auto model = ModelParams::Create(ModelKind::kLogisticRegression, 2, 2);
  LabeledData one{Matrix{{1, 2}}, {0}, {}};
  GradientMatchingOptions options;
  options.iterations = 0;
  EXPECT_THAT(GradientMatchingInvert(Observe(*model, one), options),
              HasErrorCode(ErrorCode::kInvalidArgument));
  auto linear = ModelParams::Create(ModelKind::kLinearRegression, 2, 1);
  options.iterations = 5;
  EXPECT_THAT(GradientMatchingInvert(
                  Observe(*linear, RegressionSample(one.features.row(0), 1)),
                  options),
              HasErrorCode(ErrorCode::kInvalidArgument));
}

TEST(GradientMatchingTest, DeterministicGivenSeed) {
  auto model = ModelParams::Create(ModelKind::kMlp, 3, 2, {4});
  model->InitRandom(1);
  LabeledData one{Matrix{{0.5, -0.2, 1.0}}, {1}, {}};
  GradientMatchingOptions options;
  options.iterations = 40;
  options.seed = 9;
  auto a = GradientMatchingInvert(Observe(*model, one), options);
  auto b = GradientMatchingInvert(Observe(*model, one), options);
  EXPECT_EQ(a->reconstructed, b->reconstructed);
  EXPECT_EQ(a->objective, b->objective);
}

struct AttackRun {
  Simulation sim;
  FederationResult result;
  TraceAttackInput input;
};

AttackRun RunVictim(std::optional<ChannelKind> channel, double kappa,
                    std::size_t samples, std::uint64_t seed) {
  SimulationConfig c;
  c.dim = 8;
  c.clients = 3;
  c.samples_per_client = samples;
  c.test_samples = 0;
  c.within_variances = {1.0, 0.5, 2.0, 1.5, 0.8, 1.2, 0.6, 1.0};
  c.schedule = {.local_steps = 1,
                .total_steps = samples,
                .learning_rate = 0.1,
                .batch_size = 1,
                .seed = seed};
  c.channel = channel;
  c.kappa = kappa;
  c.beta = {1, 1, 2, 2, 1, 1, 4, 1};
  Simulation sim = *BuildSimulation(c);
  FederationResult result = *RunFederation(sim.federation);
  TraceAttackInput input{*InitialModel(sim.federation),
                         MakeVictimRecord(sim, result), sim.data_covariance,
                         sim.federation.victim_plan};
  return {std::move(sim), std::move(result), std::move(input)};
}

TEST(AttackTraceTest, UndefendedBiasRatioIsExact) {
  const AttackRun run = RunVictim(std::nullopt, 1.0, 30, 1);
  TraceAttackOptions options;
  auto result = AttackTrace(run.input, options);
  ASSERT_TRUE(result.ok()) << result.status();
  ASSERT_EQ(result->reports.size(), 30u);
  for (const auto& r : result->reports) {
    EXPECT_LT(r.mse_per_dim, 1e-10);
    EXPECT_EQ(r.bound, 0.0);
  }
  EXPECT_EQ(result->pass_rate, 1.0);
  EXPECT_TRUE(result->passed);
}

TEST(AttackTraceTest, NaturalChannelPerTargetPassRate) {
  const AttackRun run = RunVictim(ChannelKind::kNatural, 1.0, 30, 2);
  auto result = AttackTrace(run.input, {});
  ASSERT_TRUE(result.ok());
  EXPECT_GE(result->pass_rate, 0.9);
}

TEST(AttackTraceTest, PooledTrialsHoldAtEveryKappa) {
  for (ChannelKind kind : {ChannelKind::kNatural, ChannelKind::kWhite,
                           ChannelKind::kPersonalized}) {
    std::vector<double> medians;
    for (double kappa : {0.5, 1.0, 5.0}) {
      const AttackRun run = RunVictim(kind, kappa, 32 * 30, 3);
      TraceAttackOptions options;
      options.group_size = 32;
      auto result = AttackTrace(run.input, options);
      ASSERT_TRUE(result.ok()) << result.status();
      EXPECT_EQ(result->trials.size(), 30u);
      EXPECT_GE(result->pass_rate, 0.9)
          << ChannelKindName(kind) << " kappa " << kappa;
      medians.push_back(result->median_mse);
    }
    EXPECT_GE(medians[0], medians[1]);
    EXPECT_GE(medians[1], medians[2]);
  }
}

TEST(AttackTraceTest, BiasRatioRecoversNoisyDataConcentration) {
  const AttackRun run = RunVictim(ChannelKind::kNatural, 1.0, 200, 4);
  auto result = AttackTrace(run.input, {});
  ASSERT_TRUE(result.ok());
  double mean = 0.0;
  for (const auto& r : result->reports) mean += r.mse_per_dim;
  mean /= 200.0;
  const double expected = run.input.plan->MeanVariance();
  EXPECT_NEAR(mean / expected, 1.0, 0.15);
  // What it recovers is the noisy row itself.
  const auto& snap = run.input.record.snapshots[0];
  const auto noisy = run.result.victim_train.features.row(snap.batch_rows[0]);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_NEAR(result->reports[0].reconstructed(0, i), noisy[i], 1e-8);
  }
}

TEST(AttackTraceTest, BayesReferenceMatchesClosedForm) {
  const AttackRun run = RunVictim(ChannelKind::kNatural, 1.0, 4, 5);
  TraceAttackOptions options;
  options.attack = AttackKind::kBayesGaussian;
  auto result = AttackTrace(run.input, options);
  ASSERT_TRUE(result.ok());
  const CovarianceSpectrum spectrum = *Eigendecompose(run.sim.data_covariance);
  const double sigma = std::get<IsotropicShape>(run.input.plan->shape).sigma;
  const std::vector<double> noise(8, sigma);
  const BayesResult expected = *BayesGaussianOracle(spectrum.eigenvalues, noise);
  EXPECT_NEAR(result->bayes->mse, expected.mse, 1e-12);
  EXPECT_NEAR(result->bayes->info, 1.0, 1e-8);
  EXPECT_TRUE(result->passed);
  EXPECT_GE(result->trials[0].check.margin, 0.0);
}

TEST(AttackTraceTest, Errors) {
  AttackRun run = RunVictim(ChannelKind::kNatural, 1.0, 8, 6);
  TraceAttackOptions options;
  options.targets = 9;
  EXPECT_THAT(AttackTrace(run.input, options),
              HasErrorCode(ErrorCode::kInvalidArgument));
  options.targets = 0;
  options.group_size = 9;
  EXPECT_THAT(AttackTrace(run.input, options),
              HasErrorCode(ErrorCode::kInvalidArgument));
  // A second epoch revisits samples, so pooled groups would repeat rows.
  run = RunVictim(ChannelKind::kNatural, 1.0, 4, 6);
  run.input.record.snapshots.insert(run.input.record.snapshots.end(),
                                    run.input.record.snapshots.begin(),
                                    run.input.record.snapshots.end());
  options.group_size = 8;
  EXPECT_THAT(AttackTrace(run.input, options),
              HasErrorCode(ErrorCode::kInvalidArgument));
}

TEST(ReportFormatTest, JsonAndCsv) {
  ReconstructionReport r;
  r.reconstructed = Matrix{{1, 2}};
  r.target = Matrix{{1, 2}};
  r.psnr_infinite = true;
  r.cosine = 1.0;
  const auto j = ReportsToJson({r});
  EXPECT_TRUE(j[0]["psnr_db"].is_null());
  EXPECT_EQ(j[0]["attack"], "bias-ratio");
  TraceAttackResult result;
  result.median_mse = 0.25;
  result.median_bound = 0.125;
  result.pass_rate = 1.0;
  EXPECT_EQ(SummaryCsvHeader(), "attack,kind,kappa,median_mse,bound,pass_rate\n");
  EXPECT_EQ(SummaryCsvRow(AttackKind::kBiasRatio, std::nullopt, result),
            "bias-ratio,none,,0.25,0.125,1\n");
}

TEST(AttackKindTest, Names) {
  for (AttackKind k : {AttackKind::kBiasRatio, AttackKind::kGradientMatching,
                       AttackKind::kBayesGaussian}) {
    EXPECT_EQ(*ParseAttackKind(AttackKindName(k)), k);
  }
  EXPECT_THAT(ParseAttackKind("dlg"), HasErrorCode(ErrorCode::kParseError));
}

}  // namespace
}  // namespace infoch
