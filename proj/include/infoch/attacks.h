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

// Reconstruction attacks, metrics, and checks against the MSE floor.

#ifndef INFOCH_ATTACKS_H_
#define INFOCH_ATTACKS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "infoch/channels.h"
#include "infoch/matrix.h"
#include "infoch/model.h"
#include "infoch/simulation.h"
#include "json.hpp"

namespace infoch {

enum class AttackKind { kBiasRatio, kGradientMatching, kBayesGaussian };

absl::string_view AttackKindName(AttackKind kind);
absl::StatusOr<AttackKind> ParseAttackKind(absl::string_view name);

// The attacker's view of one round: the received model and the shared
// update expressed as a gradient, (W_i - W_o) / lr.
struct GradientObservation {
  ModelParams model;
  std::vector<double> gradient;
  std::size_t batch_size = 1;
};

absl::StatusOr<GradientObservation> ObserveSnapshot(
    const ModelParams& architecture, const VictimSnapshot& snapshot,
    double learning_rate, std::size_t batch_size);

// x = (dL/dW_row) / (dL/db_row) on the first layer, using the row with the
// largest bias gradient. Returns a 1 x d matrix.
absl::StatusOr<Matrix> BiasRatioInvert(const GradientObservation& obs);

// For a softmax output with one sample, the true class is the only output
// whose bias gradient is negative.
absl::StatusOr<std::size_t> InferLabel(const GradientObservation& obs);

struct GradientMatchingOptions {
  std::size_t iterations = 500;
  double step_size = 0.01;
  std::uint64_t seed = 0;
  // Independent N(0, I) starts, each run for `iterations` steps; the best
  // objective wins.
  std::size_t restarts = 8;
  // Classification label; inferred from the observation when absent.
  std::optional<std::size_t> label;
  // Regression target, required for linear models.
  std::vector<double> target;
};

struct GradientMatchingResult {
  Matrix reconstructed;
  double objective = 0.0;
  std::size_t best_iteration = 0;
  std::size_t best_restart = 0;
};

// Sign descent on 1 - cos(grad(dummy), observed) from an N(0, I) start.
absl::StatusOr<GradientMatchingResult> GradientMatchingInvert(
    const GradientObservation& obs, const GradientMatchingOptions& options);

struct BayesResult {
  double mse = 0.0;   // per dimension
  double info = 0.0;  // nats
};

// Posterior-mean error and mutual information of D~ = D + xi with
// independent diagonal Gaussians.
absl::StatusOr<BayesResult> BayesGaussianOracle(
    std::span<const double> prior_var, std::span<const double> noise_var);
// Same for full covariances.
absl::StatusOr<BayesResult> BayesGaussianOracle(const Matrix& prior_cov,
                                                const Matrix& noise_cov);

struct Metrics {
  double mse = 0.0;
  double psnr_db = 0.0;
  bool psnr_infinite = false;
  double cosine = 0.0;
};

absl::StatusOr<Metrics> ComputeMetrics(const Matrix& reconstructed,
                                       const Matrix& target,
                                       double data_range);

struct ReconstructionReport {
  AttackKind attack = AttackKind::kBiasRatio;
  std::size_t target_index = 0;
  std::size_t round = 0;
  Matrix reconstructed;
  Matrix target;
  double mse_per_dim = 0.0;
  double psnr_db = 0.0;
  bool psnr_infinite = false;
  double cosine = 0.0;
  double bound = 0.0;
  std::size_t iterations = 0;
};

struct BoundCheck {
  bool pass = false;
  // mse - bound.
  double margin = 0.0;
};

BoundCheck VerifyBound(double mse, double bound, double slack);
BoundCheck VerifyBound(const ReconstructionReport& report, double slack);

struct TraceAttackOptions {
  AttackKind attack = AttackKind::kBiasRatio;
  // Zero means every snapshot.
  std::size_t targets = 0;
  // Consecutive targets pooled into one trial: the trial MSE is their mean
  // and the floor uses their joint entropy and ledger total.
  std::size_t group_size = 1;
  std::uint64_t seed = 0;
  std::size_t iterations = 500;
  double step_size = 0.01;
  std::size_t restarts = 8;
  double slack = 1e-6;
  double min_pass_rate = 0.9;
};

struct TraceAttackInput {
  ModelParams architecture;
  VictimRecord record;
  // Covariance of the data distribution (Gaussian entropy surrogate).
  Matrix data_covariance;
  // Victim plan; absent when undefended.
  std::optional<NoisePlan> plan;
};

struct TrialResult {
  std::size_t first_target = 0;
  std::size_t count = 0;
  double mse = 0.0;
  double info = 0.0;
  double bound = 0.0;
  BoundCheck check;
};

struct TraceAttackResult {
  std::vector<ReconstructionReport> reports;
  std::vector<TrialResult> trials;
  double pass_rate = 0.0;
  double median_mse = 0.0;
  double median_bound = 0.0;
  // Bayes only: the closed-form reference for the run's channel.
  std::optional<BayesResult> bayes;
  bool passed = false;
};

absl::StatusOr<TraceAttackResult> AttackTrace(const TraceAttackInput& input,
                                              const TraceAttackOptions& options);

nlohmann::json ReportsToJson(const std::vector<ReconstructionReport>& reports);
std::string SummaryCsvHeader();
// One row: attack, kind, kappa, median_mse, bound, pass_rate.
std::string SummaryCsvRow(AttackKind attack, const std::optional<NoisePlan>& plan,
                          const TraceAttackResult& result);

double Median(std::vector<double> values);

}  // namespace infoch

#endif  // INFOCH_ATTACKS_H_
