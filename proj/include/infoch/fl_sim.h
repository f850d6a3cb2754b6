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

// Deterministic desk-scale federated learning.

#ifndef INFOCH_FL_SIM_H_
#define INFOCH_FL_SIM_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "infoch/channels.h"
#include "infoch/matrix.h"
#include "infoch/model.h"
#include "infoch/rng.h"

namespace infoch {

struct TrainingSchedule {
  std::size_t local_steps = 1;  // E
  std::size_t total_steps = 1;  // n
  double learning_rate = 0.1;
  std::size_t batch_size = 1;
  std::uint64_t seed = 0;

  std::size_t rounds() const { return total_steps / local_steps; }
};

absl::Status ValidateSchedule(const TrainingSchedule& schedule);

// Mini-batches drawn without replacement within an epoch; a fresh
// permutation starts whenever fewer than `batch` indices remain.
class BatchSampler {
 public:
  BatchSampler(std::size_t num_samples, std::size_t batch, std::uint64_t seed,
               std::uint64_t stream);

  std::vector<std::size_t> Next();

 private:
  void Reshuffle();

  std::size_t batch_;
  CounterRng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_;
};

struct StepRecord {
  std::vector<double> params_in;
  std::vector<double> params_out;
  std::vector<std::size_t> batch;
};

// `steps` SGD steps with batches from `sampler`. A zero learning rate leaves
// the parameters untouched.
absl::Status LocalRound(ModelParams& model, const LabeledData& data,
                        double learning_rate, std::size_t steps,
                        BatchSampler& sampler,
                        std::vector<StepRecord>* record = nullptr);

struct ClientUpdate {
  std::size_t client_id = 0;
  std::vector<double> params;
  double weight = 0.0;
};

// Weighted mean, reduced in ascending client-id order.
absl::StatusOr<std::vector<double>> FedAvg(std::vector<ClientUpdate> updates);

class BudgetLedger {
 public:
  struct Entry {
    std::size_t step = 0;
    double nats = 0.0;
  };

  BudgetLedger(double kappa, std::size_t total_steps)
      : kappa_(kappa), total_steps_(total_steps) {}

  // BudgetExceeded if the charge exceeds kappa or the running total
  // exceeds n * kappa (both with 1e-8 relative slack).
  absl::Status Charge(std::size_t step, double nats);

  double kappa() const { return kappa_; }
  std::size_t total_steps() const { return total_steps_; }
  double total() const { return total_; }
  const std::vector<Entry>& entries() const { return entries_; }
  // Sum of the charges whose step lies in [first, last).
  double TotalForSteps(std::size_t first, std::size_t last) const;

 private:
  double kappa_;
  std::size_t total_steps_;
  double total_ = 0.0;
  std::vector<Entry> entries_;
};

// Labelled Gaussian mixture: class c has mean mu_c and shared covariance
// `within`. Sample r belongs to class r mod classes.
struct GaussianMixture {
  std::vector<std::vector<double>> means;
  Matrix within;

  static absl::StatusOr<GaussianMixture> Create(std::size_t dim,
                                                std::size_t classes,
                                                double separation,
                                                Matrix within);
  std::size_t dim() const { return within.rows(); }
  std::size_t classes() const { return means.size(); }
  // Covariance of the marginal (label-free) distribution.
  Matrix MarginalCovariance() const;
  LabeledData Sample(std::size_t count, std::uint64_t seed,
                     std::uint64_t stream) const;
};

struct FederationConfig {
  ModelKind model_kind = ModelKind::kLogisticRegression;
  std::vector<std::size_t> hidden;
  std::size_t outputs = 2;
  std::vector<LabeledData> clients;
  // Empty means uniform.
  std::vector<double> weights;
  std::size_t victim = 0;
  std::optional<NoisePlan> victim_plan;
  TrainingSchedule schedule;
  LabeledData test;
};

struct RoundMetrics {
  std::size_t round = 0;
  double train_loss = 0.0;
  double test_acc = 0.0;
  std::optional<double> ledger_total;
};

// What the attacker sees of the victim in one round.
struct VictimSnapshot {
  std::size_t round = 0;
  std::vector<double> params_in;
  std::vector<double> params_out;
  // Victim rows used during the round, in step order.
  std::vector<std::size_t> batch_rows;
};

struct FederationResult {
  std::vector<RoundMetrics> trace;
  std::vector<double> final_params;
  std::vector<VictimSnapshot> victim_snapshots;
  std::size_t aggregations = 0;
  std::optional<BudgetLedger> ledger;
  // The victim's training set as seen by the model (noisy if defended).
  LabeledData victim_train;
  std::string victim_original_checksum;
};

// The global model before round 0 and each client's batch sampler, as used
// by RunFederation.
absl::StatusOr<ModelParams> InitialModel(const FederationConfig& config);
BatchSampler ClientSampler(const FederationConfig& config, std::size_t client);

absl::StatusOr<FederationResult> RunFederation(const FederationConfig& config);

struct TaylorReport {
  // Mixed Jacobian d(grad_W)/d(data), one row per parameter.
  Matrix jacobian;
  double discrepancy = 0.0;
  double discrepancy_half = 0.0;
  // discrepancy / discrepancy_half; near 4 for a second-order remainder.
  double ratio = 0.0;
};

using GradientFn =
    std::function<absl::StatusOr<std::vector<double>>(std::span<const double>)>;

// Central finite differences of `grad` over the data coordinates.
absl::StatusOr<Matrix> MixedJacobian(const GradientFn& grad,
                                     std::span<const double> point,
                                     double h = 1e-5);

// ||grad(D + xi) - grad(D) - J xi|| for xi and xi / 2.
absl::StatusOr<TaylorReport> TaylorNoiseCheck(const GradientFn& grad,
                                              std::span<const double> point,
                                              std::span<const double> xi);

// Convenience wrapper: gradient of `model` on a single labelled sample.
GradientFn SampleGradientFn(const ModelParams& model, std::size_t label,
                            std::span<const double> target = {});

}  // namespace infoch

#endif  // INFOCH_FL_SIM_H_
