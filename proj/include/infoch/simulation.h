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

// JSON-configured synthetic federations and their on-disk formats.

#ifndef INFOCH_SIMULATION_H_
#define INFOCH_SIMULATION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "infoch/channels.h"
#include "infoch/fl_sim.h"
#include "infoch/model.h"
#include "infoch/spectral.h"
#include "json.hpp"

namespace infoch {

struct SimulationConfig {
  ModelKind model_kind = ModelKind::kLogisticRegression;
  std::vector<std::size_t> hidden;

  std::size_t dim = 8;
  std::size_t classes = 2;
  double separation = 3.0;
  // Diagonal of the within-class covariance; empty means identity.
  std::vector<double> within_variances;

  std::size_t clients = 4;
  std::size_t samples_per_client = 32;
  std::size_t test_samples = 256;
  std::size_t victim = 0;
  std::vector<double> weights;

  TrainingSchedule schedule;

  // No value means the victim is undefended.
  std::optional<ChannelKind> channel;
  double kappa = 1.0;
  std::vector<double> beta;
};

// Unknown keys are rejected so that typos surface as usage errors.
absl::StatusOr<SimulationConfig> SimulationConfigFromJson(
    const nlohmann::json& j);
nlohmann::json SimulationConfigToJson(const SimulationConfig& config);

struct Simulation {
  SimulationConfig config;
  GaussianMixture mixture;
  FederationConfig federation;
  // Covariance of the data-generating distribution, used both to calibrate
  // the victim's plan and as the Gaussian entropy surrogate.
  Matrix data_covariance;
};

absl::StatusOr<Simulation> BuildSimulation(const SimulationConfig& config);

// One JSON object per line: {round, train_loss, test_acc, ledger_total}.
std::string TraceToJsonl(const std::vector<RoundMetrics>& trace);
std::string TraceToCsv(const std::vector<RoundMetrics>& trace);

// Everything an attack needs from a finished run.
struct VictimRecord {
  double learning_rate = 0.0;
  std::size_t local_steps = 1;
  std::size_t batch_size = 1;
  std::vector<VictimSnapshot> snapshots;
  // Ground truth, kept only for scoring.
  LabeledData clean;
  // Per-step ledger charges; empty when undefended.
  std::vector<double> charges;
};

VictimRecord MakeVictimRecord(const Simulation& sim,
                              const FederationResult& result);
nlohmann::json VictimRecordToJson(const VictimRecord& record);
absl::StatusOr<VictimRecord> VictimRecordFromJson(const nlohmann::json& j);

}  // namespace infoch

#endif  // INFOCH_SIMULATION_H_
