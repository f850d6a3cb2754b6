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

#include "infoch/simulation.h"

#include <cmath>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "infoch/error.h"
#include "infoch/plan_io.h"
#include "infoch/rng.h"

namespace infoch {
namespace {

using nlohmann::json;

enum SeedPurpose : std::uint64_t {
  kDataSeed = 3,
  kPlanSeed = 4,
};

absl::Status CheckKeys(const json& j, const std::set<std::string>& allowed,
                       absl::string_view where) {
  if (!j.is_object()) {
    return MakeError(ErrorCode::kParseError,
                     absl::StrCat(where, " must be a JSON object"));
  }
  for (const auto& [key, value] : j.items()) {
    if (!allowed.contains(key)) {
      return MakeError(ErrorCode::kParseError,
                       absl::StrCat("unknown key '", key, "' in ", where));
    }
  }
  return absl::OkStatus();
}

template <typename T>
absl::Status Read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return absl::OkStatus();
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    return MakeError(ErrorCode::kParseError,
                     absl::StrCat("bad value for '", key, "': ", e.what()));
  }
  return absl::OkStatus();
}

std::string JsonNumber(double v) {
  if (!std::isfinite(v)) return "null";
  return absl::StrFormat("%.17g", v);
}

}  // namespace

absl::StatusOr<SimulationConfig> SimulationConfigFromJson(const json& j) {
  INFOCH_RETURN_IF_ERROR(CheckKeys(
      j, {"model", "data", "federation", "schedule", "channel", "seed"},
      "config"));
  SimulationConfig c;
  if (j.contains("model")) {
    const json& m = j["model"];
    INFOCH_RETURN_IF_ERROR(CheckKeys(m, {"kind", "hidden"}, "model"));
    std::string kind = std::string(ModelKindName(c.model_kind));
    INFOCH_RETURN_IF_ERROR(Read(m, "kind", kind));
    INFOCH_ASSIGN_OR_RETURN(c.model_kind, ParseModelKind(kind));
    INFOCH_RETURN_IF_ERROR(Read(m, "hidden", c.hidden));
  }
  if (j.contains("data")) {
    const json& d = j["data"];
    INFOCH_RETURN_IF_ERROR(CheckKeys(
        d,
        {"dim", "classes", "separation", "within_variances",
         "samples_per_client", "test_samples"},
        "data"));
    INFOCH_RETURN_IF_ERROR(Read(d, "dim", c.dim));
    INFOCH_RETURN_IF_ERROR(Read(d, "classes", c.classes));
    INFOCH_RETURN_IF_ERROR(Read(d, "separation", c.separation));
    INFOCH_RETURN_IF_ERROR(Read(d, "within_variances", c.within_variances));
    INFOCH_RETURN_IF_ERROR(Read(d, "samples_per_client", c.samples_per_client));
    INFOCH_RETURN_IF_ERROR(Read(d, "test_samples", c.test_samples));
  }
  if (j.contains("federation")) {
    const json& f = j["federation"];
    INFOCH_RETURN_IF_ERROR(
        CheckKeys(f, {"clients", "victim", "weights"}, "federation"));
    INFOCH_RETURN_IF_ERROR(Read(f, "clients", c.clients));
    INFOCH_RETURN_IF_ERROR(Read(f, "victim", c.victim));
    INFOCH_RETURN_IF_ERROR(Read(f, "weights", c.weights));
  }
  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    INFOCH_RETURN_IF_ERROR(CheckKeys(
        s, {"local_steps", "total_steps", "learning_rate", "batch_size"},
        "schedule"));
    INFOCH_RETURN_IF_ERROR(Read(s, "local_steps", c.schedule.local_steps));
    INFOCH_RETURN_IF_ERROR(Read(s, "total_steps", c.schedule.total_steps));
    INFOCH_RETURN_IF_ERROR(Read(s, "learning_rate", c.schedule.learning_rate));
    INFOCH_RETURN_IF_ERROR(Read(s, "batch_size", c.schedule.batch_size));
  }
  if (j.contains("channel")) {
    const json& ch = j["channel"];
    INFOCH_RETURN_IF_ERROR(CheckKeys(ch, {"kind", "kappa", "beta"}, "channel"));
    std::string kind = "none";
    INFOCH_RETURN_IF_ERROR(Read(ch, "kind", kind));
    if (kind != "none") {
      INFOCH_ASSIGN_OR_RETURN(ChannelKind parsed, ParseChannelKind(kind));
      c.channel = parsed;
    }
    INFOCH_RETURN_IF_ERROR(Read(ch, "kappa", c.kappa));
    INFOCH_RETURN_IF_ERROR(Read(ch, "beta", c.beta));
  }
  INFOCH_RETURN_IF_ERROR(Read(j, "seed", c.schedule.seed));
  return c;
}

json SimulationConfigToJson(const SimulationConfig& c) {
  json j;
  j["model"] = {{"kind", std::string(ModelKindName(c.model_kind))},
                {"hidden", c.hidden}};
  j["data"] = {{"dim", c.dim},
               {"classes", c.classes},
               {"separation", c.separation},
               {"within_variances", c.within_variances},
               {"samples_per_client", c.samples_per_client},
               {"test_samples", c.test_samples}};
  j["federation"] = {
      {"clients", c.clients}, {"victim", c.victim}, {"weights", c.weights}};
  j["schedule"] = {{"local_steps", c.schedule.local_steps},
                   {"total_steps", c.schedule.total_steps},
                   {"learning_rate", c.schedule.learning_rate},
                   {"batch_size", c.schedule.batch_size}};
  j["channel"] = {
      {"kind", c.channel ? std::string(ChannelKindName(*c.channel)) : "none"},
      {"kappa", c.kappa},
      {"beta", c.beta}};
  j["seed"] = c.schedule.seed;
  return j;
}

absl::StatusOr<Simulation> BuildSimulation(const SimulationConfig& config) {
  Matrix within;
  if (!config.within_variances.empty()) {
    if (config.within_variances.size() != config.dim) {
      return MakeError(ErrorCode::kDimensionMismatch,
                       "within_variances needs one entry per dimension");
    }
    within = Matrix::Diagonal(config.within_variances);
  }
  INFOCH_ASSIGN_OR_RETURN(
      GaussianMixture mixture,
      GaussianMixture::Create(config.dim, config.classes, config.separation,
                              std::move(within)));
  if (config.samples_per_client == 0) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "samples_per_client must be positive");
  }
  Simulation sim{config, mixture, {}, mixture.MarginalCovariance()};
  FederationConfig& fed = sim.federation;
  fed.model_kind = config.model_kind;
  fed.hidden = config.hidden;
  fed.outputs = config.classes;
  fed.weights = config.weights;
  fed.victim = config.victim;
  fed.schedule = config.schedule;
  const std::uint64_t data_seed = DeriveSeed(config.schedule.seed, kDataSeed);
  for (std::size_t c = 0; c < config.clients; ++c) {
    fed.clients.push_back(
        mixture.Sample(config.samples_per_client, data_seed, c));
  }
  if (config.test_samples > 0) {
    fed.test = mixture.Sample(config.test_samples, data_seed, config.clients);
  }
  if (config.channel.has_value()) {
    const std::uint64_t plan_seed = DeriveSeed(config.schedule.seed, kPlanSeed);
    switch (*config.channel) {
      case ChannelKind::kNatural:
      case ChannelKind::kWhite: {
        INFOCH_ASSIGN_OR_RETURN(CovarianceSpectrum spectrum,
                                Eigendecompose(sim.data_covariance));
        if (*config.channel == ChannelKind::kNatural) {
          INFOCH_ASSIGN_OR_RETURN(
              fed.victim_plan, PlanNatural(spectrum, config.kappa, plan_seed));
        } else {
          INFOCH_ASSIGN_OR_RETURN(
              fed.victim_plan, PlanWhite(spectrum, config.kappa, plan_seed));
        }
        break;
      }
      case ChannelKind::kPersonalized: {
        std::vector<double> beta = config.beta;
        if (beta.empty()) beta.assign(config.dim, 1.0);
        INFOCH_ASSIGN_OR_RETURN(
            fed.victim_plan, PlanPersonalized(sim.data_covariance, beta,
                                              config.kappa, plan_seed));
        break;
      }
    }
  }
  return sim;
}

std::string TraceToJsonl(const std::vector<RoundMetrics>& trace) {
  std::string out;
  for (const RoundMetrics& m : trace) {
    absl::StrAppend(&out, "{\"round\":", m.round,
                    ",\"train_loss\":", JsonNumber(m.train_loss),
                    ",\"test_acc\":", JsonNumber(m.test_acc),
                    ",\"ledger_total\":",
                    m.ledger_total ? JsonNumber(*m.ledger_total) : "null",
                    "}\n");
  }
  return out;
}

std::string TraceToCsv(const std::vector<RoundMetrics>& trace) {
  std::string out = "round,train_loss,test_acc,ledger_total\n";
  for (const RoundMetrics& m : trace) {
    absl::StrAppend(&out, m.round, ",", FormatDouble(m.train_loss), ",",
                    std::isfinite(m.test_acc) ? FormatDouble(m.test_acc) : "",
                    ",", m.ledger_total ? FormatDouble(*m.ledger_total) : "",
                    "\n");
  }
  return out;
}

VictimRecord MakeVictimRecord(const Simulation& sim,
                              const FederationResult& result) {
  VictimRecord record;
  record.learning_rate = sim.config.schedule.learning_rate;
  record.local_steps = sim.config.schedule.local_steps;
  record.batch_size = sim.config.schedule.batch_size;
  record.snapshots = result.victim_snapshots;
  record.clean = sim.federation.clients[sim.config.victim];
  if (result.ledger.has_value()) {
    for (const auto& e : result.ledger->entries()) {
      record.charges.push_back(e.nats);
    }
  }
  return record;
}

json VictimRecordToJson(const VictimRecord& r) {
  json snaps = json::array();
  for (const VictimSnapshot& s : r.snapshots) {
    snaps.push_back({{"round", s.round},
                     {"params_in", s.params_in},
                     {"params_out", s.params_out},
                     {"batch_rows", s.batch_rows}});
  }
  return {{"learning_rate", r.learning_rate},
          {"local_steps", r.local_steps},
          {"batch_size", r.batch_size},
          {"snapshots", std::move(snaps)},
          {"clean_features", MatrixToJson(r.clean.features)},
          {"clean_labels", r.clean.labels},
          {"charges", r.charges}};
}

absl::StatusOr<VictimRecord> VictimRecordFromJson(const json& j) {
  VictimRecord r;
  try {
    r.learning_rate = j.at("learning_rate").get<double>();
    r.local_steps = j.at("local_steps").get<std::size_t>();
    r.batch_size = j.at("batch_size").get<std::size_t>();
    for (const json& s : j.at("snapshots")) {
      VictimSnapshot snap;
      snap.round = s.at("round").get<std::size_t>();
      snap.params_in = s.at("params_in").get<std::vector<double>>();
      snap.params_out = s.at("params_out").get<std::vector<double>>();
      snap.batch_rows = s.at("batch_rows").get<std::vector<std::size_t>>();
      r.snapshots.push_back(std::move(snap));
    }
    INFOCH_ASSIGN_OR_RETURN(r.clean.features,
                            MatrixFromJson(j.at("clean_features")));
    r.clean.labels = j.at("clean_labels").get<std::vector<std::size_t>>();
    r.charges = j.at("charges").get<std::vector<double>>();
  } catch (const json::exception& e) {
    return MakeError(ErrorCode::kParseError,
                     absl::StrCat("bad victim record: ", e.what()));
  }
  return r;
}

}  // namespace infoch
