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

#include "infoch/cli.h"

#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "infoch/attacks.h"
#include "infoch/capacity.h"
#include "infoch/channels.h"
#include "infoch/error.h"
#include "infoch/fl_sim.h"
#include "infoch/plan_io.h"
#include "infoch/simulation.h"
#include "infoch/spectral.h"
#include "json.hpp"

#ifndef INFOCH_VERSION
#define INFOCH_VERSION "0.0.0"
#endif

namespace infoch {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr double kAuditSlack = 1e-8;

absl::Status Usage(absl::string_view detail) {
  return MakeError(ErrorCode::kUsage, detail);
}

// Writes `key=value` report lines.
class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}
  void Add(absl::string_view key, double v) {
    out_ << key << "=" << FormatDouble(v) << "\n";
  }
  void Add(absl::string_view key, absl::string_view v) {
    out_ << key << "=" << v << "\n";
  }
  void Add(absl::string_view key, std::size_t v) {
    out_ << key << "=" << v << "\n";
  }
  void AddList(absl::string_view key, std::span<const double> v) {
    std::vector<std::string> parts;
    for (double x : v) parts.push_back(FormatDouble(x));
    out_ << key << "=" << absl::StrJoin(parts, ",") << "\n";
  }

 private:
  std::ostream& out_;
};

absl::StatusOr<std::uint64_t> ResolveSeed(const CLI::Option* flag,
                                          std::uint64_t flag_value,
                                          std::optional<std::uint64_t> config) {
  if (flag->count() > 0) return flag_value;
  if (config.has_value()) return *config;
  const char* env = std::getenv("INFOCH_SEED");
  if (env == nullptr || *env == '\0') return 0;
  std::uint64_t seed = 0;
  if (!absl::SimpleAtoi(env, &seed)) {
    return Usage(absl::StrCat("INFOCH_SEED='", env,
                              "' is not an unsigned 64-bit integer"));
  }
  return seed;
}

absl::StatusOr<std::string> ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Usage(absl::StrCat("cannot open ", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

absl::StatusOr<json> ReadJson(const std::string& path) {
  INFOCH_ASSIGN_OR_RETURN(std::string text, ReadText(path));
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return MakeError(ErrorCode::kParseError,
                     absl::StrCat(path, " is not valid JSON"));
  }
  return j;
}

absl::StatusOr<Matrix> LoadCovariance(const std::string& cov_path,
                                      const std::string& data_path) {
  if (cov_path.empty() == data_path.empty()) {
    return Usage("give exactly one of --cov or --data");
  }
  if (!cov_path.empty()) {
    INFOCH_ASSIGN_OR_RETURN(std::string text, ReadText(cov_path));
    return ParseMatrixCsv(text);
  }
  INFOCH_ASSIGN_OR_RETURN(std::string text, ReadText(data_path));
  INFOCH_ASSIGN_OR_RETURN(Matrix data, ParseMatrixCsv(text));
  return EstimateCovariance(data);
}

absl::StatusOr<std::vector<double>> ParseList(absl::string_view text) {
  std::vector<double> out;
  for (absl::string_view part :
       absl::StrSplit(text, absl::ByAnyChar(",\n"), absl::SkipWhitespace())) {
    double v = 0.0;
    if (!absl::SimpleAtod(absl::StripAsciiWhitespace(part), &v)) {
      return MakeError(ErrorCode::kParseError,
                       absl::StrCat("'", part, "' is not a number"));
    }
    out.push_back(v);
  }
  return out;
}

double FloorOrZero(const CovarianceSpectrum& spectrum, double info) {
  auto h = GaussianEntropy(spectrum);
  if (!h.ok()) return 0.0;  // Degenerate data: no positive floor.
  auto floor = MseLowerBound({*h, spectrum.dim(), info});
  return floor.ok() ? *floor : 0.0;
}

json Manifest(absl::string_view command, std::uint64_t seed, json config,
              std::vector<std::string> outputs) {
  return {{"command", std::string(command)},
          {"version", INFOCH_VERSION},
          {"seed", seed},
          {"config", std::move(config)},
          {"outputs", std::move(outputs)}};
}

absl::Status EnsureDirectory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    return Usage(absl::StrCat("cannot create directory ", dir, ": ",
                              ec.message()));
  }
  return absl::OkStatus();
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string data;
  std::string cov;
  double kappa = 0.0;
  bool bits = false;
  std::string channel = "natural";
  std::string beta;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::string out;
  std::size_t steps = 1;
};

absl::Status RunCalibrate(const CalibrateArgs& a, std::ostream& out) {
  INFOCH_ASSIGN_OR_RETURN(ChannelKind kind, ParseChannelKind(a.channel));
  INFOCH_ASSIGN_OR_RETURN(std::uint64_t seed,
                          ResolveSeed(a.seed_opt, a.seed, std::nullopt));
  INFOCH_ASSIGN_OR_RETURN(Matrix cov, LoadCovariance(a.cov, a.data));
  INFOCH_ASSIGN_OR_RETURN(CovarianceSpectrum spectrum, Eigendecompose(cov));
  const double kappa = a.bits ? BitsToNats(a.kappa) : a.kappa;
  if (!a.beta.empty() && kind != ChannelKind::kPersonalized) {
    return Usage("--beta only applies to the personalized channel");
  }
  NoisePlan plan;
  switch (kind) {
    case ChannelKind::kNatural: {
      INFOCH_ASSIGN_OR_RETURN(plan, PlanNatural(spectrum, kappa, seed));
      break;
    }
    case ChannelKind::kWhite: {
      INFOCH_ASSIGN_OR_RETURN(plan, PlanWhite(spectrum, kappa, seed));
      break;
    }
    case ChannelKind::kPersonalized: {
      std::vector<double> beta(cov.rows(), 1.0);
      if (!a.beta.empty()) {
        INFOCH_ASSIGN_OR_RETURN(std::string text, ReadText(a.beta));
        INFOCH_ASSIGN_OR_RETURN(beta, ParseList(text));
      }
      if (beta.size() != cov.rows()) {
        return Usage(absl::StrCat("--beta has ", beta.size(),
                                  " entries, expected ", cov.rows()));
      }
      INFOCH_ASSIGN_OR_RETURN(plan, PlanPersonalized(cov, beta, kappa, seed));
      break;
    }
  }
  INFOCH_ASSIGN_OR_RETURN(double realized, RealizedCapacity(plan, spectrum));

  Report r(out);
  r.Add("channel", ChannelKindName(kind));
  r.Add("dim", plan.dim);
  r.Add("kappa_nats", kappa);
  if (a.bits) r.Add("kappa_bits", NatsToBits(kappa));
  if (const auto* s = std::get_if<IsotropicShape>(&plan.shape)) {
    r.Add("sigma", s->sigma);
  } else if (const auto* s = std::get_if<EigenDiagonalShape>(&plan.shape)) {
    r.AddList("psi", s->psi);
  } else if (const auto* s = std::get_if<ScaledDiagonalShape>(&plan.shape)) {
    r.Add("sigma", s->sigma);
    r.AddList("beta", s->beta);
  }
  r.Add("realized_capacity_nats", realized);
  if (a.bits) r.Add("realized_capacity_bits", NatsToBits(realized));
  r.Add("steps", a.steps);
  r.Add("mse_floor",
        FloorOrZero(spectrum, static_cast<double>(a.steps) * kappa));
  if (!a.out.empty()) {
    INFOCH_RETURN_IF_ERROR(
        WriteFileAtomic(a.out, PlanToJson(plan).dump(2) + "\n"));
    json config = {{"cov", a.cov},         {"data", a.data},
                   {"kappa_nats", kappa},  {"channel", a.channel},
                   {"beta", a.beta},       {"steps", a.steps}};
    const std::string manifest_path = a.out + ".manifest.json";
    INFOCH_RETURN_IF_ERROR(WriteFileAtomic(
        manifest_path,
        Manifest("calibrate", seed, std::move(config),
                 {fs::path(a.out).filename().string()})
                .dump(2) +
            "\n"));
    r.Add("plan", a.out);
  }
  return absl::OkStatus();
}

// ----------------------------------------------------------------------- dp

struct DpArgs {
  double epsilon = 0.0;
  double delta = 0.0;
  double clip = 1.0;
  std::int64_t batch = 0;
  double sigma = 0.0;
  double noise_std = 0.0;
  CLI::Option* epsilon_opt = nullptr;
  CLI::Option* delta_opt = nullptr;
  CLI::Option* sigma_opt = nullptr;
  CLI::Option* noise_std_opt = nullptr;
};

absl::Status RunDp(const DpArgs& a, std::ostream& out) {
  const bool has_sigma = a.sigma_opt->count() + a.noise_std_opt->count() > 0;
  const bool has_eps = a.epsilon_opt->count() > 0;
  const bool has_delta = a.delta_opt->count() > 0;
  if (has_eps != has_delta) {
    return Usage("--epsilon and --delta go together");
  }
  if (!has_sigma && !has_eps) {
    return Usage("give --sigma (or --noise-std), or --epsilon with --delta");
  }
  Report r(out);
  std::optional<double> noise_bound;
  std::optional<double> eps_bound;
  if (has_sigma) {
    const double sigma = a.noise_std_opt->count() > 0
                             ? a.noise_std * a.noise_std
                             : a.sigma;
    INFOCH_ASSIGN_OR_RETURN(double bound, DpNoiseBound(a.batch, a.clip, sigma));
    noise_bound = bound;
    r.Add("sigma", sigma);
    r.Add("noise_bound_nats", bound);
    r.Add("noise_bound_bits", NatsToBits(bound));
  }
  if (has_eps) {
    INFOCH_ASSIGN_OR_RETURN(double bound,
                            DpEpsilonBound(a.batch, a.epsilon, a.delta));
    INFOCH_ASSIGN_OR_RETURN(double sigma_min,
                            MinimalDpSigma(a.epsilon, a.delta, a.clip));
    eps_bound = bound;
    r.Add("epsilon_bound_nats", bound);
    r.Add("epsilon_bound_bits", NatsToBits(bound));
    r.Add("minimal_dp_sigma", sigma_min);
  }
  if (noise_bound && eps_bound) {
    const double tight = std::min(*noise_bound, *eps_bound);
    r.Add("tightest_nats", tight);
    r.Add("tightest_bits", NatsToBits(tight));
  }
  return absl::OkStatus();
}

// -------------------------------------------------------------------- bound

struct BoundArgs {
  double entropy = 0.0;
  CLI::Option* entropy_opt = nullptr;
  std::string cov;
  std::size_t dim = 0;
  CLI::Option* dim_opt = nullptr;
  double info = 0.0;
  bool bits = false;
};

absl::Status RunBound(const BoundArgs& a, std::ostream& out) {
  const bool has_entropy = a.entropy_opt->count() > 0;
  if (has_entropy == !a.cov.empty()) {
    return Usage("give exactly one of --entropy or --cov");
  }
  double h = a.entropy;
  std::size_t d = a.dim;
  if (has_entropy) {
    if (a.dim_opt->count() == 0) return Usage("--entropy needs --dim");
  } else {
    INFOCH_ASSIGN_OR_RETURN(std::string text, ReadText(a.cov));
    INFOCH_ASSIGN_OR_RETURN(Matrix cov, ParseMatrixCsv(text));
    INFOCH_ASSIGN_OR_RETURN(CovarianceSpectrum spectrum, Eigendecompose(cov));
    INFOCH_ASSIGN_OR_RETURN(h, GaussianEntropy(spectrum));
    if (a.dim_opt->count() > 0 && a.dim != spectrum.dim()) {
      return Usage(absl::StrCat("--dim ", a.dim, " does not match the ",
                                spectrum.dim(), "-dimensional covariance"));
    }
    d = spectrum.dim();
  }
  const double info = a.bits ? BitsToNats(a.info) : a.info;
  INFOCH_ASSIGN_OR_RETURN(double floor, MseLowerBound({h, d, info}));
  Report r(out);
  r.Add("entropy_nats", h);
  r.Add("dim", d);
  r.Add("info_nats", info);
  r.Add("mse_floor", floor);
  return absl::OkStatus();
}

// ----------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string config;
  std::string manifest;
  std::string out;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
};

json ModelJson(const ModelParams& architecture, std::span<const double> p) {
  return {{"kind", std::string(ModelKindName(architecture.kind()))},
          {"inputs", architecture.inputs()},
          {"outputs", architecture.outputs()},
          {"hidden", architecture.hidden()},
          {"params", std::vector<double>(p.begin(), p.end())}};
}

absl::Status RunSimulate(const SimulateArgs& a, std::ostream& out) {
  if (a.config.empty() == a.manifest.empty()) {
    return Usage("give exactly one of --config or --manifest");
  }
  json raw;
  if (!a.config.empty()) {
    INFOCH_ASSIGN_OR_RETURN(raw, ReadJson(a.config));
  } else {
    INFOCH_ASSIGN_OR_RETURN(json manifest, ReadJson(a.manifest));
    if (!manifest.contains("config") ||
        manifest.value("command", "") != "simulate") {
      return MakeError(ErrorCode::kParseError,
                       "manifest does not describe a simulate run");
    }
    raw = manifest["config"];
  }
  INFOCH_ASSIGN_OR_RETURN(SimulationConfig config,
                          SimulationConfigFromJson(raw));
  std::optional<std::uint64_t> config_seed;
  if (raw.contains("seed")) config_seed = config.schedule.seed;
  INFOCH_ASSIGN_OR_RETURN(config.schedule.seed,
                          ResolveSeed(a.seed_opt, a.seed, config_seed));

  if (absl::Status valid = ValidateSchedule(config.schedule); !valid.ok()) {
    return Usage(absl::StrCat("invalid config: ", valid.message()));
  }
  absl::StatusOr<Simulation> built = BuildSimulation(config);
  if (!built.ok()) {
    return Usage(absl::StrCat("invalid config: ", built.status().message()));
  }
  Simulation sim = *std::move(built);
  INFOCH_ASSIGN_OR_RETURN(FederationResult result,
                          RunFederation(sim.federation));
  INFOCH_ASSIGN_OR_RETURN(ModelParams architecture,
                          InitialModel(sim.federation));

  INFOCH_RETURN_IF_ERROR(EnsureDirectory(a.out));
  const fs::path dir(a.out);
  std::vector<std::string> outputs = {"trace.jsonl", "trace.csv",
                                      "victim.json", "final_model.json"};
  INFOCH_RETURN_IF_ERROR(WriteFileAtomic((dir / "trace.jsonl").string(),
                                         TraceToJsonl(result.trace)));
  INFOCH_RETURN_IF_ERROR(WriteFileAtomic((dir / "trace.csv").string(),
                                         TraceToCsv(result.trace)));
  INFOCH_RETURN_IF_ERROR(WriteFileAtomic(
      (dir / "victim.json").string(),
      VictimRecordToJson(MakeVictimRecord(sim, result)).dump() + "\n"));
  INFOCH_RETURN_IF_ERROR(WriteFileAtomic(
      (dir / "final_model.json").string(),
      ModelJson(architecture, result.final_params).dump(2) + "\n"));
  if (sim.federation.victim_plan.has_value()) {
    outputs.push_back("plan.json");
    INFOCH_RETURN_IF_ERROR(WriteFileAtomic(
        (dir / "plan.json").string(),
        PlanToJson(*sim.federation.victim_plan).dump(2) + "\n"));
  }
  INFOCH_RETURN_IF_ERROR(WriteFileAtomic(
      (dir / "manifest.json").string(),
      Manifest("simulate", config.schedule.seed,
               SimulationConfigToJson(config), outputs)
              .dump(2) +
          "\n"));

  Report r(out);
  r.Add("rounds", result.trace.size());
  r.Add("aggregations", result.aggregations);
  r.Add("final_train_loss", result.trace.back().train_loss);
  if (std::isfinite(result.trace.back().test_acc)) {
    r.Add("final_test_acc", result.trace.back().test_acc);
  }
  if (result.ledger.has_value()) {
    r.Add("ledger_total_nats", result.ledger->total());
    r.Add("ledger_cap_nats", static_cast<double>(config.schedule.total_steps) *
                                 config.kappa);
  } else {
    r.Add("ledger_total_nats", "none");
  }
  r.Add("out", a.out);
  return absl::OkStatus();
}

// ------------------------------------------------------------------- attack

struct AttackArgs {
  std::string trace;
  std::string manifest;
  std::string out;
  std::string attack = "bias-ratio";
  std::size_t targets = 0;
  std::size_t group_size = 1;
  std::size_t iterations = 500;
  double step_size = 0.01;
  std::size_t restarts = 8;
  double slack = 1e-6;
  double min_pass_rate = 0.9;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;
  std::string prior_var;
  std::string noise_var;
};

json AttackConfigJson(const AttackArgs& a) {
  return {{"trace", a.trace},
          {"attack", a.attack},
          {"targets", a.targets},
          {"group_size", a.group_size},
          {"iterations", a.iterations},
          {"step_size", a.step_size},
          {"restarts", a.restarts},
          {"slack", a.slack},
          {"min_pass_rate", a.min_pass_rate}};
}

absl::Status AttackArgsFromManifest(const std::string& path, AttackArgs& a,
                                    std::optional<std::uint64_t>& seed) {
  INFOCH_ASSIGN_OR_RETURN(json manifest, ReadJson(path));
  if (manifest.value("command", "") != "attack" ||
      !manifest.contains("config")) {
    return MakeError(ErrorCode::kParseError,
                     "manifest does not describe an attack run");
  }
  try {
    const json& c = manifest["config"];
    a.trace = c.at("trace").get<std::string>();
    a.attack = c.at("attack").get<std::string>();
    a.targets = c.at("targets").get<std::size_t>();
    a.group_size = c.at("group_size").get<std::size_t>();
    a.iterations = c.at("iterations").get<std::size_t>();
    a.step_size = c.at("step_size").get<double>();
    a.restarts = c.at("restarts").get<std::size_t>();
    a.slack = c.at("slack").get<double>();
    a.min_pass_rate = c.at("min_pass_rate").get<double>();
    seed = manifest.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    return MakeError(ErrorCode::kParseError,
                     absl::StrCat("bad attack manifest: ", e.what()));
  }
  return absl::OkStatus();
}

absl::Status RunBayesLists(const AttackArgs& a, std::ostream& out) {
  INFOCH_ASSIGN_OR_RETURN(std::vector<double> prior, ParseList(a.prior_var));
  INFOCH_ASSIGN_OR_RETURN(std::vector<double> noise, ParseList(a.noise_var));
  INFOCH_ASSIGN_OR_RETURN(BayesResult bayes, BayesGaussianOracle(prior, noise));
  const CovarianceSpectrum spectrum{prior, Matrix::Identity(prior.size())};
  INFOCH_ASSIGN_OR_RETURN(double h, GaussianEntropy(spectrum));
  INFOCH_ASSIGN_OR_RETURN(double bound,
                          MseLowerBound({h, prior.size(), bayes.info}));
  const BoundCheck check = VerifyBound(bayes.mse, bound, a.slack);
  Report r(out);
  r.Add("attack", "bayes");
  r.Add("mse", bayes.mse);
  r.Add("info_nats", bayes.info);
  r.Add("bound", bound);
  r.Add("margin", check.margin);
  r.Add("pass", check.pass ? "true" : "false");
  if (!check.pass) {
    return MakeError(ErrorCode::kBoundViolation,
                     "posterior-mean error fell below the floor");
  }
  return absl::OkStatus();
}

absl::Status RunAttack(AttackArgs a, std::ostream& out) {
  const bool lists = !a.prior_var.empty() || !a.noise_var.empty();
  std::optional<std::uint64_t> manifest_seed;
  if (!a.manifest.empty()) {
    if (!a.trace.empty() || lists) {
      return Usage("--manifest replaces --trace and the variance lists");
    }
    INFOCH_RETURN_IF_ERROR(AttackArgsFromManifest(a.manifest, a, manifest_seed));
  }
  INFOCH_ASSIGN_OR_RETURN(AttackKind kind, ParseAttackKind(a.attack));
  if (lists) {
    if (kind != AttackKind::kBayesGaussian || a.prior_var.empty() ||
        a.noise_var.empty() || !a.trace.empty()) {
      return Usage("--prior-var and --noise-var go together with "
                   "--attack bayes and no --trace");
    }
    return RunBayesLists(a, out);
  }
  if (a.trace.empty()) return Usage("--trace is required");
  INFOCH_ASSIGN_OR_RETURN(std::uint64_t seed,
                          ResolveSeed(a.seed_opt, a.seed, manifest_seed));
  const fs::path trace(a.trace);
  INFOCH_ASSIGN_OR_RETURN(json sim_manifest,
                          ReadJson((trace / "manifest.json").string()));
  if (!sim_manifest.contains("config")) {
    return MakeError(ErrorCode::kParseError,
                     "trace manifest has no config");
  }
  INFOCH_ASSIGN_OR_RETURN(SimulationConfig config,
                          SimulationConfigFromJson(sim_manifest["config"]));
  INFOCH_ASSIGN_OR_RETURN(Simulation sim, BuildSimulation(config));
  INFOCH_ASSIGN_OR_RETURN(json victim_json,
                          ReadJson((trace / "victim.json").string()));
  INFOCH_ASSIGN_OR_RETURN(VictimRecord record,
                          VictimRecordFromJson(victim_json));
  INFOCH_ASSIGN_OR_RETURN(ModelParams architecture,
                          InitialModel(sim.federation));
  TraceAttackInput input{std::move(architecture), std::move(record),
                         sim.data_covariance, sim.federation.victim_plan};
  TraceAttackOptions options;
  options.attack = kind;
  options.targets = a.targets;
  options.group_size = a.group_size;
  options.seed = seed;
  options.iterations = a.iterations;
  options.step_size = a.step_size;
  options.restarts = a.restarts;
  options.slack = a.slack;
  options.min_pass_rate = a.min_pass_rate;
  INFOCH_ASSIGN_OR_RETURN(TraceAttackResult result,
                          AttackTrace(input, options));

  const std::string out_dir = a.out.empty() ? a.trace : a.out;
  INFOCH_RETURN_IF_ERROR(EnsureDirectory(out_dir));
  const fs::path dir(out_dir);
  const std::string stem = absl::StrCat("attack_", a.attack);
  const std::vector<std::string> outputs = {stem + "_report.json",
                                            stem + "_summary.csv"};
  INFOCH_RETURN_IF_ERROR(WriteFileAtomic(
      (dir / outputs[0]).string(), ReportsToJson(result.reports).dump() + "\n"));
  INFOCH_RETURN_IF_ERROR(WriteFileAtomic(
      (dir / outputs[1]).string(),
      SummaryCsvHeader() + SummaryCsvRow(kind, input.plan, result)));
  INFOCH_RETURN_IF_ERROR(WriteFileAtomic(
      (dir / (stem + "_manifest.json")).string(),
      Manifest("attack", seed, AttackConfigJson(a), outputs).dump(2) + "\n"));

  Report r(out);
  r.Add("attack", a.attack);
  r.Add("channel", input.plan ? ChannelKindName(input.plan->kind)
                              : absl::string_view("none"));
  if (input.plan) r.Add("kappa_nats", input.plan->kappa);
  if (result.bayes) {
    r.Add("mse", result.bayes->mse);
    r.Add("info_nats", result.bayes->info);
  }
  r.Add("targets", result.reports.size());
  r.Add("trials", result.trials.size());
  r.Add("median_mse", result.median_mse);
  r.Add("median_bound", result.median_bound);
  r.Add("pass_rate", result.pass_rate);
  r.Add("out", out_dir);
  if (!result.passed) {
    return MakeError(ErrorCode::kBoundViolation,
                     absl::StrCat("pass rate ", FormatDouble(result.pass_rate),
                                  " is below the required ",
                                  FormatDouble(a.min_pass_rate)));
  }
  return absl::OkStatus();
}

// -------------------------------------------------------------------- audit

struct AuditArgs {
  std::string plan;
  std::string cov;
  std::string data;
};

absl::Status RunAudit(const AuditArgs& a, std::ostream& out) {
  auto plan = ReadPlanFile(a.plan);
  if (!plan.ok()) return Usage(plan.status().message());
  auto cov = LoadCovariance(a.cov, a.data);
  if (!cov.ok()) {
    return ErrorCodeOf(cov.status()) == ErrorCode::kParseError
               ? Usage(cov.status().message())
               : cov.status();
  }
  INFOCH_ASSIGN_OR_RETURN(CovarianceSpectrum spectrum, Eigendecompose(*cov));
  INFOCH_ASSIGN_OR_RETURN(double realized, RealizedCapacity(*plan, spectrum));
  const bool ok = realized <= plan->kappa * (1.0 + kAuditSlack);
  Report r(out);
  r.Add("channel", ChannelKindName(plan->kind));
  r.Add("kappa_nats", plan->kappa);
  r.Add("realized_capacity_nats", realized);
  r.Add("excess_nats", realized - plan->kappa);
  r.Add("status", ok ? "ok" : "violation");
  if (!ok) {
    return MakeError(ErrorCode::kCapacityViolation,
                     absl::StrCat("realized capacity ", FormatDouble(realized),
                                  " exceeds kappa ",
                                  FormatDouble(plan->kappa)));
  }
  return absl::OkStatus();
}

}  // namespace

std::string VersionString() { return absl::StrCat("infoch ", INFOCH_VERSION); }

int ExitCodeFor(const absl::Status& status) {
  if (status.ok()) return kExitOk;
  const auto code = ErrorCodeOf(status);
  if (code == ErrorCode::kUsage || code == ErrorCode::kParseError) {
    return kExitUsage;
  }
  return kExitDomain;
}

absl::Status WriteFileAtomic(const std::string& path,
                             const std::string& contents) {
  const fs::path target(path);
  fs::path tmp = target;
  tmp += absl::StrCat(".tmp.", ::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) return Usage(absl::StrCat("cannot write ", tmp.string()));
    f << contents;
    f.flush();
    if (!f) return Usage(absl::StrCat("short write to ", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    return Usage(absl::StrCat("cannot rename onto ", path));
  }
  return absl::OkStatus();
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Capacity-calibrated Gaussian noise channels for federated "
               "learning, with leakage bounds and reconstruction attacks."};
  app.name("infoch");
  app.set_version_flag("--version", VersionString());
  app.require_subcommand(1);

  CalibrateArgs cal;
  CLI::App* cal_cmd =
      app.add_subcommand("calibrate", "Build a noise plan for a capacity cap");
  cal_cmd->set_version_flag("--version", VersionString());
  cal_cmd->add_option("--data", cal.data, "Data CSV (rows are samples)");
  cal_cmd->add_option("--cov", cal.cov, "Covariance CSV");
  cal_cmd->add_option("--kappa", cal.kappa, "Per-step capacity cap")
      ->required();
  cal_cmd->add_flag("--bits", cal.bits, "Read --kappa in bits");
  cal_cmd->add_option("--channel", cal.channel, "natural|white|personalized")
      ->check(CLI::IsMember({"natural", "white", "personalized"}));
  cal_cmd->add_option("--beta", cal.beta, "Importance weights CSV");
  cal.seed_opt = cal_cmd->add_option("--seed", cal.seed, "Noise seed");
  cal_cmd->add_option("--out", cal.out, "Plan JSON output path");
  cal_cmd->add_option("--steps", cal.steps, "Local steps n for the MSE floor")
      ->check(CLI::PositiveNumber);

  DpArgs dp;
  CLI::App* dp_cmd =
      app.add_subcommand("dp", "Capacity bounds of the Gaussian DP mechanism");
  dp_cmd->set_version_flag("--version", VersionString());
  dp.epsilon_opt = dp_cmd->add_option("--epsilon", dp.epsilon, "DP epsilon");
  dp.delta_opt = dp_cmd->add_option("--delta", dp.delta, "DP delta");
  dp_cmd->add_option("--clip", dp.clip, "Clipping norm S");
  dp_cmd->add_option("--batch", dp.batch, "Batch size B")->required();
  dp.sigma_opt =
      dp_cmd->add_option("--sigma", dp.sigma, "Noise variance sigma");
  dp.noise_std_opt = dp_cmd->add_option("--noise-std", dp.noise_std,
                                        "Noise standard deviation");
  dp.sigma_opt->excludes(dp.noise_std_opt);

  BoundArgs bound;
  CLI::App* bound_cmd =
      app.add_subcommand("bound", "Per-dimension reconstruction MSE floor");
  bound_cmd->set_version_flag("--version", VersionString());
  bound.entropy_opt =
      bound_cmd->add_option("--entropy", bound.entropy, "Entropy h(D), nats");
  bound_cmd->add_option("--cov", bound.cov,
                        "Covariance CSV (Gaussian entropy surrogate)");
  bound.dim_opt = bound_cmd->add_option("--dim", bound.dim, "Dimension d");
  bound_cmd->add_option("--info", bound.info, "Mutual information")
      ->required();
  bound_cmd->add_flag("--bits", bound.bits, "Read --info in bits");

  SimulateArgs sim;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Run a synthetic federation");
  sim_cmd->set_version_flag("--version", VersionString());
  sim_cmd->add_option("--config", sim.config, "Config JSON");
  sim_cmd->add_option("--manifest", sim.manifest, "Manifest of a prior run");
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();
  sim.seed_opt = sim_cmd->add_option("--seed", sim.seed, "Master seed");

  AttackArgs atk;
  CLI::App* atk_cmd =
      app.add_subcommand("attack", "Attack a simulated victim and check the "
                                   "MSE floor");
  atk_cmd->set_version_flag("--version", VersionString());
  atk_cmd->add_option("--trace", atk.trace, "Directory written by simulate");
  atk_cmd->add_option("--manifest", atk.manifest, "Manifest of a prior attack");
  atk_cmd->add_option("--out", atk.out, "Output directory (default: trace)");
  atk_cmd->add_option("--attack", atk.attack, "bias-ratio|grad-match|bayes")
      ->check(CLI::IsMember({"bias-ratio", "grad-match", "bayes"}));
  atk_cmd->add_option("--targets", atk.targets,
                      "Victim rounds to attack (0 = all)");
  atk_cmd->add_option("--group-size", atk.group_size,
                      "Targets pooled per trial")
      ->check(CLI::PositiveNumber);
  atk_cmd->add_option("--iters", atk.iterations, "Gradient-matching steps")
      ->check(CLI::PositiveNumber);
  atk_cmd->add_option("--step-size", atk.step_size, "Initial sign step");
  atk_cmd->add_option("--restarts", atk.restarts, "Gradient-matching starts")
      ->check(CLI::PositiveNumber);
  atk_cmd->add_option("--slack", atk.slack, "Relative slack on the floor");
  atk_cmd->add_option("--min-pass-rate", atk.min_pass_rate,
                      "Required fraction of passing trials");
  atk.seed_opt = atk_cmd->add_option("--seed", atk.seed, "Attack seed");
  atk_cmd->add_option("--prior-var", atk.prior_var,
                      "Bayes: comma-separated prior variances");
  atk_cmd->add_option("--noise-var", atk.noise_var,
                      "Bayes: comma-separated noise variances");

  AuditArgs audit;
  CLI::App* audit_cmd =
      app.add_subcommand("audit", "Recompute a plan's capacity against data");
  audit_cmd->set_version_flag("--version", VersionString());
  audit_cmd->add_option("--plan", audit.plan, "Plan JSON")->required();
  audit_cmd->add_option("--cov", audit.cov, "Covariance CSV");
  audit_cmd->add_option("--data", audit.data, "Data CSV");

  std::vector<std::string> argv_storage = {"infoch"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& s : argv_storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  absl::Status status;
  if (cal_cmd->parsed()) {
    status = RunCalibrate(cal, out);
  } else if (dp_cmd->parsed()) {
    status = RunDp(dp, out);
  } else if (bound_cmd->parsed()) {
    status = RunBound(bound, out);
  } else if (sim_cmd->parsed()) {
    status = RunSimulate(sim, out);
  } else if (atk_cmd->parsed()) {
    status = RunAttack(atk, out);
  } else if (audit_cmd->parsed()) {
    status = RunAudit(audit, out);
  }
  if (!status.ok()) err << "error: " << status.message() << "\n";
  return ExitCodeFor(status);
}

}  // namespace infoch
