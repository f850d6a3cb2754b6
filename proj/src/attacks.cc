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

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "infoch/capacity.h"
#include "infoch/error.h"
#include "infoch/rng.h"
#include "infoch/spectral.h"

namespace infoch {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMatchingFdStep = 1e-6;

double Cosine(std::span<const double> a, std::span<const double> b) {
  const double na = Norm(a);
  const double nb = Norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(Dot(a, b) / (na * nb), -1.0, 1.0);
}

absl::Status CheckVariances(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      return MakeError(ErrorCode::kNonPositiveVariance,
                       absl::StrCat(what, " variance ", x,
                                    " is not positive and finite"));
    }
  }
  return absl::OkStatus();
}

}  // namespace

absl::string_view AttackKindName(AttackKind kind) {
  switch (kind) {
    case AttackKind::kBiasRatio:
      return "bias-ratio";
    case AttackKind::kGradientMatching:
      return "grad-match";
    case AttackKind::kBayesGaussian:
      return "bayes";
  }
  return "unknown";
}

absl::StatusOr<AttackKind> ParseAttackKind(absl::string_view name) {
  if (name == "bias-ratio") return AttackKind::kBiasRatio;
  if (name == "grad-match") return AttackKind::kGradientMatching;
  if (name == "bayes") return AttackKind::kBayesGaussian;
  return MakeError(ErrorCode::kParseError,
                   absl::StrCat("unknown attack '", name, "'"));
}

absl::StatusOr<GradientObservation> ObserveSnapshot(
    const ModelParams& architecture, const VictimSnapshot& snapshot,
    double learning_rate, std::size_t batch_size) {
  if (!(learning_rate > 0.0)) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "learning rate must be positive to recover a gradient");
  }
  if (snapshot.params_in.size() != architecture.size() ||
      snapshot.params_out.size() != architecture.size()) {
    return MakeError(ErrorCode::kShapeMismatch,
                     "snapshot does not match the model architecture");
  }
  GradientObservation obs{architecture, {}, batch_size};
  INFOCH_RETURN_IF_ERROR(obs.model.SetParams(snapshot.params_in));
  obs.gradient.resize(architecture.size());
  for (std::size_t i = 0; i < obs.gradient.size(); ++i) {
    obs.gradient[i] =
        (snapshot.params_in[i] - snapshot.params_out[i]) / learning_rate;
  }
  return obs;
}

absl::StatusOr<Matrix> BiasRatioInvert(const GradientObservation& obs) {
  if (obs.gradient.size() != obs.model.size()) {
    return MakeError(ErrorCode::kShapeMismatch,
                     "gradient does not match the model");
  }
  const LayerLayout& first = obs.model.layers().front();
  std::size_t best = 0;
  double best_abs = 0.0;
  for (std::size_t o = 0; o < first.outputs; ++o) {
    const double g = std::abs(obs.gradient[first.bias_offset + o]);
    if (g > best_abs) {
      best_abs = g;
      best = o;
    }
  }
  if (best_abs == 0.0) {
    return MakeError(ErrorCode::kDeadNeurons,
                     "every first-layer bias gradient is zero");
  }
  const double gb = obs.gradient[first.bias_offset + best];
  Matrix x(1, first.inputs);
  for (std::size_t i = 0; i < first.inputs; ++i) {
    x(0, i) = obs.gradient[first.weight_offset + best * first.inputs + i] / gb;
  }
  return x;
}

absl::StatusOr<std::size_t> InferLabel(const GradientObservation& obs) {
  if (obs.model.kind() == ModelKind::kLinearRegression) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "labels are only inferable for softmax outputs");
  }
  const LayerLayout& last = obs.model.layers().back();
  std::size_t best = 0;
  for (std::size_t o = 1; o < last.outputs; ++o) {
    if (obs.gradient[last.bias_offset + o] <
        obs.gradient[last.bias_offset + best]) {
      best = o;
    }
  }
  return best;
}

absl::StatusOr<GradientMatchingResult> GradientMatchingInvert(
    const GradientObservation& obs, const GradientMatchingOptions& options) {
  if (options.iterations == 0 || options.restarts == 0) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "gradient matching needs at least one iteration and "
                     "one restart");
  }
  if (!(options.step_size > 0.0)) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "step size must be positive");
  }
  if (obs.gradient.size() != obs.model.size()) {
    return MakeError(ErrorCode::kShapeMismatch,
                     "gradient does not match the model");
  }
  const bool regression = obs.model.kind() == ModelKind::kLinearRegression;
  if (regression && options.target.size() != obs.model.outputs()) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "linear models need the regression target");
  }
  std::size_t label = 0;
  if (!regression) {
    if (options.label.has_value()) {
      label = *options.label;
    } else {
      INFOCH_ASSIGN_OR_RETURN(label, InferLabel(obs));
    }
  }
  const GradientFn grad = SampleGradientFn(
      obs.model, label,
      regression ? std::span<const double>(options.target)
                 : std::span<const double>());
  auto objective = [&](std::span<const double> x) -> absl::StatusOr<double> {
    INFOCH_ASSIGN_OR_RETURN(std::vector<double> g, grad(x));
    return 1.0 - Cosine(g, obs.gradient);
  };

  const std::size_t d = obs.model.inputs();
  const std::size_t decay_every = (options.iterations + 9) / 10;
  GradientMatchingResult result;
  result.objective = std::numeric_limits<double>::infinity();
  std::vector<double> x(d);
  std::vector<double> direction(d);
  for (std::size_t restart = 0; restart < options.restarts; ++restart) {
    const CounterRng rng(options.seed, restart);
    for (std::size_t i = 0; i < d; ++i) x[i] = rng.NormalAt(i);
    INFOCH_ASSIGN_OR_RETURN(double start, objective(x));
    if (start < result.objective) {
      result = {Matrix::Row(x), start, 0, restart};
    }
    double step = options.step_size;
    for (std::size_t it = 1; it <= options.iterations; ++it) {
      for (std::size_t i = 0; i < d; ++i) {
        const double saved = x[i];
        x[i] = saved + kMatchingFdStep;
        INFOCH_ASSIGN_OR_RETURN(double plus, objective(x));
        x[i] = saved - kMatchingFdStep;
        INFOCH_ASSIGN_OR_RETURN(double minus, objective(x));
        x[i] = saved;
        direction[i] = plus - minus;
      }
      for (std::size_t i = 0; i < d; ++i) {
        if (direction[i] > 0.0) x[i] -= step;
        if (direction[i] < 0.0) x[i] += step;
      }
      INFOCH_ASSIGN_OR_RETURN(double value, objective(x));
      if (value < result.objective) {
        result = {Matrix::Row(x), value, it, restart};
      }
      if (it % decay_every == 0) step *= 0.9;
    }
  }
  return result;
}

absl::StatusOr<BayesResult> BayesGaussianOracle(
    std::span<const double> prior_var, std::span<const double> noise_var) {
  if (prior_var.size() != noise_var.size() || prior_var.empty()) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     "prior and noise variances differ in length");
  }
  INFOCH_RETURN_IF_ERROR(CheckVariances(prior_var, "prior"));
  INFOCH_RETURN_IF_ERROR(CheckVariances(noise_var, "noise"));
  BayesResult r;
  for (std::size_t i = 0; i < prior_var.size(); ++i) {
    const double l = prior_var[i];
    const double s = noise_var[i];
    r.mse += l * s / (l + s);
    r.info += 0.5 * std::log1p(l / s);
  }
  r.mse /= static_cast<double>(prior_var.size());
  return r;
}

absl::StatusOr<BayesResult> BayesGaussianOracle(const Matrix& prior_cov,
                                                const Matrix& noise_cov) {
  if (prior_cov.rows() != noise_cov.rows() ||
      prior_cov.cols() != noise_cov.cols() || !prior_cov.is_square()) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     "prior and noise covariances differ in shape");
  }
  // E||x - E[x|y]||^2 = tr(S - S (S + N)^{-1} S).
  INFOCH_ASSIGN_OR_RETURN(Matrix solved, SolveSpd(prior_cov + noise_cov,
                                                  prior_cov));
  const Matrix explained = prior_cov * solved;
  BayesResult r;
  const auto d = static_cast<double>(prior_cov.rows());
  r.mse = std::max(0.0, (prior_cov.Trace() - explained.Trace()) / d);
  INFOCH_ASSIGN_OR_RETURN(double log_total, LogDet(prior_cov + noise_cov));
  INFOCH_ASSIGN_OR_RETURN(double log_noise, LogDet(noise_cov));
  r.info = 0.5 * (log_total - log_noise);
  return r;
}

absl::StatusOr<Metrics> ComputeMetrics(const Matrix& reconstructed,
                                       const Matrix& target,
                                       double data_range) {
  if (reconstructed.rows() != target.rows() ||
      reconstructed.cols() != target.cols() || target.empty()) {
    return MakeError(ErrorCode::kShapeMismatch,
                     "reconstruction and target differ in shape");
  }
  if (!(data_range > 0.0)) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "PSNR needs a positive data range");
  }
  Metrics m;
  const auto a = reconstructed.values();
  const auto b = target.values();
  for (std::size_t i = 0; i < a.size(); ++i) {
    m.mse += (a[i] - b[i]) * (a[i] - b[i]);
  }
  m.mse /= static_cast<double>(a.size());
  m.psnr_infinite = m.mse == 0.0;
  m.psnr_db = m.psnr_infinite
                  ? kInf
                  : 10.0 * std::log10(data_range * data_range / m.mse);
  m.cosine = Cosine(a, b);
  return m;
}

BoundCheck VerifyBound(double mse, double bound, double slack) {
  return {mse >= bound * (1.0 - slack), mse - bound};
}

BoundCheck VerifyBound(const ReconstructionReport& report, double slack) {
  return VerifyBound(report.mse_per_dim, report.bound, slack);
}

double Median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

absl::StatusOr<TraceAttackResult> AttackTrace(
    const TraceAttackInput& input, const TraceAttackOptions& options) {
  const VictimRecord& record = input.record;
  const std::size_t d = input.data_covariance.rows();
  if (d != record.clean.features.cols()) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     "data covariance does not match the victim data");
  }
  INFOCH_ASSIGN_OR_RETURN(CovarianceSpectrum spectrum,
                          Eigendecompose(input.data_covariance));
  INFOCH_ASSIGN_OR_RETURN(double entropy, GaussianEntropy(spectrum));
  TraceAttackResult result;

  if (options.attack == AttackKind::kBayesGaussian) {
    BayesResult bayes{0.0, kInf};
    if (input.plan.has_value()) {
      INFOCH_ASSIGN_OR_RETURN(
          bayes, BayesGaussianOracle(input.data_covariance,
                                     input.plan->NoiseCovariance()));
    }
    INFOCH_ASSIGN_OR_RETURN(double bound,
                            MseLowerBound({entropy, d, bayes.info}));
    TrialResult trial{0, 1, bayes.mse, bayes.info, bound,
                      VerifyBound(bayes.mse, bound, options.slack)};
    ReconstructionReport report;
    report.attack = AttackKind::kBayesGaussian;
    report.mse_per_dim = bayes.mse;
    report.bound = bound;
    result.reports.push_back(std::move(report));
    result.trials.push_back(trial);
    result.bayes = bayes;
  } else {
    const std::size_t available = record.snapshots.size();
    const std::size_t n = options.targets == 0 ? available : options.targets;
    if (n > available || n == 0) {
      return MakeError(ErrorCode::kInvalidArgument,
                       absl::StrCat("requested ", n, " targets but the trace "
                                                     "has ",
                                    available, " victim rounds"));
    }
    if (options.group_size == 0 || options.group_size > n) {
      return MakeError(ErrorCode::kInvalidArgument,
                       "group size must be between 1 and the target count");
    }
    const auto clean = record.clean.features.values();
    const auto [lo, hi] = std::minmax_element(clean.begin(), clean.end());
    const double data_range = *hi > *lo ? *hi - *lo : 1.0;
    std::vector<double> infos;
    for (std::size_t t = 0; t < n; ++t) {
      const VictimSnapshot& snap = record.snapshots[t];
      if (snap.batch_rows.size() != 1) {
        return MakeError(ErrorCode::kInvalidArgument,
                         "attacks need one sample per victim round "
                         "(batch size 1, one local step)");
      }
      INFOCH_ASSIGN_OR_RETURN(
          GradientObservation obs,
          ObserveSnapshot(input.architecture, snap, record.learning_rate,
                          record.batch_size));
      ReconstructionReport report;
      report.attack = options.attack;
      report.target_index = t;
      report.round = snap.round;
      report.target = Matrix::Row(record.clean.features.row(snap.batch_rows[0]));
      if (options.attack == AttackKind::kBiasRatio) {
        INFOCH_ASSIGN_OR_RETURN(report.reconstructed, BiasRatioInvert(obs));
        report.iterations = 1;
      } else {
        GradientMatchingOptions gm;
        gm.iterations = options.iterations;
        gm.step_size = options.step_size;
        gm.restarts = options.restarts;
        gm.seed = DeriveSeed(options.seed, t);
        INFOCH_ASSIGN_OR_RETURN(GradientMatchingResult matched,
                                GradientMatchingInvert(obs, gm));
        report.reconstructed = std::move(matched.reconstructed);
        report.iterations = options.iterations;
      }
      INFOCH_ASSIGN_OR_RETURN(
          Metrics m, ComputeMetrics(report.reconstructed, report.target,
                                    data_range));
      report.mse_per_dim = m.mse;
      report.psnr_db = m.psnr_db;
      report.psnr_infinite = m.psnr_infinite;
      report.cosine = m.cosine;
      double info = kInf;
      if (!record.charges.empty()) {
        info = 0.0;
        const std::size_t first = snap.round * record.local_steps;
        for (std::size_t s = first; s < first + record.local_steps; ++s) {
          if (s < record.charges.size()) info += record.charges[s];
        }
      }
      infos.push_back(info);
      INFOCH_ASSIGN_OR_RETURN(report.bound,
                              MseLowerBound({entropy, d, info}));
      result.reports.push_back(std::move(report));
    }
    const std::size_t g = options.group_size;
    for (std::size_t first = 0; first + g <= n; first += g) {
      TrialResult trial;
      trial.first_target = first;
      trial.count = g;
      std::set<std::size_t> rows;
      for (std::size_t t = first; t < first + g; ++t) {
        if (!rows.insert(record.snapshots[t].batch_rows[0]).second) {
          return MakeError(ErrorCode::kInvalidArgument,
                           "a trial group repeats a victim sample; use a "
                           "group size no larger than the victim's data");
        }
        trial.mse += result.reports[t].mse_per_dim;
        trial.info += infos[t];
      }
      trial.mse /= static_cast<double>(g);
      const double gd = static_cast<double>(g);
      INFOCH_ASSIGN_OR_RETURN(
          trial.bound, MseLowerBound({gd * entropy, g * d, trial.info}));
      trial.check = VerifyBound(trial.mse, trial.bound, options.slack);
      result.trials.push_back(trial);
    }
  }

  std::vector<double> mses;
  std::vector<double> bounds;
  std::size_t passes = 0;
  for (const TrialResult& t : result.trials) {
    mses.push_back(t.mse);
    bounds.push_back(t.bound);
    if (t.check.pass) ++passes;
  }
  result.pass_rate =
      static_cast<double>(passes) / static_cast<double>(result.trials.size());
  result.median_mse = Median(mses);
  result.median_bound = Median(bounds);
  result.passed = result.pass_rate >= options.min_pass_rate;
  return result;
}

nlohmann::json ReportsToJson(const std::vector<ReconstructionReport>& reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const ReconstructionReport& r : reports) {
    auto flat = [](const Matrix& m) {
      return std::vector<double>(m.values().begin(), m.values().end());
    };
    nlohmann::json j = {
        {"attack", std::string(AttackKindName(r.attack))},
        {"target_index", r.target_index},
        {"round", r.round},
        {"mse_per_dim", r.mse_per_dim},
        {"psnr_infinite", r.psnr_infinite},
        {"cosine", r.cosine},
        {"bound", r.bound},
        {"iterations", r.iterations},
        {"reconstructed", flat(r.reconstructed)},
        {"target", flat(r.target)}};
    j["psnr_db"] = r.psnr_infinite ? nlohmann::json(nullptr)
                                   : nlohmann::json(r.psnr_db);
    out.push_back(std::move(j));
  }
  return out;
}

std::string SummaryCsvHeader() {
  return "attack,kind,kappa,median_mse,bound,pass_rate\n";
}

std::string SummaryCsvRow(AttackKind attack,
                          const std::optional<NoisePlan>& plan,
                          const TraceAttackResult& result) {
  return absl::StrCat(
      AttackKindName(attack), ",",
      plan ? ChannelKindName(plan->kind) : absl::string_view("none"), ",",
      plan ? FormatDouble(plan->kappa) : std::string(), ",",
      FormatDouble(result.median_mse), ",", FormatDouble(result.median_bound),
      ",", FormatDouble(result.pass_rate), "\n");
}

}  // namespace infoch
