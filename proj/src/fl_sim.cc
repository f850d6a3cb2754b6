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

#include "infoch/fl_sim.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "infoch/error.h"
#include "infoch/spectral.h"

namespace infoch {
namespace {

constexpr double kBudgetSlack = 1e-8;
constexpr double kWeightTolerance = 1e-9;

enum SeedPurpose : std::uint64_t {
  kInitSeed = 1,
  kSamplerSeed = 2,
};

absl::Status CheckWeights(std::span<const double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      return MakeError(ErrorCode::kBadWeights,
                       absl::StrCat("weight ", w, " is not a finite "
                                                  "non-negative number"));
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightTolerance) {
    return MakeError(ErrorCode::kBadWeights,
                     absl::StrCat("weights sum to ", sum, ", not 1"));
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status ValidateSchedule(const TrainingSchedule& s) {
  if (s.local_steps == 0 || s.total_steps == 0) {
    return MakeError(ErrorCode::kBadSchedule, "E and n must be at least 1");
  }
  if (s.total_steps % s.local_steps != 0) {
    return MakeError(ErrorCode::kBadSchedule,
                     absl::StrCat("E=", s.local_steps, " does not divide n=",
                                  s.total_steps));
  }
  if (!(s.learning_rate > 0.0) || !std::isfinite(s.learning_rate)) {
    return MakeError(ErrorCode::kBadSchedule,
                     "learning rate must be positive and finite");
  }
  if (s.batch_size == 0) {
    return MakeError(ErrorCode::kBadSchedule, "batch size must be at least 1");
  }
  return absl::OkStatus();
}

BatchSampler::BatchSampler(std::size_t num_samples, std::size_t batch,
                           std::uint64_t seed, std::uint64_t stream)
    : batch_(batch), rng_(seed, stream), order_(num_samples),
      cursor_(num_samples) {}

void BatchSampler::Reshuffle() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  for (std::size_t i = order_.size(); i > 1; --i) {
    std::swap(order_[i - 1], order_[rng_.NextBelow(i)]);
  }
  cursor_ = 0;
}

std::vector<std::size_t> BatchSampler::Next() {
  if (cursor_ + batch_ > order_.size()) Reshuffle();
  std::vector<std::size_t> out(order_.begin() + cursor_,
                               order_.begin() + cursor_ + batch_);
  cursor_ += batch_;
  return out;
}

absl::Status LocalRound(ModelParams& model, const LabeledData& data,
                        double learning_rate, std::size_t steps,
                        BatchSampler& sampler,
                        std::vector<StepRecord>* record) {
  if (!(learning_rate >= 0.0)) {
    return MakeError(ErrorCode::kBadSchedule, "negative learning rate");
  }
  for (std::size_t s = 0; s < steps; ++s) {
    StepRecord step;
    step.batch = sampler.Next();
    if (record != nullptr) {
      step.params_in.assign(model.params().begin(), model.params().end());
    }
    INFOCH_ASSIGN_OR_RETURN(std::vector<double> grad,
                            model.Gradient(data.Subset(step.batch)));
    auto params = model.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      params[i] -= learning_rate * grad[i];
    }
    if (record != nullptr) {
      step.params_out.assign(params.begin(), params.end());
      record->push_back(std::move(step));
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<double>> FedAvg(std::vector<ClientUpdate> updates) {
  if (updates.empty()) {
    return MakeError(ErrorCode::kBadWeights, "no client updates");
  }
  std::sort(updates.begin(), updates.end(),
            [](const ClientUpdate& a, const ClientUpdate& b) {
              return a.client_id < b.client_id;
            });
  const std::size_t p = updates.front().params.size();
  std::vector<double> weights;
  for (const ClientUpdate& u : updates) {
    if (u.params.size() != p) {
      return MakeError(ErrorCode::kShapeMismatch,
                       absl::StrCat("client ", u.client_id, " sent ",
                                    u.params.size(), " parameters, expected ",
                                    p));
    }
    weights.push_back(u.weight);
  }
  INFOCH_RETURN_IF_ERROR(CheckWeights(weights));
  std::vector<double> out(p, 0.0);
  for (const ClientUpdate& u : updates) {
    for (std::size_t i = 0; i < p; ++i) out[i] += u.weight * u.params[i];
  }
  return out;
}

absl::Status BudgetLedger::Charge(std::size_t step, double nats) {
  if (!(nats >= 0.0) || nats > kappa_ * (1.0 + kBudgetSlack)) {
    return MakeError(ErrorCode::kBudgetExceeded,
                     absl::StrCat("step ", step, " charges ", nats,
                                  " nats against a per-step cap of ", kappa_));
  }
  const double cap =
      static_cast<double>(total_steps_) * kappa_ * (1.0 + kBudgetSlack);
  if (total_ + nats > cap) {
    return MakeError(ErrorCode::kBudgetExceeded,
                     absl::StrCat("total ", total_ + nats,
                                  " nats would exceed n * kappa = ", cap));
  }
  total_ += nats;
  entries_.push_back({step, nats});
  return absl::OkStatus();
}

double BudgetLedger::TotalForSteps(std::size_t first, std::size_t last) const {
  double s = 0.0;
  for (const Entry& e : entries_) {
    if (e.step >= first && e.step < last) s += e.nats;
  }
  return s;
}

absl::StatusOr<GaussianMixture> GaussianMixture::Create(std::size_t dim,
                                                        std::size_t classes,
                                                        double separation,
                                                        Matrix within) {
  if (dim == 0 || classes < 2) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "mixture needs dim >= 1 and at least two classes");
  }
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "separation must be finite and non-negative");
  }
  if (within.empty()) within = Matrix::Identity(dim);
  if (within.rows() != dim || within.cols() != dim) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     "within-class covariance has the wrong shape");
  }
  // Cholesky doubles as the positive-definiteness check.
  INFOCH_RETURN_IF_ERROR(Cholesky(within).status());
  GaussianMixture g;
  g.within = std::move(within);
  // Class c sits at separation * e_(c mod dim), then the means are centred.
  g.means.assign(classes, std::vector<double>(dim, 0.0));
  for (std::size_t c = 0; c < classes; ++c) {
    g.means[c][c % dim] += separation;
  }
  for (std::size_t i = 0; i < dim; ++i) {
    double m = 0.0;
    for (const auto& mu : g.means) m += mu[i];
    m /= static_cast<double>(classes);
    for (auto& mu : g.means) mu[i] -= m;
  }
  return g;
}

Matrix GaussianMixture::MarginalCovariance() const {
  Matrix cov = within;
  const double w = 1.0 / static_cast<double>(classes());
  for (const auto& mu : means) {
    for (std::size_t i = 0; i < dim(); ++i) {
      for (std::size_t j = 0; j < dim(); ++j) cov(i, j) += w * mu[i] * mu[j];
    }
  }
  return cov;
}

LabeledData GaussianMixture::Sample(std::size_t count, std::uint64_t seed,
                                    std::uint64_t stream) const {
  const std::size_t d = dim();
  const Matrix chol = *Cholesky(within);
  const CounterRng rng(seed, stream);
  LabeledData out;
  out.features = Matrix(count, d);
  out.labels.resize(count);
  std::vector<double> z(d);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t c = r % classes();
    out.labels[r] = c;
    for (std::size_t i = 0; i < d; ++i) z[i] = rng.NormalAt(r * d + i);
    for (std::size_t i = 0; i < d; ++i) {
      double v = means[c][i];
      for (std::size_t j = 0; j <= i; ++j) v += chol(i, j) * z[j];
      out.features(r, i) = v;
    }
  }
  return out;
}

absl::StatusOr<ModelParams> InitialModel(const FederationConfig& config) {
  if (config.clients.empty()) {
    return MakeError(ErrorCode::kInvalidArgument, "no clients");
  }
  INFOCH_ASSIGN_OR_RETURN(
      ModelParams model,
      ModelParams::Create(config.model_kind,
                          config.clients.front().features.cols(),
                          config.outputs, config.hidden));
  model.InitRandom(DeriveSeed(config.schedule.seed, kInitSeed));
  return model;
}

BatchSampler ClientSampler(const FederationConfig& config, std::size_t client) {
  return BatchSampler(config.clients[client].size(),
                      config.schedule.batch_size,
                      DeriveSeed(config.schedule.seed, kSamplerSeed), client);
}

absl::StatusOr<FederationResult> RunFederation(const FederationConfig& config) {
  const TrainingSchedule& s = config.schedule;
  INFOCH_RETURN_IF_ERROR(ValidateSchedule(s));
  const std::size_t k = config.clients.size();
  if (k < 2) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "federation needs at least two clients");
  }
  if (config.victim >= k) {
    return MakeError(ErrorCode::kInvalidArgument,
                     absl::StrCat("victim index ", config.victim,
                                  " out of range for ", k, " clients"));
  }
  std::vector<double> weights = config.weights;
  if (weights.empty()) weights.assign(k, 1.0 / static_cast<double>(k));
  if (weights.size() != k) {
    return MakeError(ErrorCode::kBadWeights,
                     "one aggregation weight per client is required");
  }
  INFOCH_RETURN_IF_ERROR(CheckWeights(weights));
  const std::size_t dim = config.clients.front().features.cols();
  for (const LabeledData& c : config.clients) {
    if (c.features.cols() != dim) {
      return MakeError(ErrorCode::kDimensionMismatch,
                       "clients disagree on feature dimension");
    }
    if (c.size() < s.batch_size) {
      return MakeError(ErrorCode::kBadSchedule,
                       absl::StrCat("batch size ", s.batch_size,
                                    " exceeds a client's ", c.size(),
                                    " samples"));
    }
  }

  INFOCH_ASSIGN_OR_RETURN(ModelParams global, InitialModel(config));

  FederationResult result;
  std::vector<LabeledData> train = config.clients;
  result.victim_original_checksum =
      DataChecksum(config.clients[config.victim].features);
  if (config.victim_plan.has_value()) {
    INFOCH_ASSIGN_OR_RETURN(
        NoisyDataset noisy,
        ApplyNoise(*config.victim_plan, train[config.victim].features,
                   config.victim));
    train[config.victim].features = std::move(noisy.data);
    result.ledger.emplace(config.victim_plan->kappa, s.total_steps);
  }
  result.victim_train = train[config.victim];

  std::vector<BatchSampler> samplers;
  for (std::size_t c = 0; c < k; ++c) {
    samplers.push_back(ClientSampler(config, c));
  }

  for (std::size_t round = 0; round < s.rounds(); ++round) {
    std::vector<ClientUpdate> updates;
    for (std::size_t c = 0; c < k; ++c) {
      ModelParams local = global;
      const bool is_victim = c == config.victim;
      std::vector<StepRecord> steps;
      INFOCH_RETURN_IF_ERROR(LocalRound(local, train[c], s.learning_rate,
                                        s.local_steps, samplers[c],
                                        is_victim ? &steps : nullptr));
      if (is_victim) {
        VictimSnapshot snap;
        snap.round = round;
        snap.params_in.assign(global.params().begin(), global.params().end());
        snap.params_out.assign(local.params().begin(), local.params().end());
        for (std::size_t e = 0; e < steps.size(); ++e) {
          snap.batch_rows.insert(snap.batch_rows.end(), steps[e].batch.begin(),
                                 steps[e].batch.end());
          if (result.ledger.has_value()) {
            INFOCH_RETURN_IF_ERROR(result.ledger->Charge(
                round * s.local_steps + e, config.victim_plan->kappa));
          }
        }
        result.victim_snapshots.push_back(std::move(snap));
      }
      updates.push_back(
          {c,
           std::vector<double>(local.params().begin(), local.params().end()),
           weights[c]});
    }
    INFOCH_ASSIGN_OR_RETURN(std::vector<double> averaged,
                            FedAvg(std::move(updates)));
    INFOCH_RETURN_IF_ERROR(global.SetParams(averaged));
    ++result.aggregations;

    RoundMetrics metrics;
    metrics.round = round;
    for (std::size_t c = 0; c < k; ++c) {
      INFOCH_ASSIGN_OR_RETURN(double loss, global.Loss(train[c]));
      metrics.train_loss += weights[c] * loss;
    }
    metrics.test_acc = std::numeric_limits<double>::quiet_NaN();
    if (config.test.size() > 0 && !config.test.labels.empty()) {
      INFOCH_ASSIGN_OR_RETURN(metrics.test_acc, global.Accuracy(config.test));
    }
    if (result.ledger.has_value()) metrics.ledger_total = result.ledger->total();
    result.trace.push_back(metrics);
  }
  result.final_params.assign(global.params().begin(), global.params().end());
  return result;
}

absl::StatusOr<Matrix> MixedJacobian(const GradientFn& grad,
                                     std::span<const double> point, double h) {
  std::vector<double> x(point.begin(), point.end());
  Matrix jac;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double saved = x[j];
    x[j] = saved + h;
    INFOCH_ASSIGN_OR_RETURN(std::vector<double> plus, grad(x));
    x[j] = saved - h;
    INFOCH_ASSIGN_OR_RETURN(std::vector<double> minus, grad(x));
    x[j] = saved;
    if (jac.empty()) jac = Matrix(plus.size(), x.size());
    for (std::size_t p = 0; p < plus.size(); ++p) {
      jac(p, j) = (plus[p] - minus[p]) / (2.0 * h);
    }
  }
  return jac;
}

absl::StatusOr<TaylorReport> TaylorNoiseCheck(const GradientFn& grad,
                                              std::span<const double> point,
                                              std::span<const double> xi) {
  if (xi.size() != point.size()) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     "noise and data point differ in length");
  }
  TaylorReport report;
  INFOCH_ASSIGN_OR_RETURN(report.jacobian, MixedJacobian(grad, point));
  INFOCH_ASSIGN_OR_RETURN(std::vector<double> base, grad(point));
  auto discrepancy = [&](double scale) -> absl::StatusOr<double> {
    std::vector<double> shifted(point.begin(), point.end());
    std::vector<double> step(xi.size());
    for (std::size_t j = 0; j < xi.size(); ++j) {
      step[j] = scale * xi[j];
      shifted[j] += step[j];
    }
    INFOCH_ASSIGN_OR_RETURN(std::vector<double> moved, grad(shifted));
    const std::vector<double> linear = MatVec(report.jacobian, step);
    double s = 0.0;
    for (std::size_t p = 0; p < moved.size(); ++p) {
      const double r = moved[p] - base[p] - linear[p];
      s += r * r;
    }
    return std::sqrt(s);
  };
  INFOCH_ASSIGN_OR_RETURN(report.discrepancy, discrepancy(1.0));
  INFOCH_ASSIGN_OR_RETURN(report.discrepancy_half, discrepancy(0.5));
  report.ratio = report.discrepancy_half > 0.0
                     ? report.discrepancy / report.discrepancy_half
                     : 0.0;
  return report;
}

GradientFn SampleGradientFn(const ModelParams& model, std::size_t label,
                            std::span<const double> target) {
  std::vector<double> t(target.begin(), target.end());
  return [model, label, t](std::span<const double> x)
             -> absl::StatusOr<std::vector<double>> {
    LabeledData one;
    one.features = Matrix::Row(x);
    one.labels = {label};
    if (!t.empty()) one.targets = Matrix::Row(t);
    return model.Gradient(one);
  };
}

}  // namespace infoch
