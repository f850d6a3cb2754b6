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

#include "infoch/model.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include "absl/strings/str_cat.h"
#include "infoch/error.h"
#include "infoch/rng.h"

namespace infoch {
namespace {

constexpr std::size_t kMaxHiddenLayers = 2;
constexpr std::size_t kMaxHiddenWidth = 64;

// Stable log-sum-exp over logits.
double LogSumExp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

}  // namespace

absl::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinearRegression:
      return "linear";
    case ModelKind::kLogisticRegression:
      return "logistic";
    case ModelKind::kMlp:
      return "mlp";
  }
  return "unknown";
}

absl::StatusOr<ModelKind> ParseModelKind(absl::string_view name) {
  if (name == "linear") return ModelKind::kLinearRegression;
  if (name == "logistic") return ModelKind::kLogisticRegression;
  if (name == "mlp") return ModelKind::kMlp;
  return MakeError(ErrorCode::kParseError,
                   absl::StrCat("unknown model kind '", name, "'"));
}

LabeledData LabeledData::Subset(std::span<const std::size_t> rows) const {
  LabeledData out;
  std::vector<std::size_t> cols(features.cols());
  for (std::size_t c = 0; c < cols.size(); ++c) cols[c] = c;
  out.features = features.Select(rows, cols);
  if (!labels.empty()) {
    for (std::size_t r : rows) out.labels.push_back(labels[r]);
  }
  if (!targets.empty()) {
    std::vector<std::size_t> tcols(targets.cols());
    for (std::size_t c = 0; c < tcols.size(); ++c) tcols[c] = c;
    out.targets = targets.Select(rows, tcols);
  }
  return out;
}

ModelParams::ModelParams(ModelKind kind, std::vector<std::size_t> hidden,
                         std::vector<LayerLayout> layers)
    : kind_(kind), hidden_(std::move(hidden)), layers_(std::move(layers)) {
  const LayerLayout& last = layers_.back();
  params_.assign(last.bias_offset + last.outputs, 0.0);
}

absl::StatusOr<ModelParams> ModelParams::Create(
    ModelKind kind, std::size_t inputs, std::size_t outputs,
    std::vector<std::size_t> hidden) {
  if (inputs == 0 || outputs == 0) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "model needs at least one input and one output");
  }
  if (kind != ModelKind::kLinearRegression && outputs < 2) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "classifiers need at least two classes");
  }
  if (kind == ModelKind::kMlp) {
    if (hidden.empty() || hidden.size() > kMaxHiddenLayers) {
      return MakeError(ErrorCode::kInvalidArgument,
                       "mlp takes one or two hidden layers");
    }
    for (std::size_t w : hidden) {
      if (w == 0 || w > kMaxHiddenWidth) {
        return MakeError(ErrorCode::kInvalidArgument,
                         absl::StrCat("hidden width must be in [1, ",
                                      kMaxHiddenWidth, "], got ", w));
      }
    }
  } else if (!hidden.empty()) {
    return MakeError(ErrorCode::kInvalidArgument,
                     "only mlp models have hidden layers");
  }
  std::vector<std::size_t> widths = {inputs};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(outputs);
  std::vector<LayerLayout> layers;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    LayerLayout layer{widths[l], widths[l + 1], offset, 0};
    layer.bias_offset = offset + layer.inputs * layer.outputs;
    offset = layer.bias_offset + layer.outputs;
    layers.push_back(layer);
  }
  return ModelParams(kind, std::move(hidden), std::move(layers));
}

absl::Status ModelParams::SetParams(std::span<const double> values) {
  if (values.size() != params_.size()) {
    return MakeError(ErrorCode::kShapeMismatch,
                     absl::StrCat("expected ", params_.size(),
                                  " parameters, got ", values.size()));
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      return MakeError(ErrorCode::kNonFinite, "non-finite parameter");
    }
  }
  std::copy(values.begin(), values.end(), params_.begin());
  return absl::OkStatus();
}

void ModelParams::InitRandom(std::uint64_t seed) {
  CounterRng rng(seed, 0);
  std::fill(params_.begin(), params_.end(), 0.0);
  for (const LayerLayout& layer : layers_) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(layer.inputs));
    for (std::size_t i = 0; i < layer.inputs * layer.outputs; ++i) {
      params_[layer.weight_offset + i] = scale * rng.NextNormal();
    }
  }
}

std::vector<std::vector<double>> ModelParams::ForwardSample(
    std::span<const double> x) const {
  std::vector<std::vector<double>> acts;
  acts.emplace_back(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerLayout& layer = layers_[l];
    const std::vector<double>& in = acts.back();
    std::vector<double> out(layer.outputs);
    for (std::size_t o = 0; o < layer.outputs; ++o) {
      double z = params_[layer.bias_offset + o];
      const double* w = &params_[layer.weight_offset + o * layer.inputs];
      for (std::size_t i = 0; i < layer.inputs; ++i) z += w[i] * in[i];
      out[o] = (l + 1 < layers_.size()) ? std::tanh(z) : z;
    }
    acts.push_back(std::move(out));
  }
  return acts;
}

absl::Status ModelParams::CheckBatch(const LabeledData& batch) const {
  if (batch.size() == 0) {
    return MakeError(ErrorCode::kInvalidArgument, "empty batch");
  }
  if (batch.features.cols() != inputs()) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     absl::StrCat("model expects ", inputs(),
                                  " features, batch has ",
                                  batch.features.cols()));
  }
  const bool use_targets =
      kind_ == ModelKind::kLinearRegression && !batch.targets.empty();
  if (use_targets) {
    if (batch.targets.rows() != batch.size() ||
        batch.targets.cols() != outputs()) {
      return MakeError(ErrorCode::kDimensionMismatch,
                       "targets do not match batch size and model outputs");
    }
    return absl::OkStatus();
  }
  if (batch.labels.size() != batch.size()) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     "labels do not match batch size");
  }
  for (std::size_t y : batch.labels) {
    if (y >= outputs()) {
      return MakeError(ErrorCode::kDimensionMismatch,
                       absl::StrCat("label ", y, " out of range for ",
                                    outputs(), " outputs"));
    }
  }
  return absl::OkStatus();
}

double ModelParams::SampleLoss(std::span<const double> out,
                               const LabeledData& batch,
                               std::size_t r) const {
  if (kind_ == ModelKind::kLinearRegression) {
    double s = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double target = batch.targets.empty()
                                ? (batch.labels[r] == k ? 1.0 : 0.0)
                                : batch.targets(r, k);
      s += (out[k] - target) * (out[k] - target);
    }
    return 0.5 * s;
  }
  return LogSumExp(out) - out[batch.labels[r]];
}

std::vector<double> ModelParams::OutputError(std::span<const double> out,
                                             const LabeledData& batch,
                                             std::size_t r) const {
  std::vector<double> delta(out.size());
  if (kind_ == ModelKind::kLinearRegression) {
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double target = batch.targets.empty()
                                ? (batch.labels[r] == k ? 1.0 : 0.0)
                                : batch.targets(r, k);
      delta[k] = out[k] - target;
    }
    return delta;
  }
  const double lse = LogSumExp(out);
  for (std::size_t k = 0; k < out.size(); ++k) {
    delta[k] = std::exp(out[k] - lse);
  }
  delta[batch.labels[r]] -= 1.0;
  return delta;
}

absl::StatusOr<Matrix> ModelParams::Forward(const Matrix& features) const {
  if (features.cols() != inputs()) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     absl::StrCat("model expects ", inputs(),
                                  " features, got ", features.cols()));
  }
  Matrix out(features.rows(), outputs());
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto acts = ForwardSample(features.row(r));
    std::copy(acts.back().begin(), acts.back().end(), out.row(r).begin());
  }
  return out;
}

absl::StatusOr<double> ModelParams::Loss(const LabeledData& batch) const {
  INFOCH_RETURN_IF_ERROR(CheckBatch(batch));
  double total = 0.0;
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto acts = ForwardSample(batch.features.row(r));
    total += SampleLoss(acts.back(), batch, r);
  }
  return total / static_cast<double>(batch.size());
}

absl::StatusOr<std::vector<double>> ModelParams::Gradient(
    const LabeledData& batch) const {
  INFOCH_RETURN_IF_ERROR(CheckBatch(batch));
  std::vector<double> grad(params_.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const auto acts = ForwardSample(batch.features.row(r));
    std::vector<double> delta = OutputError(acts.back(), batch, r);
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const LayerLayout& layer = layers_[l];
      const std::vector<double>& in = acts[l];
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double g = delta[o] * inv_n;
        grad[layer.bias_offset + o] += g;
        double* gw = &grad[layer.weight_offset + o * layer.inputs];
        for (std::size_t i = 0; i < layer.inputs; ++i) gw[i] += g * in[i];
      }
      if (l == 0) break;
      // Back through W and the tanh of the previous layer.
      std::vector<double> prev(layer.inputs, 0.0);
      for (std::size_t o = 0; o < layer.outputs; ++o) {
        const double* w = &params_[layer.weight_offset + o * layer.inputs];
        for (std::size_t i = 0; i < layer.inputs; ++i) {
          prev[i] += w[i] * delta[o];
        }
      }
      for (std::size_t i = 0; i < layer.inputs; ++i) {
        prev[i] *= 1.0 - in[i] * in[i];
      }
      delta = std::move(prev);
    }
  }
  return grad;
}

absl::StatusOr<double> ModelParams::Accuracy(const LabeledData& data) const {
  if (data.labels.size() != data.size() || data.size() == 0) {
    return MakeError(ErrorCode::kDimensionMismatch,
                     "accuracy needs one label per sample");
  }
  INFOCH_ASSIGN_OR_RETURN(Matrix out, Forward(data.features));
  std::size_t correct = 0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = out.row(r);
    const auto best = static_cast<std::size_t>(
        std::max_element(row.begin(), row.end()) - row.begin());
    if (best == data.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace infoch
