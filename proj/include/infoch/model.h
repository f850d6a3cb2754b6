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

// Tiny from-scratch models with analytic gradients.

#ifndef INFOCH_MODEL_H_
#define INFOCH_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "infoch/matrix.h"

namespace infoch {

enum class ModelKind { kLinearRegression, kLogisticRegression, kMlp };

absl::string_view ModelKindName(ModelKind kind);
absl::StatusOr<ModelKind> ParseModelKind(absl::string_view name);

// Features plus labels. Classification models read `labels`; linear
// regression reads `targets` (n x outputs), or one-hot labels if empty.
struct LabeledData {
  Matrix features;
  std::vector<std::size_t> labels;
  Matrix targets;

  std::size_t size() const { return features.rows(); }
  LabeledData Subset(std::span<const std::size_t> rows) const;
};

// One fully connected layer inside the flat parameter vector: the weight
// block (out x in, row-major) starts at `weight_offset`, the bias at
// `bias_offset`.
struct LayerLayout {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

class ModelParams {
 public:
  // Mlp takes 1 or 2 hidden widths, each at most 64; the other kinds take
  // none.
  static absl::StatusOr<ModelParams> Create(
      ModelKind kind, std::size_t inputs, std::size_t outputs,
      std::vector<std::size_t> hidden = {});

  ModelKind kind() const { return kind_; }
  std::size_t inputs() const { return layers_.front().inputs; }
  std::size_t outputs() const { return layers_.back().outputs; }
  const std::vector<std::size_t>& hidden() const { return hidden_; }
  const std::vector<LayerLayout>& layers() const { return layers_; }
  std::size_t size() const { return params_.size(); }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  absl::Status SetParams(std::span<const double> values);

  // Normal(0, 1/fan_in) weights and zero biases, from a counter stream.
  void InitRandom(std::uint64_t seed);

  // Raw outputs (regression values or logits), one row per sample.
  absl::StatusOr<Matrix> Forward(const Matrix& features) const;

  // Mean loss: 1/2 squared error for regression, cross-entropy otherwise.
  absl::StatusOr<double> Loss(const LabeledData& batch) const;
  absl::StatusOr<std::vector<double>> Gradient(const LabeledData& batch) const;

  // Fraction of argmax predictions that equal the label.
  absl::StatusOr<double> Accuracy(const LabeledData& data) const;

 private:
  ModelParams(ModelKind kind, std::vector<std::size_t> hidden,
              std::vector<LayerLayout> layers);

  absl::Status CheckBatch(const LabeledData& batch) const;
  // Per-sample activations; acts[0] is the input.
  std::vector<std::vector<double>> ForwardSample(
      std::span<const double> x) const;
  // d loss / d output for one sample.
  std::vector<double> OutputError(std::span<const double> out,
                                  const LabeledData& batch,
                                  std::size_t r) const;
  double SampleLoss(std::span<const double> out, const LabeledData& batch,
                    std::size_t r) const;

  ModelKind kind_;
  std::vector<std::size_t> hidden_;
  std::vector<LayerLayout> layers_;
  std::vector<double> params_;
};

}  // namespace infoch

#endif  // INFOCH_MODEL_H_
