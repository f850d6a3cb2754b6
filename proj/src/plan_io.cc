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

#include "infoch/plan_io.h"

#include <fstream>
#include <sstream>

#include "absl/strings/str_cat.h"
#include "infoch/error.h"

namespace infoch {

using nlohmann::json;

json MatrixToJson(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

absl::StatusOr<Matrix> MatrixFromJson(const json& j) {
  if (!j.is_array() || j.empty()) {
    return MakeError(ErrorCode::kParseError, "matrix must be a nonempty array");
  }
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix m(j.size(), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      return MakeError(ErrorCode::kParseError,
                       absl::StrCat("matrix row ", r, " has wrong length"));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        return MakeError(ErrorCode::kParseError, "matrix entry is not a number");
      }
      m(r, c) = j[r][c].get<double>();
    }
  }
  return m;
}

json PlanToJson(const NoisePlan& plan) {
  json shape;
  if (const auto* iso = std::get_if<IsotropicShape>(&plan.shape)) {
    shape = {{"type", "isotropic"}, {"sigma", iso->sigma}};
  } else if (const auto* eig = std::get_if<EigenDiagonalShape>(&plan.shape)) {
    shape = {{"type", "eigen_diagonal"},
             {"psi", eig->psi},
             {"basis", MatrixToJson(eig->basis)}};
  } else {
    const auto& sd = std::get<ScaledDiagonalShape>(plan.shape);
    shape = {{"type", "scaled_diagonal"},
             {"sigma", sd.sigma},
             {"beta", sd.beta}};
  }
  return {{"kind", ChannelKindName(plan.kind)},
          {"d", plan.dim},
          {"kappa_nats", plan.kappa},
          {"shape", shape},
          {"seed", plan.seed}};
}

absl::StatusOr<NoisePlan> PlanFromJson(const json& j) {
  try {
    NoisePlan plan;
    INFOCH_ASSIGN_OR_RETURN(plan.kind,
                            ParseChannelKind(j.at("kind").get<std::string>()));
    plan.dim = j.at("d").get<std::size_t>();
    plan.kappa = j.at("kappa_nats").get<double>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    const json& shape = j.at("shape");
    const std::string type = shape.at("type").get<std::string>();
    if (type == "isotropic") {
      plan.shape = IsotropicShape{shape.at("sigma").get<double>()};
    } else if (type == "eigen_diagonal") {
      EigenDiagonalShape s;
      s.psi = shape.at("psi").get<std::vector<double>>();
      INFOCH_ASSIGN_OR_RETURN(s.basis, MatrixFromJson(shape.at("basis")));
      if (s.psi.size() != plan.dim || s.basis.rows() != plan.dim ||
          s.basis.cols() != plan.dim) {
        return MakeError(ErrorCode::kParseError,
                         "eigen_diagonal shape does not match d");
      }
      plan.shape = std::move(s);
    } else if (type == "scaled_diagonal") {
      ScaledDiagonalShape s;
      s.sigma = shape.at("sigma").get<double>();
      s.beta = shape.at("beta").get<std::vector<double>>();
      if (s.beta.size() != plan.dim) {
        return MakeError(ErrorCode::kParseError, "beta length does not match d");
      }
      plan.shape = std::move(s);
    } else {
      return MakeError(ErrorCode::kParseError,
                       absl::StrCat("unknown shape type '", type, "'"));
    }
    return plan;
  } catch (const json::exception& e) {
    return MakeError(ErrorCode::kParseError, e.what());
  }
}

absl::StatusOr<NoisePlan> ReadPlanFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return MakeError(ErrorCode::kParseError, absl::StrCat("cannot open ", path));
  }
  json j = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return MakeError(ErrorCode::kParseError,
                     absl::StrCat(path, " is not valid JSON"));
  }
  return PlanFromJson(j);
}

}  // namespace infoch
