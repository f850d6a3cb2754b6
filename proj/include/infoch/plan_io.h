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

#ifndef INFOCH_PLAN_IO_H_
#define INFOCH_PLAN_IO_H_

#include <string>
#include <string_view>

#include "absl/status/statusor.h"
#include "infoch/channels.h"
#include "json.hpp"

namespace infoch {

// {kind, d, kappa_nats, shape: {type, sigma | psi[] + basis[][] |
//  sigma + beta[]}, seed}. Doubles are written in shortest round-trip form,
// so PlanFromJson(PlanToJson(p)) reproduces p bit for bit.
nlohmann::json PlanToJson(const NoisePlan& plan);
absl::StatusOr<NoisePlan> PlanFromJson(const nlohmann::json& j);

nlohmann::json MatrixToJson(const Matrix& m);
absl::StatusOr<Matrix> MatrixFromJson(const nlohmann::json& j);

absl::StatusOr<NoisePlan> ReadPlanFile(const std::string& path);

}  // namespace infoch

#endif  // INFOCH_PLAN_IO_H_
