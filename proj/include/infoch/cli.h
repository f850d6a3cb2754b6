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

// Command-line front end. Exit codes: 0 success, 1 math or domain error,
// 2 usage or I/O error.

#ifndef INFOCH_CLI_H_
#define INFOCH_CLI_H_

#include <ostream>
#include <string>
#include <vector>

#include "absl/status/status.h"

namespace infoch {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

int ExitCodeFor(const absl::Status& status);

// Writes via a temporary file in the same directory and a rename.
absl::Status WriteFileAtomic(const std::string& path,
                             const std::string& contents);

std::string VersionString();

}  // namespace infoch

#endif  // INFOCH_CLI_H_
