/*
 * Copyright 2026 The smddp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef SMDDP_TOOLS_CLI_H_
#define SMDDP_TOOLS_CLI_H_

#include <iosfwd>

namespace smddp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Environment variable naming a default config file.
inline constexpr const char* kConfigEnv = "SMDDP_CONFIG";

int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smddp::cli

#endif  // SMDDP_TOOLS_CLI_H_
