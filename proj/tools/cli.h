// Copyright 2026 The cometkb Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COMETKB_TOOLS_CLI_H_
#define COMETKB_TOOLS_CLI_H_

namespace cometkb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;

// Entry point of the cometkb tool; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace cometkb

#endif  // COMETKB_TOOLS_CLI_H_
