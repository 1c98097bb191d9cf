// Copyright 2026 The SWE Authors.
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

// The `swe` command-line driver. Each subcommand runs one pipeline stage.
// Parameters come from an optional flat key=value file (--config) and
// from flags, which win. Config keys may be bare (`dim = 256`) or scoped
// to one stage (`pca.dim = 256`).
//
// Exit status: 0 on success, 1 on data or I/O errors, 2 on usage errors
// (bad flags, unknown config keys, missing required parameters).

#ifndef SWE_CLI_H_
#define SWE_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace swe {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

// `args[0]` is the program name. Reports go to `out`, diagnostics and
// warnings to `err`.
int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
int RunCli(int argc, const char *const *argv);

}  // namespace swe

#endif  // SWE_CLI_H_
