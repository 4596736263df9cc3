// Copyright 2026 The vadfuse Authors.
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

// Command-line front end: one binary with the subcommands corpus, extract,
// train, predict, eval, mi and tune.

#ifndef VADFUSE_COMMANDS_H_
#define VADFUSE_COMMANDS_H_

#include <ostream>
#include <string>
#include <vector>

#include "vadfuse/common.h"
#include "vadfuse/config.h"

namespace vadfuse::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIo = 2,
  kExitData = 3,  // malformed input files and degenerate data
  kExitNumeric = 4,
};

int exit_code_for(ErrorKind kind);

// args[0] is the program name. Never throws.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

// Global options and config keys only (no subcommand needed). Throws
// Error(kUsage) on unknown keys or malformed values.
RunConfig parse_run_config(const std::vector<std::string> &args);

std::string help_text();

}  // namespace vadfuse::cli

#endif  // VADFUSE_COMMANDS_H_
