// Copyright 2026 The AugCondD Authors
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
#ifndef AUGCONDD_CLI_H_
#define AUGCONDD_CLI_H_

#include <iosfwd>
#include <span>
#include <string>

#include "augcondd/training.h"

namespace augcondd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDivergence = 3;
inline constexpr int kExitIo = 4;

// Environment variable naming a default config file for `train`.
inline constexpr char kConfigEnv[] = "AUGCONDD_CONFIG";

// Subcommands: gen-data, train, synth, eval, preview-aug.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Line plot of total_g and validation mel-L1 against step.
std::string plot_svg(std::span<const training::LogRecord> log);

}  // namespace augcondd::cli

#endif  // AUGCONDD_CLI_H_
