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
#ifndef AUGCONDD_CONFIG_H_
#define AUGCONDD_CONFIG_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "augcondd/augment.h"
#include "augcondd/losses.h"
#include "augcondd/training.h"

namespace augcondd::config {

// Everything a run needs, flat. Text form is one "key = value" per line with
// '#' comments; see keys() for the vocabulary.
struct RunConfig {
  std::string profile = "desk";
  training::ModelSpec spec;
  training::OptimizerConfig optimizer;
  losses::LossWeights weights;
  training::TrainMode mode = training::TrainMode::kAugCondD;
  augment::AugmentationKind augmentation = augment::AugmentationKind::kMixup;
  augment::Strategy strategy = augment::Strategy::kS2;
  bool fit_to_segment = true;
  std::uint64_t seed = 0;
  std::size_t segment_length = 2048;
  std::uint64_t checkpoint_every = 0;
  std::uint64_t validate_every = 200;
  std::uint64_t patience = 0;
  bool log_wall_time = true;
  std::string train_dir;
  std::string val_dir;
  std::string out_dir;
  double subset_ratio = 1.0;
  std::uint64_t subset_seed = 0;

  // Throws ConfigError naming the key whose value breaks a constraint.
  void validate() const;
  // Model spec with the discriminator conditioned according to mode.
  training::ModelSpec model_spec() const;
  // config_echo leaves out train_dir, val_dir and out_dir.
  training::RunOptions run_options() const;
};

struct KeyInfo {
  std::string name;
  std::string help;
  std::string paper_default;  // empty when the paper gives none
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

const std::vector<KeyInfo>& keys();
const KeyInfo* find_key(const std::string& name);

// "paper" (published settings) or "desk" (small, CPU-friendly).
RunConfig profile(const std::string& name);

using Entries = std::vector<std::pair<std::string, std::string>>;
// Parses "key = value" text. Unknown keys and malformed lines raise
// ConfigError with the line number.
Entries parse_entries(const std::string& text, const std::string& origin = "config");
void apply(RunConfig& cfg, const Entries& entries);

// Profile (an explicit one wins over the file's "profile" key), then the
// file, then overrides.
RunConfig load(const std::optional<std::string>& profile_name,
               const std::optional<std::string>& file, const Entries& overrides);

// Every key in registry order; parse_entries(echo(c)) rebuilds c exactly.
std::string echo(const RunConfig& cfg);
RunConfig from_echo(const std::string& text);

}  // namespace augcondd::config

#endif  // AUGCONDD_CONFIG_H_
