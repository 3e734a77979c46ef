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
#ifndef AUGCONDD_TRAINING_H_
#define AUGCONDD_TRAINING_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "augcondd/augment.h"
#include "augcondd/dsp.h"
#include "augcondd/losses.h"
#include "augcondd/models.h"
#include "augcondd/random.h"

namespace augcondd::data {
struct Corpus;
}

namespace augcondd::training {

enum class TrainMode { kBaseline, kAugCondD };
std::string to_string(TrainMode mode);
TrainMode parse_mode(const std::string& name);

struct OptimizerConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double epsilon = 1e-8;
  int batch_size = 16;
  std::uint64_t max_iterations = 2'500'000;
  // Multiplicative decay applied once per epoch; 1.0 disables it.
  double lr_decay = 0.999;
  // Global gradient-norm clip per network; 0 disables clipping.
  double grad_clip = 0.0;

  void validate() const;
};

struct ModelSpec {
  dsp::MelConfig mel = dsp::MelConfig::paper();
  models::GeneratorConfig generator = models::GeneratorConfig::paper();
  models::DiscriminatorConfig discriminator = models::DiscriminatorConfig::paper();

  void validate() const;
};

struct AdamState {
  models::ParamSet m;
  models::ParamSet v;
  std::uint64_t t = 0;
};

AdamState init_adam(const models::ParamSet& params);
// Bias-corrected Adam. grads follow params.entries order.
void adam_step(models::ParamSet& params, std::span<const Tensor> grads,
               AdamState& state, double lr, const OptimizerConfig& cfg);

struct TrainState {
  std::uint64_t step = 0;
  models::ParamSet generator;
  models::ParamSet discriminator;
  AdamState adam_g;
  AdamState adam_d;
  Rng rng;
  bool has_best = false;
  std::uint64_t best_step = 0;
  double best_val = std::numeric_limits<double>::infinity();
  std::uint64_t stale_validations = 0;

  bool operator==(const TrainState& other) const;
};

// Generator weights from seed, discriminator from seed + 1, data stream from
// seed + 2.
TrainState init_state(const ModelSpec& spec, std::uint64_t seed);

// What the generator was fed during one step; for instrumentation.
struct StepView {
  std::uint64_t step = 0;
  const augment::TrainingBatch* batch = nullptr;
  std::span<const dsp::Waveform> clean_segments;  // before augmentation
  const Tensor* generator_input = nullptr;        // (B, n_mels, frames)
  const Tensor* discriminator_mu = nullptr;       // null in baseline mode
};
using StepProbe = std::function<void(const StepView&)>;

// Loss values and (optionally) gradients at fixed parameters, no update.
struct LossEvaluation {
  losses::LossBreakdown losses;
  std::vector<Tensor> grad_generator;      // d total_g / d generator params
  std::vector<Tensor> grad_discriminator;  // d total_d / d discriminator params
};

class Trainer {
 public:
  Trainer(ModelSpec spec, OptimizerConfig optimizer, losses::LossWeights weights,
          TrainMode mode);

  const ModelSpec& spec() const { return spec_; }
  TrainMode mode() const { return mode_; }
  dsp::MelExtractor& extractor() { return extractor_; }

  // D on total_d first, then G on total_g through the updated D. Returns the
  // losses measured in the step (adv_d before the D update, generator terms
  // after it). Throws DivergenceError with state restored when a loss is
  // non-finite.
  losses::LossBreakdown train_step(TrainState& state,
                                   const augment::TrainingBatch& batch,
                                   double lr,
                                   std::span<const dsp::Waveform> clean = {});

  LossEvaluation evaluate(const models::ParamSet& generator,
                          const models::ParamSet& discriminator,
                          const augment::TrainingBatch& batch,
                          bool want_gradients);

  void set_probe(StepProbe probe) { probe_ = std::move(probe); }

 private:
  ModelSpec spec_;
  OptimizerConfig optimizer_;
  losses::LossWeights weights_;
  TrainMode mode_;
  dsp::MelExtractor extractor_;
  StepProbe probe_;
};

struct LogRecord {
  enum class Kind { kTrain, kVal };
  Kind kind = Kind::kTrain;
  std::uint64_t step = 0;
  losses::LossBreakdown losses;
  double lr = 0.0;
  double seconds = 0.0;
  double val_mel_l1 = 0.0;
};

// One JSON object per line. Train rows: kind, step, adv_d, adv_g, fm, mel,
// total_g, total_d, lr, seconds. Validation rows: kind, step, val_mel_l1,
// seconds.
std::string to_json_line(const LogRecord& record);
LogRecord parse_json_line(const std::string& line);

struct RunOptions {
  ModelSpec spec;
  OptimizerConfig optimizer;
  losses::LossWeights weights;
  TrainMode mode = TrainMode::kAugCondD;
  augment::AugmentationKind augmentation = augment::AugmentationKind::kMixup;
  augment::Strategy strategy = augment::Strategy::kS2;
  augment::AugmentOptions augment_options;
  std::uint64_t seed = 0;
  std::size_t segment_length = 8192;
  std::uint64_t checkpoint_every = 0;  // 0: initial and final only
  std::uint64_t validate_every = 1000;
  std::uint64_t patience = 0;          // validations without improvement; 0 off
  bool log_wall_time = true;
  std::string out_dir;                 // empty: keep everything in memory
  std::string config_echo;
  StepProbe probe;
  std::function<void(const LogRecord&)> on_record;

  void validate() const;
};

struct TrainResult {
  TrainState state;
  std::vector<LogRecord> log;
  bool early_stopped = false;
};

// Mean mel-L1 of copy synthesis over the clips (no augmentation, mu never
// used).
double validation_mel_l1(const ModelSpec& spec, const models::ParamSet& generator,
                         const data::Corpus& val);

// Alternating training. With out_dir set writes metrics.jsonl, checkpoints
// under checkpoints/, latest.ckpt and best.ckpt. resume_from continues from a
// checkpoint written by an identical configuration.
TrainResult run_training(const RunOptions& options, const data::Corpus& train,
                         const data::Corpus& val,
                         const std::optional<std::string>& resume_from = {});

// Step of the minimal validation mel-L1 (earliest on ties). Throws
// InvalidInputError if the log has no validation rows.
std::uint64_t select_best(std::span<const LogRecord> log);
// True once the last `patience` validations failed to improve on the best
// earlier one.
bool should_stop(std::span<const LogRecord> log, std::uint64_t patience);

}  // namespace augcondd::training

#endif  // AUGCONDD_TRAINING_H_
