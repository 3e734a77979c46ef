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
#ifndef AUGCONDD_MODELS_H_
#define AUGCONDD_MODELS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "augcondd/augment.h"
#include "augcondd/autograd.h"
#include "augcondd/dsp.h"
#include "augcondd/tensor.h"

namespace augcondd::models {

struct NamedTensor {
  std::string name;
  Tensor value;
  bool operator==(const NamedTensor&) const = default;
};

// Ordered parameter container; forward passes consume entries in order.
struct ParamSet {
  std::vector<NamedTensor> entries;

  std::size_t num_tensors() const { return entries.size(); }
  std::size_t num_scalars() const;
  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);
  // Same names and shapes, every value zero.
  ParamSet zeros_like() const;
  bool operator==(const ParamSet&) const = default;
};

// HiFi-GAN style generator: pre conv, one transposed-conv upsampling stage per
// factor (each followed by a residual dilated-conv block), post conv, tanh.
struct GeneratorConfig {
  int n_mels = 80;
  int channels = 128;
  std::vector<int> upsample_factors = {8, 8, 4};
  int pre_kernel = 7;
  int post_kernel = 7;
  int resblock_kernel = 3;
  std::vector<int> resblock_dilations = {1, 3};
  double leaky_slope = 0.1;
  double init_std = 0.01;

  int hop_length() const;
  // Channels after upsampling stage i: channels / 2^(i + 1), at least 1.
  int stage_channels(std::size_t stage) const;
  static int upsample_kernel(int factor);
  static int upsample_padding(int factor);
  // Throws ConfigError; hop_length must equal the mel hop.
  void validate(int mel_hop_length) const;

  static GeneratorConfig paper();
  static GeneratorConfig desk();
};

struct DiscLayer {
  int out_channels = 1;
  int kernel = 3;
  int stride = 1;
};

// Multi-scale discriminator: num_scales sub-discriminators, scale k sees the
// input average-pooled by 2 k times. Every layer has "same" padding; all but
// the last are followed by a leaky ReLU. When augmentation_conditional, every
// sub-discriminator's input carries 1 + mu_dim channels.
struct DiscriminatorConfig {
  int num_scales = 2;
  std::vector<DiscLayer> layers = {
      {16, 15, 1}, {64, 41, 4}, {128, 41, 4}, {128, 5, 1}, {1, 3, 1}};
  bool augmentation_conditional = false;
  int mu_dim = 1;
  double leaky_slope = 0.1;
  double init_std = 0.01;

  int input_channels() const { return augmentation_conditional ? 1 + mu_dim : 1; }
  void validate() const;

  static DiscriminatorConfig paper();
  static DiscriminatorConfig desk();
};

// Normal(0, init_std) weights, zero biases; deterministic in seed.
ParamSet init_params(const GeneratorConfig& cfg, std::uint64_t seed);
ParamSet init_params(const DiscriminatorConfig& cfg, std::uint64_t seed);

// Conditional copy of an unconditional discriminator: each sub-discriminator's
// input layer gains mu_dim channels whose weights are zero, so scores ignore mu.
ParamSet widen_input_channels(const DiscriminatorConfig& unconditional,
                              const ParamSet& params, int mu_dim);

// Leaf variables for a parameter set, in entry order.
std::vector<nn::Var> bind(nn::Tape& tape, const ParamSet& params,
                          bool requires_grad);

// mel: (B, n_mels, frames) -> (B, 1, frames * hop).
nn::Var generator_forward(const GeneratorConfig& cfg,
                          std::span<const nn::Var> params, const nn::Var& mel);

struct SubDiscOutput {
  nn::Var score;                 // (B, 1, T_k), un-activated
  std::vector<nn::Var> features;  // every layer output, last == score
};

struct DiscOutput {
  std::vector<SubDiscOutput> scales;
};

// x: (B, 1, T); mu: (B, d) and required iff cfg.augmentation_conditional.
DiscOutput discriminator_forward(const DiscriminatorConfig& cfg,
                                 std::span<const nn::Var> params,
                                 const nn::Var& x,
                                 const std::optional<nn::Var>& mu);

// Batches of waves / mels as (B, 1, T) and (B, n_mels, frames) tensors.
Tensor stack_waves(std::span<const dsp::Waveform> waves);
Tensor stack_mels(std::span<const dsp::MelSpectrogram> mels);
Tensor stack_states(std::span<const augment::AugmentationState> states);

// Value-level entry points.
dsp::Waveform generate(const GeneratorConfig& cfg, const ParamSet& params,
                       const dsp::MelSpectrogram& mel);

// (1 + d, t): channel 0 is the wave, channels 1..d repeat mu t times.
Tensor condition_input(const dsp::Waveform& wave,
                       const augment::AugmentationState& mu);

struct Discrimination {
  std::vector<Tensor> scores;                 // one per scale, (1, 1, T_k)
  std::vector<std::vector<Tensor>> features;  // per scale, per layer
};

Discrimination discriminate(const DiscriminatorConfig& cfg,
                            const ParamSet& params, const dsp::Waveform& wave,
                            const std::optional<augment::AugmentationState>& mu);

}  // namespace augcondd::models

#endif  // AUGCONDD_MODELS_H_
