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
#ifndef AUGCONDD_LOSSES_H_
#define AUGCONDD_LOSSES_H_

#include <concepts>
#include <cstdint>
#include <optional>
#include <vector>

#include "augcondd/augment.h"
#include "augcondd/autograd.h"
#include "augcondd/dsp.h"
#include "augcondd/models.h"

// Least-squares adversarial, feature-matching and mel losses. The same code
// serves the unconditional and the augmentation-conditional discriminator;
// the only difference is whether mu reaches discriminator_forward.
namespace augcondd::losses {

struct LossWeights {
  double lambda_fm = 2.0;
  double lambda_mel = 45.0;
  void validate() const;
};

struct LossParts {
  double adv_d = 0.0;
  double adv_g = 0.0;
  double fm = 0.0;
  double mel = 0.0;
};

struct LossBreakdown {
  double adv_d = 0.0;
  double adv_g = 0.0;
  double fm = 0.0;
  double mel = 0.0;
  double total_g = 0.0;
  double total_d = 0.0;
  bool operator==(const LossBreakdown&) const = default;
};

// Mean over sub-discriminators of mean((D(real) - 1)^2) + mean(D(fake)^2).
nn::Var adv_loss_d(const models::DiscOutput& real, const models::DiscOutput& fake);
// Mean over sub-discriminators of mean((D(fake) - 1)^2).
nn::Var adv_loss_g(const models::DiscOutput& fake);
// Per sub-discriminator: sum over layers of mean |D_i(real) - D_i(fake)|
// (the 1/N_i normalisation, averaged over the batch); then averaged across
// sub-discriminators.
nn::Var fm_loss(const models::DiscOutput& real, const models::DiscOutput& fake);
// mean |log_mel(fake) - target|, target shaped (B, frames, n_mels).
nn::Var mel_loss(const nn::Var& fake_wave, const nn::Var& target_log_mel,
                 dsp::MelExtractor& extractor);
// adv_g + lambda_fm * fm + lambda_mel * mel.
nn::Var generator_total(const nn::Var& adv_g, const nn::Var& fm,
                        const nn::Var& mel, const LossWeights& weights);

// Throws DivergenceError (tagged with step) when any part is non-finite.
LossBreakdown total_losses(const LossParts& parts, const LossWeights& weights,
                           std::uint64_t step = 0);

// Anything that maps (tape, wave batch, optional mu) to discriminator outputs.
template <typename D>
concept Discriminator = requires(const D& d, nn::Tape& tape, const nn::Var& x,
                                 const std::optional<nn::Var>& mu) {
  { d(tape, x, mu) } -> std::same_as<models::DiscOutput>;
};

// Binds a parameter set on every call.
struct ModelDiscriminator {
  const models::DiscriminatorConfig& config;
  const models::ParamSet& params;
  bool params_require_grad = false;

  models::DiscOutput operator()(nn::Tape& tape, const nn::Var& x,
                                const std::optional<nn::Var>& mu) const;
};

namespace detail {

struct Inputs {
  nn::Var real;
  nn::Var fake;
  std::optional<nn::Var> mu;
};

Inputs make_inputs(nn::Tape& tape, const dsp::Waveform* real,
                   const dsp::Waveform& fake,
                   const std::optional<augment::AugmentationState>& mu);

}  // namespace detail

// Single-example value-level forms.
template <Discriminator D>
double adv_loss_d(const D& disc, const dsp::Waveform& real,
                  const dsp::Waveform& fake,
                  const std::optional<augment::AugmentationState>& mu) {
  nn::Tape tape;
  detail::Inputs in = detail::make_inputs(tape, &real, fake, mu);
  return adv_loss_d(disc(tape, in.real, in.mu), disc(tape, in.fake, in.mu)).item();
}

template <Discriminator D>
double adv_loss_g(const D& disc, const dsp::Waveform& fake,
                  const std::optional<augment::AugmentationState>& mu) {
  nn::Tape tape;
  detail::Inputs in = detail::make_inputs(tape, nullptr, fake, mu);
  return adv_loss_g(disc(tape, in.fake, in.mu)).item();
}

template <Discriminator D>
double fm_loss(const D& disc, const dsp::Waveform& real,
               const dsp::Waveform& fake,
               const std::optional<augment::AugmentationState>& mu) {
  nn::Tape tape;
  detail::Inputs in = detail::make_inputs(tape, &real, fake, mu);
  return fm_loss(disc(tape, in.real, in.mu), disc(tape, in.fake, in.mu)).item();
}

// Element-mean L1 between log-mels; lengths must match.
double mel_loss(const dsp::Waveform& real, const dsp::Waveform& fake,
                const dsp::MelConfig& cfg);

}  // namespace augcondd::losses

#endif  // AUGCONDD_LOSSES_H_
