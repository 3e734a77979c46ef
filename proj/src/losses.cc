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
#include "augcondd/losses.h"

#include <array>
#include <cmath>
#include <string>

#include "augcondd/errors.h"
#include "augcondd/ops.h"

namespace augcondd::losses {
namespace {

void require_same_scales(const models::DiscOutput& a, const models::DiscOutput& b) {
  if (a.scales.size() != b.scales.size() || a.scales.empty()) {
    throw InvalidInputError("discriminator outputs disagree on sub-discriminator count");
  }
}

nn::Var mean_of(std::vector<nn::Var> terms) {
  std::vector<double> w(terms.size(), 1.0 / static_cast<double>(terms.size()));
  return nn::weighted_sum(terms, w);
}

}  // namespace

void LossWeights::validate() const {
  if (!(lambda_fm >= 0.0) || !(lambda_mel >= 0.0)) {
    throw ConfigError("loss weights must be non-negative");
  }
}

nn::Var adv_loss_d(const models::DiscOutput& real, const models::DiscOutput& fake) {
  require_same_scales(real, fake);
  std::vector<nn::Var> terms;
  for (std::size_t k = 0; k < real.scales.size(); ++k) {
    const std::array<nn::Var, 2> pair = {
        nn::mean_squared_offset(real.scales[k].score, 1.0),
        nn::mean_squared_offset(fake.scales[k].score, 0.0)};
    terms.push_back(nn::weighted_sum(pair, std::array{1.0, 1.0}));
  }
  return mean_of(std::move(terms));
}

nn::Var adv_loss_g(const models::DiscOutput& fake) {
  if (fake.scales.empty()) throw InvalidInputError("no sub-discriminators");
  std::vector<nn::Var> terms;
  for (const models::SubDiscOutput& sub : fake.scales) {
    terms.push_back(nn::mean_squared_offset(sub.score, 1.0));
  }
  return mean_of(std::move(terms));
}

nn::Var fm_loss(const models::DiscOutput& real, const models::DiscOutput& fake) {
  require_same_scales(real, fake);
  std::vector<nn::Var> per_scale;
  for (std::size_t k = 0; k < real.scales.size(); ++k) {
    const auto& rf = real.scales[k].features;
    const auto& ff = fake.scales[k].features;
    if (rf.size() != ff.size() || rf.empty()) {
      throw Error("feature stacks differ in depth");
    }
    std::vector<nn::Var> layers;
    for (std::size_t i = 0; i < rf.size(); ++i) {
      if (rf[i].shape() != ff[i].shape()) {
        throw Error("feature stack shape mismatch at layer " + std::to_string(i));
      }
      layers.push_back(nn::mean_abs_diff(rf[i], ff[i]));
    }
    per_scale.push_back(nn::weighted_sum(layers, std::vector<double>(layers.size(), 1.0)));
  }
  return mean_of(std::move(per_scale));
}

nn::Var mel_loss(const nn::Var& fake_wave, const nn::Var& target_log_mel,
                 dsp::MelExtractor& extractor) {
  nn::Var fake_mel = nn::log_mel(fake_wave, extractor);
  return nn::mean_abs_diff(fake_mel, target_log_mel);
}

nn::Var generator_total(const nn::Var& adv_g, const nn::Var& fm,
                        const nn::Var& mel, const LossWeights& weights) {
  const std::array<nn::Var, 3> terms = {adv_g, fm, mel};
  return nn::weighted_sum(terms, std::array{1.0, weights.lambda_fm, weights.lambda_mel});
}

LossBreakdown total_losses(const LossParts& parts, const LossWeights& weights,
                           std::uint64_t step) {
  const std::array<std::pair<const char*, double>, 4> named = {
      {{"adv_d", parts.adv_d}, {"adv_g", parts.adv_g}, {"fm", parts.fm}, {"mel", parts.mel}}};
  for (const auto& [name, v] : named) {
    if (!std::isfinite(v)) throw DivergenceError(step, std::string("non-finite ") + name);
  }
  LossBreakdown out;
  out.adv_d = parts.adv_d;
  out.adv_g = parts.adv_g;
  out.fm = parts.fm;
  out.mel = parts.mel;
  out.total_g = parts.adv_g + weights.lambda_fm * parts.fm + weights.lambda_mel * parts.mel;
  out.total_d = parts.adv_d;
  return out;
}

models::DiscOutput ModelDiscriminator::operator()(
    nn::Tape& tape, const nn::Var& x, const std::optional<nn::Var>& mu) const {
  std::vector<nn::Var> vars = models::bind(tape, params, params_require_grad);
  return models::discriminator_forward(config, vars, x, mu);
}

namespace detail {

Inputs make_inputs(nn::Tape& tape, const dsp::Waveform* real,
                   const dsp::Waveform& fake,
                   const std::optional<augment::AugmentationState>& mu) {
  Inputs in;
  if (real) {
    if (real->size() != fake.size()) {
      throw InvalidInputError("real/fake length mismatch");
    }
    in.real = tape.constant(models::stack_waves(std::span(real, 1)));
  }
  in.fake = tape.constant(models::stack_waves(std::span(&fake, 1)));
  if (mu) in.mu = tape.constant(Tensor({1, mu->dim()}, mu->mu));
  return in;
}

}  // namespace detail

double mel_loss(const dsp::Waveform& real, const dsp::Waveform& fake,
                const dsp::MelConfig& cfg) {
  if (real.size() != fake.size()) {
    throw InvalidInputError("mel_loss length mismatch: " + std::to_string(real.size()) +
                            " vs " + std::to_string(fake.size()));
  }
  dsp::MelExtractor extractor(cfg);
  const dsp::MelSpectrogram a = extractor.log_mel(real);
  const dsp::MelSpectrogram b = extractor.log_mel(fake);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) acc += std::abs(a.values[i] - b.values[i]);
  return acc / static_cast<double>(a.values.size());
}

}  // namespace augcondd::losses
