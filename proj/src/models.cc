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
#include "augcondd/models.h"

#include <algorithm>
#include <cmath>

#include "augcondd/errors.h"
#include "augcondd/ops.h"
#include "augcondd/random.h"

namespace augcondd::models {
namespace {

class Cursor {
 public:
  explicit Cursor(std::span<const nn::Var> vars) : vars_(vars) {}
  const nn::Var& next() {
    if (pos_ >= vars_.size()) throw ConfigError("parameter set too small for config");
    return vars_[pos_++];
  }
  void finish() const {
    if (pos_ != vars_.size()) throw ConfigError("parameter set larger than config");
  }

 private:
  std::span<const nn::Var> vars_;
  std::size_t pos_ = 0;
};

void add_conv(ParamSet& set, Rng& rng, double stddev, const std::string& name,
              std::size_t a, std::size_t b, std::size_t k, std::size_t bias) {
  Tensor w({a, b, k});
  for (double& v : w.storage()) v = normal(rng, 0.0, stddev);
  set.entries.push_back({name + ".weight", std::move(w)});
  set.entries.push_back({name + ".bias", Tensor({bias}, 0.0)});
}

}  // namespace

std::size_t ParamSet::num_scalars() const {
  std::size_t n = 0;
  for (const NamedTensor& e : entries) n += e.value.size();
  return n;
}

const Tensor& ParamSet::get(const std::string& name) const {
  for (const NamedTensor& e : entries) {
    if (e.name == name) return e.value;
  }
  throw InvalidInputError("no parameter named " + name);
}

Tensor& ParamSet::get(const std::string& name) {
  return const_cast<Tensor&>(std::as_const(*this).get(name));
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out = *this;
  for (NamedTensor& e : out.entries) e.value.fill(0.0);
  return out;
}

int GeneratorConfig::hop_length() const {
  int hop = 1;
  for (int u : upsample_factors) hop *= u;
  return hop;
}

int GeneratorConfig::stage_channels(std::size_t stage) const {
  return std::max(1, channels >> (stage + 1));
}

int GeneratorConfig::upsample_padding(int factor) { return (factor + 1) / 2; }

int GeneratorConfig::upsample_kernel(int factor) {
  return factor + 2 * upsample_padding(factor);
}

void GeneratorConfig::validate(int mel_hop_length) const {
  if (n_mels < 1) throw ConfigError("generator n_mels must be >= 1");
  if (channels < 1) throw ConfigError("generator channels must be >= 1");
  if (upsample_factors.empty()) throw ConfigError("generator needs upsample factors");
  for (int u : upsample_factors) {
    if (u < 2) throw ConfigError("upsample factors must be >= 2");
  }
  if (hop_length() != mel_hop_length) {
    throw ConfigError("product of upsample factors (" + std::to_string(hop_length()) +
                      ") must equal hop_length (" + std::to_string(mel_hop_length) + ")");
  }
  for (int k : {pre_kernel, post_kernel, resblock_kernel}) {
    if (k < 1 || k % 2 == 0) throw ConfigError("generator kernels must be odd");
  }
  for (int d : resblock_dilations) {
    if (d < 1) throw ConfigError("resblock dilations must be >= 1");
  }
}

GeneratorConfig GeneratorConfig::paper() { return GeneratorConfig{}; }

GeneratorConfig GeneratorConfig::desk() {
  GeneratorConfig cfg;
  cfg.n_mels = 40;
  cfg.channels = 64;
  cfg.upsample_factors = {4, 4, 4};
  return cfg;
}

void DiscriminatorConfig::validate() const {
  if (num_scales < 1) throw ConfigError("num_scales must be >= 1");
  if (layers.empty()) throw ConfigError("discriminator needs at least one layer");
  for (const DiscLayer& l : layers) {
    if (l.out_channels < 1 || l.kernel < 1 || l.stride < 1) {
      throw ConfigError("discriminator layer sizes must be positive");
    }
  }
  if (layers.back().out_channels != 1) {
    throw ConfigError("last discriminator layer must have one output channel");
  }
  if (augmentation_conditional && mu_dim < 1) {
    throw ConfigError("conditional discriminator needs mu_dim >= 1");
  }
}

DiscriminatorConfig DiscriminatorConfig::paper() { return DiscriminatorConfig{}; }

DiscriminatorConfig DiscriminatorConfig::desk() {
  DiscriminatorConfig cfg;
  cfg.layers = {{8, 7, 1}, {16, 9, 4}, {32, 9, 4}, {32, 5, 1}, {1, 3, 1}};
  return cfg;
}

ParamSet init_params(const GeneratorConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  ParamSet set;
  const double sd = cfg.init_std;
  add_conv(set, rng, sd, "g.pre", cfg.channels, cfg.n_mels, cfg.pre_kernel, cfg.channels);
  int in = cfg.channels;
  for (std::size_t i = 0; i < cfg.upsample_factors.size(); ++i) {
    const int out = cfg.stage_channels(i);
    const int k = GeneratorConfig::upsample_kernel(cfg.upsample_factors[i]);
    add_conv(set, rng, sd, "g.up" + std::to_string(i), in, out, k, out);
    for (std::size_t j = 0; j < cfg.resblock_dilations.size(); ++j) {
      add_conv(set, rng, sd, "g.res" + std::to_string(i) + "." + std::to_string(j),
               out, out, cfg.resblock_kernel, out);
    }
    in = out;
  }
  add_conv(set, rng, sd, "g.post", 1, in, cfg.post_kernel, 1);
  return set;
}

ParamSet init_params(const DiscriminatorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  ParamSet set;
  for (int s = 0; s < cfg.num_scales; ++s) {
    int in = cfg.input_channels();
    for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
      const DiscLayer& layer = cfg.layers[l];
      add_conv(set, rng, cfg.init_std,
               "d" + std::to_string(s) + ".conv" + std::to_string(l),
               layer.out_channels, in, layer.kernel, layer.out_channels);
      in = layer.out_channels;
    }
  }
  return set;
}

ParamSet widen_input_channels(const DiscriminatorConfig& cfg, const ParamSet& params,
                              int mu_dim) {
  if (cfg.augmentation_conditional) {
    throw ConfigError("discriminator is already augmentation-conditional");
  }
  if (mu_dim < 1) throw ConfigError("mu_dim must be at least 1");
  ParamSet out = params;
  for (int s = 0; s < cfg.num_scales; ++s) {
    Tensor& w = out.get("d" + std::to_string(s) + ".conv0.weight");
    const std::size_t cout = w.dim(0), k = w.dim(2);
    Tensor wide({cout, static_cast<std::size_t>(1 + mu_dim), k}, 0.0);
    for (std::size_t o = 0; o < cout; ++o) {
      for (std::size_t t = 0; t < k; ++t) wide.at(o, 0, t) = w.at(o, 0, t);
    }
    w = std::move(wide);
  }
  return out;
}

std::vector<nn::Var> bind(nn::Tape& tape, const ParamSet& params,
                          bool requires_grad) {
  std::vector<nn::Var> vars;
  vars.reserve(params.entries.size());
  for (const NamedTensor& e : params.entries) {
    vars.push_back(tape.leaf(e.value, requires_grad));
  }
  return vars;
}

nn::Var generator_forward(const GeneratorConfig& cfg,
                          std::span<const nn::Var> params, const nn::Var& mel) {
  if (mel.value().rank() != 3 || static_cast<int>(mel.shape()[1]) != cfg.n_mels) {
    throw ConfigError("generator expects " + std::to_string(cfg.n_mels) +
                      " mel channels, got input " + shape_string(mel.shape()));
  }
  Cursor cur(params);
  const double slope = cfg.leaky_slope;
  const nn::Var& pre_w = cur.next();
  const nn::Var& pre_b = cur.next();
  nn::Var x = nn::conv1d(mel, pre_w, pre_b, {1, 1, (cfg.pre_kernel - 1) / 2});
  for (int u : cfg.upsample_factors) {
    x = nn::leaky_relu(x, slope);
    const nn::Var& w = cur.next();
    const nn::Var& b = cur.next();
    x = nn::conv_transpose1d(x, w, b, u, GeneratorConfig::upsample_padding(u));
    for (int d : cfg.resblock_dilations) {
      const nn::Var& rw = cur.next();
      const nn::Var& rb = cur.next();
      nn::Var xt = nn::leaky_relu(x, slope);
      xt = nn::conv1d(xt, rw, rb, {1, d, d * (cfg.resblock_kernel - 1) / 2});
      x = nn::add(x, xt);
    }
  }
  x = nn::leaky_relu(x, slope);
  const nn::Var& post_w = cur.next();
  const nn::Var& post_b = cur.next();
  x = nn::conv1d(x, post_w, post_b, {1, 1, (cfg.post_kernel - 1) / 2});
  cur.finish();
  return nn::tanh(x);
}

DiscOutput discriminator_forward(const DiscriminatorConfig& cfg,
                                 std::span<const nn::Var> params,
                                 const nn::Var& x,
                                 const std::optional<nn::Var>& mu) {
  if (cfg.augmentation_conditional && !mu) {
    throw ConfigError("augmentation-conditional discriminator requires mu");
  }
  if (!cfg.augmentation_conditional && mu) {
    throw ConfigError("unconditional discriminator must not receive mu");
  }
  if (mu && static_cast<int>(mu->shape().back()) != cfg.mu_dim) {
    throw ConfigError("mu dimension " + std::to_string(mu->shape().back()) +
                      " does not match discriminator mu_dim " +
                      std::to_string(cfg.mu_dim));
  }
  Cursor cur(params);
  DiscOutput out;
  nn::Var wave = x;
  for (int s = 0; s < cfg.num_scales; ++s) {
    if (s > 0) wave = nn::avg_pool2(wave);
    nn::Var h = mu ? nn::concat_condition(wave, *mu) : wave;
    SubDiscOutput sub;
    for (std::size_t l = 0; l < cfg.layers.size(); ++l) {
      const DiscLayer& layer = cfg.layers[l];
      const nn::Var& w = cur.next();
      const nn::Var& b = cur.next();
      h = nn::conv1d(h, w, b, {layer.stride, 1, (layer.kernel - 1) / 2});
      if (l + 1 < cfg.layers.size()) h = nn::leaky_relu(h, cfg.leaky_slope);
      sub.features.push_back(h);
    }
    sub.score = h;
    out.scales.push_back(std::move(sub));
  }
  cur.finish();
  return out;
}

Tensor stack_waves(std::span<const dsp::Waveform> waves) {
  if (waves.empty()) throw InvalidInputError("empty wave batch");
  const std::size_t len = waves.front().size();
  Tensor out({waves.size(), 1, len});
  for (std::size_t b = 0; b < waves.size(); ++b) {
    if (waves[b].size() != len) throw InvalidInputError("ragged wave batch");
    std::copy(waves[b].samples.begin(), waves[b].samples.end(), out.data() + b * len);
  }
  return out;
}

Tensor stack_mels(std::span<const dsp::MelSpectrogram> mels) {
  if (mels.empty()) throw InvalidInputError("empty mel batch");
  const std::size_t frames = mels.front().frames, n = mels.front().n_mels;
  Tensor out({mels.size(), n, frames});
  for (std::size_t b = 0; b < mels.size(); ++b) {
    if (static_cast<std::size_t>(mels[b].frames) != frames ||
        static_cast<std::size_t>(mels[b].n_mels) != n) {
      throw InvalidInputError("ragged mel batch");
    }
    for (std::size_t f = 0; f < frames; ++f) {
      for (std::size_t m = 0; m < n; ++m) out.at(b, m, f) = mels[b].at(f, m);
    }
  }
  return out;
}

Tensor stack_states(std::span<const augment::AugmentationState> states) {
  if (states.empty()) throw InvalidInputError("empty state batch");
  const std::size_t d = states.front().dim();
  Tensor out({states.size(), d});
  for (std::size_t b = 0; b < states.size(); ++b) {
    if (states[b].dim() != d) throw InvalidInputError("ragged state batch");
    std::copy(states[b].mu.begin(), states[b].mu.end(), out.data() + b * d);
  }
  return out;
}

dsp::Waveform generate(const GeneratorConfig& cfg, const ParamSet& params,
                       const dsp::MelSpectrogram& mel) {
  if (mel.n_mels != cfg.n_mels) {
    throw ConfigError("mel has " + std::to_string(mel.n_mels) +
                      " bins but generator expects " + std::to_string(cfg.n_mels));
  }
  nn::Tape tape;
  std::vector<nn::Var> vars = bind(tape, params, false);
  nn::Var in = tape.constant(stack_mels(std::span(&mel, 1)));
  nn::Var y = generator_forward(cfg, vars, in);
  dsp::Waveform out;
  out.sample_rate = mel.config.sample_rate;
  out.samples = y.value().storage();
  return out;
}

Tensor condition_input(const dsp::Waveform& wave,
                       const augment::AugmentationState& mu) {
  if (mu.dim() < 1) throw InvalidInputError("augmentation state needs d >= 1");
  nn::Tape tape;
  nn::Var x = tape.constant(stack_waves(std::span(&wave, 1)));
  nn::Var m = tape.constant(Tensor({1, mu.dim()}, mu.mu));
  Tensor out = nn::concat_condition(x, m).value();
  return Tensor({mu.dim() + 1, wave.size()}, std::move(out.storage()));
}

Discrimination discriminate(const DiscriminatorConfig& cfg,
                            const ParamSet& params, const dsp::Waveform& wave,
                            const std::optional<augment::AugmentationState>& mu) {
  nn::Tape tape;
  std::vector<nn::Var> vars = bind(tape, params, false);
  nn::Var x = tape.constant(stack_waves(std::span(&wave, 1)));
  std::optional<nn::Var> m;
  if (mu) m = tape.constant(Tensor({1, mu->dim()}, mu->mu));
  DiscOutput out = discriminator_forward(cfg, vars, x, m);
  Discrimination result;
  for (const SubDiscOutput& sub : out.scales) {
    result.scores.push_back(sub.score.value());
    std::vector<Tensor> feats;
    for (const nn::Var& f : sub.features) feats.push_back(f.value());
    result.features.push_back(std::move(feats));
  }
  return result;
}

}  // namespace augcondd::models
