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
#include "augcondd/training.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "augcondd/checkpoint.h"
#include "augcondd/data.h"
#include "augcondd/errors.h"
#include "augcondd/ops.h"

namespace augcondd::training {
namespace {

namespace fs = std::filesystem;
using augment::AugmentationKind;
using augment::Strategy;

bool all_finite(const Tensor& t) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool all_finite(const models::ParamSet& p) {
  for (const auto& e : p.entries) {
    if (!all_finite(e.value)) return false;
  }
  return true;
}

// (B, frames, n_mels), the layout log_mel produces.
Tensor stack_targets(std::span<const dsp::MelSpectrogram> mels) {
  const std::size_t frames = mels.front().frames, n = mels.front().n_mels;
  Tensor out({mels.size(), frames, n});
  for (std::size_t b = 0; b < mels.size(); ++b) {
    if (static_cast<std::size_t>(mels[b].frames) != frames) {
      throw InvalidInputError("ragged mel batch");
    }
    std::copy(mels[b].values.begin(), mels[b].values.end(),
              out.data() + b * frames * n);
  }
  return out;
}

std::vector<Tensor> collect_grads(std::span<const nn::Var> vars) {
  std::vector<Tensor> grads;
  grads.reserve(vars.size());
  for (const nn::Var& v : vars) {
    const Tensor& g = v.grad();
    grads.push_back(g.size() == v.value().size() ? g : Tensor(v.value().shape(), 0.0));
  }
  return grads;
}

void clip_gradients(std::vector<Tensor>& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (const Tensor& g : grads) {
    for (double v : g.values()) sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return;
  const double f = max_norm / norm;
  for (Tensor& g : grads) {
    for (double& v : g.storage()) v *= f;
  }
}

// Everything about a batch that does not depend on the parameters.
struct Prepared {
  Tensor real;
  Tensor mel_in;
  Tensor target;
  std::optional<Tensor> mu;
  Strategy strategy = Strategy::kS2;
  AugmentationKind kind = AugmentationKind::kNone;
  std::vector<std::size_t> partners;
  std::vector<double> ms;
  std::vector<dsp::LinearMap> maps;
  std::vector<std::size_t> offsets;
};

Prepared prepare(const augment::TrainingBatch& batch, const ModelSpec& spec,
                 TrainMode mode) {
  if (batch.size() == 0) throw InvalidInputError("empty training batch");
  if (batch.gen_inputs.size() != batch.size()) {
    throw InvalidInputError("batch has mismatched generator inputs");
  }
  const std::size_t len = batch.real_waves.front().size();
  for (const dsp::Waveform& w : batch.real_waves) {
    if (w.size() != len) {
      throw InvalidInputError(
          "training needs equal-length waves in a batch (enable fit_to_segment)");
    }
  }
  const std::size_t gen_len =
      static_cast<std::size_t>(batch.gen_inputs.front().frames) *
      spec.generator.hop_length();
  if (gen_len != len) {
    throw InvalidInputError("segment length " + std::to_string(len) +
                            " is not frames * hop (" + std::to_string(gen_len) + ")");
  }
  Prepared p;
  p.real = models::stack_waves(batch.real_waves);
  p.mel_in = models::stack_mels(batch.gen_inputs);
  p.target = stack_targets(batch.gen_inputs);
  p.strategy = batch.strategy;
  p.kind = batch.kind;
  if (mode == TrainMode::kAugCondD) {
    if (batch.mu.size() != batch.size() || batch.mu.front().dim() == 0) {
      throw ConfigError("augmentation-conditional training needs a non-empty mu");
    }
    p.mu = models::stack_states(batch.mu);
  }
  if (batch.strategy == Strategy::kS1) {
    if (batch.records.size() != batch.size()) {
      throw InvalidInputError("S1 batch lacks augmentation records");
    }
    for (const augment::AugmentRecord& r : batch.records) {
      if (r.kind == AugmentationKind::kMixup) {
        p.partners.push_back(r.partner);
        p.ms.push_back(r.m);
      } else if (r.kind == AugmentationKind::kRate) {
        p.maps.push_back(dsp::time_scale_map(len, augment::rate_state(r.s)));
        p.offsets.push_back(r.crop_offset);
      }
    }
  }
  return p;
}

// Under S1 the discriminator sees Aug(G(s)); the records are replayed as a
// differentiable map on the generated batch.
nn::Var fake_for_discriminator(const nn::Var& fake, const Prepared& p) {
  if (p.strategy != Strategy::kS1) return fake;
  if (p.kind == AugmentationKind::kMixup) return nn::mix_batch(fake, p.partners, p.ms);
  if (p.kind == AugmentationKind::kRate) {
    return nn::apply_linear_maps(fake, p.maps, p.offsets, p.real.dim(2));
  }
  return fake;
}

std::optional<nn::Var> bind_mu(nn::Tape& tape, const Prepared& p) {
  if (!p.mu) return std::nullopt;
  return tape.constant(*p.mu);
}

struct DResult {
  double loss = 0.0;
  std::vector<Tensor> grads;
};

DResult discriminator_loss(const models::DiscriminatorConfig& cfg,
                           const models::ParamSet& params, const Prepared& p,
                           const Tensor& fake, bool want_grads) {
  nn::Tape tape;
  std::vector<nn::Var> vars = models::bind(tape, params, want_grads);
  const std::optional<nn::Var> mu = bind_mu(tape, p);
  const models::DiscOutput real_out =
      models::discriminator_forward(cfg, vars, tape.constant(p.real), mu);
  const models::DiscOutput fake_out =
      models::discriminator_forward(cfg, vars, tape.constant(fake), mu);
  nn::Var loss = losses::adv_loss_d(real_out, fake_out);
  DResult r;
  r.loss = loss.item();
  if (want_grads && std::isfinite(r.loss)) {
    tape.backward(loss);
    r.grads = collect_grads(vars);
  }
  return r;
}

struct GResult {
  losses::LossParts parts;
  nn::Var total;
};

// Generator-side terms on the tape that produced fake; D parameters frozen.
GResult generator_loss(nn::Tape& tape, const nn::Var& fake,
                       const models::DiscriminatorConfig& cfg,
                       const models::ParamSet& disc, const Prepared& p,
                       const losses::LossWeights& weights,
                       dsp::MelExtractor& extractor) {
  std::vector<nn::Var> dvars = models::bind(tape, disc, false);
  const std::optional<nn::Var> mu = bind_mu(tape, p);
  const nn::Var fake_d = fake_for_discriminator(fake, p);
  const models::DiscOutput real_out =
      models::discriminator_forward(cfg, dvars, tape.constant(p.real), mu);
  const models::DiscOutput fake_out = models::discriminator_forward(cfg, dvars, fake_d, mu);
  nn::Var adv = losses::adv_loss_g(fake_out);
  nn::Var fm = losses::fm_loss(real_out, fake_out);
  nn::Var mel = losses::mel_loss(fake, tape.constant(p.target), extractor);
  GResult g{{0.0, adv.item(), fm.item(), mel.item()},
            losses::generator_total(adv, fm, mel, weights)};
  return g;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace

std::string to_string(TrainMode mode) {
  return mode == TrainMode::kBaseline ? "baseline" : "augcondd";
}

TrainMode parse_mode(const std::string& name) {
  if (name == "baseline") return TrainMode::kBaseline;
  if (name == "augcondd") return TrainMode::kAugCondD;
  throw ConfigError("unknown mode '" + name + "' (expected baseline or augcondd)");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  if (batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("lr decay must lie in (0, 1]");
  if (!(grad_clip >= 0.0)) throw ConfigError("grad clip must be >= 0");
}

void ModelSpec::validate() const {
  mel.validate();
  generator.validate(mel.hop_length);
  if (generator.n_mels != mel.n_mels) {
    throw ConfigError("generator expects " + std::to_string(generator.n_mels) +
                      " mel bands, extractor makes " + std::to_string(mel.n_mels));
  }
  discriminator.validate();
}

AdamState init_adam(const models::ParamSet& params) {
  return AdamState{params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(models::ParamSet& params, std::span<const Tensor> grads,
               AdamState& state, double lr, const OptimizerConfig& cfg) {
  if (grads.size() != params.entries.size()) {
    throw InvalidInputError("gradient count does not match parameters");
  }
  state.t += 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    Tensor& p = params.entries[i].value;
    Tensor& m = state.m.entries[i].value;
    Tensor& v = state.v.entries[i].value;
    const Tensor& g = grads[i];
    if (g.size() != p.size()) {
      throw InvalidInputError("gradient shape mismatch for " + params.entries[i].name);
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
      v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
      p[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + cfg.epsilon);
    }
  }
}

bool TrainState::operator==(const TrainState& o) const {
  return step == o.step && generator == o.generator &&
         discriminator == o.discriminator && adam_g.m == o.adam_g.m &&
         adam_g.v == o.adam_g.v && adam_g.t == o.adam_g.t &&
         adam_d.m == o.adam_d.m && adam_d.v == o.adam_d.v &&
         adam_d.t == o.adam_d.t && rng == o.rng && has_best == o.has_best &&
         best_step == o.best_step && best_val == o.best_val &&
         stale_validations == o.stale_validations;
}

TrainState init_state(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  TrainState s;
  s.generator = models::init_params(spec.generator, seed);
  s.discriminator = models::init_params(spec.discriminator, seed + 1);
  s.adam_g = init_adam(s.generator);
  s.adam_d = init_adam(s.discriminator);
  s.rng.seed(seed + 2);
  return s;
}

Trainer::Trainer(ModelSpec spec, OptimizerConfig optimizer,
                 losses::LossWeights weights, TrainMode mode)
    : spec_(std::move(spec)),
      optimizer_(optimizer),
      weights_(weights),
      mode_(mode),
      extractor_(spec_.mel) {
  spec_.validate();
  optimizer_.validate();
  weights_.validate();
  if ((mode_ == TrainMode::kAugCondD) != spec_.discriminator.augmentation_conditional) {
    throw ConfigError(mode_ == TrainMode::kAugCondD
                          ? "augcondd mode needs an augmentation-conditional discriminator"
                          : "baseline mode needs an unconditional discriminator");
  }
}

losses::LossBreakdown Trainer::train_step(TrainState& state,
                                          const augment::TrainingBatch& batch,
                                          double lr,
                                          std::span<const dsp::Waveform> clean) {
  const Prepared p = prepare(batch, spec_, mode_);
  if (probe_) {
    probe_(StepView{state.step, &batch, clean, &p.mel_in, p.mu ? &*p.mu : nullptr});
  }

  nn::Tape gt;
  std::vector<nn::Var> gvars = models::bind(gt, state.generator, true);
  const nn::Var fake = models::generator_forward(spec_.generator, gvars, gt.constant(p.mel_in));
  const Tensor fake_d = fake_for_discriminator(fake, p).value();

  // Discriminator update against the detached fake batch.
  DResult d = discriminator_loss(spec_.discriminator, state.discriminator, p, fake_d, true);
  if (!std::isfinite(d.loss)) throw DivergenceError(state.step, "discriminator loss is not finite");
  clip_gradients(d.grads, optimizer_.grad_clip);
  const models::ParamSet saved_d = state.discriminator;
  const AdamState saved_adam_d = state.adam_d;
  auto restore = [&] {
    state.discriminator = saved_d;
    state.adam_d = saved_adam_d;
  };
  adam_step(state.discriminator, d.grads, state.adam_d, lr, optimizer_);
  if (!all_finite(state.discriminator)) {
    restore();
    throw DivergenceError(state.step, "discriminator parameters are not finite");
  }

  // Generator update through the updated discriminator.
  GResult g = generator_loss(gt, fake, spec_.discriminator, state.discriminator, p,
                             weights_, extractor_);
  g.parts.adv_d = d.loss;
  losses::LossBreakdown out;
  try {
    out = losses::total_losses(g.parts, weights_, state.step);
  } catch (const DivergenceError&) {
    restore();
    throw;
  }
  gt.backward(g.total);
  std::vector<Tensor> ggrads = collect_grads(gvars);
  clip_gradients(ggrads, optimizer_.grad_clip);
  const models::ParamSet saved_g = state.generator;
  const AdamState saved_adam_g = state.adam_g;
  adam_step(state.generator, ggrads, state.adam_g, lr, optimizer_);
  if (!all_finite(state.generator)) {
    restore();
    state.generator = saved_g;
    state.adam_g = saved_adam_g;
    throw DivergenceError(state.step, "generator parameters are not finite");
  }
  state.step += 1;
  return out;
}

LossEvaluation Trainer::evaluate(const models::ParamSet& generator,
                                 const models::ParamSet& discriminator,
                                 const augment::TrainingBatch& batch,
                                 bool want_gradients) {
  const Prepared p = prepare(batch, spec_, mode_);
  nn::Tape gt;
  std::vector<nn::Var> gvars = models::bind(gt, generator, want_gradients);
  const nn::Var fake = models::generator_forward(spec_.generator, gvars, gt.constant(p.mel_in));
  const Tensor fake_d = fake_for_discriminator(fake, p).value();
  DResult d = discriminator_loss(spec_.discriminator, discriminator, p, fake_d, want_gradients);
  GResult g = generator_loss(gt, fake, spec_.discriminator, discriminator, p, weights_,
                             extractor_);
  g.parts.adv_d = d.loss;
  LossEvaluation ev;
  ev.losses = losses::total_losses(g.parts, weights_);
  if (want_gradients) {
    gt.backward(g.total);
    ev.grad_generator = collect_grads(gvars);
    ev.grad_discriminator = std::move(d.grads);
  }
  return ev;
}

std::string to_json_line(const LogRecord& r) {
  nlohmann::ordered_json j;
  if (r.kind == LogRecord::Kind::kTrain) {
    j["kind"] = "train";
    j["step"] = r.step;
    j["adv_d"] = r.losses.adv_d;
    j["adv_g"] = r.losses.adv_g;
    j["fm"] = r.losses.fm;
    j["mel"] = r.losses.mel;
    j["total_g"] = r.losses.total_g;
    j["total_d"] = r.losses.total_d;
    j["lr"] = r.lr;
  } else {
    j["kind"] = "val";
    j["step"] = r.step;
    j["val_mel_l1"] = r.val_mel_l1;
  }
  j["seconds"] = r.seconds;
  return j.dump();
}

LogRecord parse_json_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("bad log line: ") + e.what());
  }
  LogRecord r;
  try {
    const std::string kind = j.at("kind").get<std::string>();
    r.step = j.at("step").get<std::uint64_t>();
    r.seconds = j.value("seconds", 0.0);
    if (kind == "train") {
      r.kind = LogRecord::Kind::kTrain;
      r.losses.adv_d = j.at("adv_d").get<double>();
      r.losses.adv_g = j.at("adv_g").get<double>();
      r.losses.fm = j.at("fm").get<double>();
      r.losses.mel = j.at("mel").get<double>();
      r.losses.total_g = j.at("total_g").get<double>();
      r.losses.total_d = j.at("total_d").get<double>();
      r.lr = j.at("lr").get<double>();
    } else if (kind == "val") {
      r.kind = LogRecord::Kind::kVal;
      r.val_mel_l1 = j.at("val_mel_l1").get<double>();
    } else {
      throw InvalidInputError("unknown log row kind '" + kind + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("bad log line: ") + e.what());
  }
  return r;
}

void RunOptions::validate() const {
  spec.validate();
  optimizer.validate();
  weights.validate();
  if (mode == TrainMode::kAugCondD && augmentation == AugmentationKind::kNone) {
    throw ConfigError("augcondd mode needs an augmentation (mixup or rate)");
  }
  const auto hop = static_cast<std::size_t>(spec.mel.hop_length);
  if (segment_length == 0 || segment_length % hop != 0) {
    throw ConfigError("segment length must be a positive multiple of the hop (" +
                      std::to_string(hop) + ")");
  }
  if (validate_every == 0) throw ConfigError("validate_every must be at least 1");
  if (augmentation == AugmentationKind::kRate && !augment_options.fit_to_segment) {
    throw ConfigError("rate augmentation in training requires fit_to_segment");
  }
}

double validation_mel_l1(const ModelSpec& spec, const models::ParamSet& generator,
                         const data::Corpus& val) {
  if (val.size() == 0) throw InvalidInputError("empty validation set");
  dsp::MelExtractor extractor(spec.mel);
  double sum = 0.0;
  for (const data::Clip& clip : val.clips) {
    dsp::Waveform fake = models::generate(spec.generator, generator, extractor.log_mel(clip.wave));
    fake.samples.resize(clip.wave.size());
    sum += losses::mel_loss(clip.wave, fake, spec.mel);
  }
  return sum / static_cast<double>(val.size());
}

std::uint64_t select_best(std::span<const LogRecord> log) {
  bool found = false;
  std::uint64_t step = 0;
  double best = 0.0;
  for (const LogRecord& r : log) {
    if (r.kind != LogRecord::Kind::kVal) continue;
    if (!found || r.val_mel_l1 < best) {
      found = true;
      best = r.val_mel_l1;
      step = r.step;
    }
  }
  if (!found) throw InvalidInputError("log has no validation rows");
  return step;
}

bool should_stop(std::span<const LogRecord> log, std::uint64_t patience) {
  if (patience == 0) return false;
  std::vector<double> vals;
  for (const LogRecord& r : log) {
    if (r.kind == LogRecord::Kind::kVal) vals.push_back(r.val_mel_l1);
  }
  if (vals.size() <= patience) return false;
  const std::size_t split = vals.size() - patience;
  const double best = *std::min_element(vals.begin(), vals.begin() + split);
  return std::all_of(vals.begin() + split, vals.end(), [&](double v) { return v >= best; });
}

TrainResult run_training(const RunOptions& options, const data::Corpus& train,
                         const data::Corpus& val,
                         const std::optional<std::string>& resume_from) {
  options.validate();
  if (train.size() == 0) throw InvalidInputError("empty training set");
  if (val.size() == 0) throw InvalidInputError("empty validation set");
  for (const data::Corpus* c : {&train, &val}) {
    for (const data::Clip& clip : c->clips) {
      if (clip.wave.sample_rate != options.spec.mel.sample_rate) {
        throw ConfigError("clip " + clip.id + " has sample rate " +
                          std::to_string(clip.wave.sample_rate) + ", expected " +
                          std::to_string(options.spec.mel.sample_rate));
      }
    }
  }

  ModelSpec spec = options.spec;
  spec.discriminator.augmentation_conditional = options.mode == TrainMode::kAugCondD;
  if (spec.discriminator.augmentation_conditional) {
    spec.discriminator.mu_dim = static_cast<int>(augment::state_dim(options.augmentation));
  }
  Trainer trainer(spec, options.optimizer, options.weights, options.mode);
  if (options.probe) trainer.set_probe(options.probe);

  TrainResult result;
  bool resumed = false;
  if (resume_from) {
    checkpoint::Checkpoint ck = checkpoint::load(*resume_from);
    if (ck.config_echo != options.config_echo) {
      throw ConfigError("checkpoint " + *resume_from + " was written by a different configuration");
    }
    result.state = std::move(ck.state);
    resumed = true;
  } else {
    result.state = init_state(spec, options.seed);
  }
  TrainState& state = result.state;

  const bool persist = !options.out_dir.empty();
  const fs::path out(options.out_dir);
  std::ofstream metrics;
  if (persist) {
    ensure_dir(out / "checkpoints");
    std::vector<std::string> kept;
    if (resumed) {
      std::ifstream old(out / "metrics.jsonl");
      std::string line;
      while (std::getline(old, line)) {
        if (line.empty()) continue;
        LogRecord r = parse_json_line(line);
        if (r.step > state.step) continue;
        kept.push_back(line);
        result.log.push_back(r);
      }
    }
    metrics.open(out / "metrics.jsonl", std::ios::trunc);
    if (!metrics) throw IoError("cannot write " + (out / "metrics.jsonl").string());
    for (const std::string& line : kept) metrics << line << '\n';
    metrics.flush();
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto emit = [&](LogRecord r) {
    r.seconds = options.log_wall_time
                    ? std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
                    : 0.0;
    result.log.push_back(r);
    if (persist) {
      metrics << to_json_line(r) << '\n';
      metrics.flush();
      if (!metrics) throw IoError("write failed on metrics.jsonl");
    }
    if (options.on_record) options.on_record(r);
  };
  auto save = [&](const fs::path& path) {
    if (persist) checkpoint::save(path.string(), {options.config_echo, state});
  };
  auto save_step = [&] {
    if (!persist) return;
    char name[64];
    std::snprintf(name, sizeof(name), "step_%08llu.ckpt",
                  static_cast<unsigned long long>(state.step));
    save(out / "checkpoints" / name);
    save(out / "latest.ckpt");
  };
  auto run_validation = [&] {
    LogRecord r;
    r.kind = LogRecord::Kind::kVal;
    r.step = state.step;
    r.val_mel_l1 = validation_mel_l1(spec, state.generator, val);
    if (!state.has_best || r.val_mel_l1 < state.best_val) {
      state.has_best = true;
      state.best_val = r.val_mel_l1;
      state.best_step = state.step;
      state.stale_validations = 0;
      save(out / "best.ckpt");
    } else {
      state.stale_validations += 1;
    }
    emit(r);
  };

  if (!resumed) {
    run_validation();
    save_step();
  }

  const std::size_t batch_size = static_cast<std::size_t>(options.optimizer.batch_size);
  const std::uint64_t steps_per_epoch =
      (train.size() + batch_size - 1) / batch_size;
  const std::size_t hop = static_cast<std::size_t>(spec.mel.hop_length);
  const std::uint64_t max_steps = options.optimizer.max_iterations;
  bool saved_now = !resumed;

  while (state.step < max_steps) {
    const double lr = options.optimizer.learning_rate *
                      std::pow(options.optimizer.lr_decay,
                               static_cast<double>(state.step / steps_per_epoch));
    std::vector<dsp::Waveform> segments;
    segments.reserve(batch_size);
    for (std::size_t b = 0; b < batch_size; ++b) {
      const data::Clip& clip = train.clips[uniform_index(state.rng, train.size())];
      segments.push_back(data::sample_segment(clip.wave, options.segment_length, hop, state.rng));
    }
    const augment::TrainingBatch batch =
        augment::apply_strategy(segments, options.strategy, options.augmentation, state.rng,
                                trainer.extractor(), options.augment_options);
    const losses::LossBreakdown l = trainer.train_step(state, batch, lr, segments);
    LogRecord r;
    r.step = state.step;
    r.losses = l;
    r.lr = lr;
    emit(r);

    const bool last = state.step == max_steps;
    saved_now = false;
    if (state.step % options.validate_every == 0 || last) run_validation();
    if ((options.checkpoint_every && state.step % options.checkpoint_every == 0) || last) {
      save_step();
      saved_now = true;
    }
    if (options.patience && state.stale_validations >= options.patience) {
      result.early_stopped = true;
      if (!saved_now) save_step();
      break;
    }
  }
  return result;
}

}  // namespace augcondd::training
