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
#include "augcondd/config.h"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "augcondd/errors.h"

namespace augcondd::config {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  // Shortest form that still round-trips.
  for (int p = 1; p <= 17; ++p) {
    char shorter[40];
    std::snprintf(shorter, sizeof(shorter), "%.*g", p, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const std::string& want) {
  throw ConfigError("key '" + key + "': cannot parse '" + value + "' as " + want);
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || errno == ERANGE) bad(key, v, "a number");
  return d;
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::int64_t x = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size()) bad(key, v, "an integer");
  return x;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  const std::int64_t x = to_int(key, v);
  if (x < 0) bad(key, v, "a non-negative integer");
  return static_cast<std::uint64_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  bad(key, v, "a boolean");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(static_cast<int>(to_int(key, item)));
  if (out.empty()) bad(key, v, "a comma-separated integer list");
  return out;
}

std::string from_int_list(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// out:kernel:stride per layer, comma separated.
std::vector<models::DiscLayer> to_layers(const std::string& key, const std::string& v) {
  std::vector<models::DiscLayer> out;
  std::istringstream in(v);
  std::string item;
  while (std::getline(in, item, ',')) {
    int a, b, c;
    char extra;
    if (std::sscanf(trim(item).c_str(), "%d:%d:%d%c", &a, &b, &c, &extra) != 3) {
      bad(key, v, "out:kernel:stride triples");
    }
    out.push_back({a, b, c});
  }
  if (out.empty()) bad(key, v, "out:kernel:stride triples");
  return out;
}

std::string from_layers(const std::vector<models::DiscLayer>& layers) {
  std::string s;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    s += (i ? "," : "") + std::to_string(layers[i].out_channels) + ":" +
         std::to_string(layers[i].kernel) + ":" + std::to_string(layers[i].stride);
  }
  return s;
}

KeyInfo dkey(std::string name, std::string help, std::string paper,
             std::function<double&(RunConfig&)> ref) {
  auto n = name;
  return {std::move(name), std::move(help), std::move(paper),
          [ref](const RunConfig& c) { return fmt_double(ref(const_cast<RunConfig&>(c))); },
          [ref, n](RunConfig& c, const std::string& v) { ref(c) = to_double(n, v); }};
}

KeyInfo ikey(std::string name, std::string help, std::string paper,
             std::function<int&(RunConfig&)> ref) {
  auto n = name;
  return {std::move(name), std::move(help), std::move(paper),
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref, n](RunConfig& c, const std::string& v) {
            const std::int64_t x = to_int(n, v);
            if (x < INT32_MIN || x > INT32_MAX) bad(n, v, "a 32-bit integer");
            ref(c) = static_cast<int>(x);
          }};
}

KeyInfo ukey(std::string name, std::string help, std::string paper,
             std::function<std::uint64_t&(RunConfig&)> ref) {
  auto n = name;
  return {std::move(name), std::move(help), std::move(paper),
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); },
          [ref, n](RunConfig& c, const std::string& v) { ref(c) = to_count(n, v); }};
}

KeyInfo bkey(std::string name, std::string help, std::function<bool&(RunConfig&)> ref) {
  auto n = name;
  return {std::move(name), std::move(help), "",
          [ref](const RunConfig& c) {
            return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false");
          },
          [ref, n](RunConfig& c, const std::string& v) { ref(c) = to_bool(n, v); }};
}

KeyInfo skey(std::string name, std::string help, std::function<std::string&(RunConfig&)> ref) {
  return {std::move(name), std::move(help), "",
          [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); },
          [ref](RunConfig& c, const std::string& v) { ref(c) = trim(v); }};
}

std::vector<KeyInfo> build_keys() {
  std::vector<KeyInfo> k;
  k.push_back({"profile", "base profile: paper or desk", "paper",
               [](const RunConfig& c) { return c.profile; },
               [](RunConfig& c, const std::string& v) { c.profile = trim(v); }});
  k.push_back(ikey("sample_rate", "audio sample rate (Hz)", "22050",
                   [](RunConfig& c) -> int& { return c.spec.mel.sample_rate; }));
  k.push_back(ikey("fft_size", "STFT size", "1024",
                   [](RunConfig& c) -> int& { return c.spec.mel.fft_size; }));
  k.push_back(ikey("hop_length", "STFT hop; must equal the generator upsampling product", "256",
                   [](RunConfig& c) -> int& { return c.spec.mel.hop_length; }));
  k.push_back(ikey("win_length", "STFT window length", "1024",
                   [](RunConfig& c) -> int& { return c.spec.mel.win_length; }));
  k.push_back(ikey("n_mels", "mel bands", "80", [](RunConfig& c) -> int& { return c.spec.mel.n_mels; }));
  k.push_back(dkey("fmin", "lowest mel frequency (Hz)", "",
                   [](RunConfig& c) -> double& { return c.spec.mel.fmin; }));
  k.push_back(dkey("fmax", "highest mel frequency (Hz)", "",
                   [](RunConfig& c) -> double& { return c.spec.mel.fmax; }));
  k.push_back(dkey("log_floor", "magnitude floor before the log", "",
                   [](RunConfig& c) -> double& { return c.spec.mel.log_floor; }));
  k.push_back(ikey("gen_channels", "generator width after the pre conv", "",
                   [](RunConfig& c) -> int& { return c.spec.generator.channels; }));
  k.push_back({"upsample_factors", "generator upsampling factors, comma separated", "",
               [](const RunConfig& c) { return from_int_list(c.spec.generator.upsample_factors); },
               [](RunConfig& c, const std::string& v) {
                 c.spec.generator.upsample_factors = to_int_list("upsample_factors", v);
               }});
  k.push_back(ikey("gen_pre_kernel", "generator input conv kernel", "",
                   [](RunConfig& c) -> int& { return c.spec.generator.pre_kernel; }));
  k.push_back(ikey("gen_post_kernel", "generator output conv kernel", "",
                   [](RunConfig& c) -> int& { return c.spec.generator.post_kernel; }));
  k.push_back(ikey("resblock_kernel", "residual block kernel", "",
                   [](RunConfig& c) -> int& { return c.spec.generator.resblock_kernel; }));
  k.push_back({"resblock_dilations", "residual block dilations, comma separated", "",
               [](const RunConfig& c) { return from_int_list(c.spec.generator.resblock_dilations); },
               [](RunConfig& c, const std::string& v) {
                 c.spec.generator.resblock_dilations = to_int_list("resblock_dilations", v);
               }});
  k.push_back(dkey("gen_leaky_slope", "generator leaky ReLU slope", "",
                   [](RunConfig& c) -> double& { return c.spec.generator.leaky_slope; }));
  k.push_back(dkey("gen_init_std", "generator weight init std", "",
                   [](RunConfig& c) -> double& { return c.spec.generator.init_std; }));
  k.push_back(ikey("disc_scales", "sub-discriminators (2x pooling between them)", "",
                   [](RunConfig& c) -> int& { return c.spec.discriminator.num_scales; }));
  k.push_back({"disc_layers", "discriminator conv stack as out:kernel:stride,...", "",
               [](const RunConfig& c) { return from_layers(c.spec.discriminator.layers); },
               [](RunConfig& c, const std::string& v) {
                 c.spec.discriminator.layers = to_layers("disc_layers", v);
               }});
  k.push_back(dkey("disc_leaky_slope", "discriminator leaky ReLU slope", "",
                   [](RunConfig& c) -> double& { return c.spec.discriminator.leaky_slope; }));
  k.push_back(dkey("disc_init_std", "discriminator weight init std", "",
                   [](RunConfig& c) -> double& { return c.spec.discriminator.init_std; }));
  k.push_back(dkey("learning_rate", "initial Adam learning rate", "0.0002",
                   [](RunConfig& c) -> double& { return c.optimizer.learning_rate; }));
  k.push_back(dkey("beta1", "Adam beta1", "0.5", [](RunConfig& c) -> double& { return c.optimizer.beta1; }));
  k.push_back(dkey("beta2", "Adam beta2", "0.9", [](RunConfig& c) -> double& { return c.optimizer.beta2; }));
  k.push_back(dkey("adam_epsilon", "Adam epsilon", "",
                   [](RunConfig& c) -> double& { return c.optimizer.epsilon; }));
  k.push_back(ikey("batch_size", "clips per step", "16",
                   [](RunConfig& c) -> int& { return c.optimizer.batch_size; }));
  k.push_back(ukey("max_iterations", "training steps", "2500000",
                   [](RunConfig& c) -> std::uint64_t& { return c.optimizer.max_iterations; }));
  k.push_back(dkey("lr_decay", "learning-rate factor per epoch (1 disables)", "",
                   [](RunConfig& c) -> double& { return c.optimizer.lr_decay; }));
  k.push_back(dkey("grad_clip", "global gradient-norm clip (0 disables)", "",
                   [](RunConfig& c) -> double& { return c.optimizer.grad_clip; }));
  k.push_back(dkey("lambda_fm", "feature-matching loss weight", "2",
                   [](RunConfig& c) -> double& { return c.weights.lambda_fm; }));
  k.push_back(dkey("lambda_mel", "mel loss weight", "45",
                   [](RunConfig& c) -> double& { return c.weights.lambda_mel; }));
  k.push_back({"mode", "baseline or augcondd", "",
               [](const RunConfig& c) { return training::to_string(c.mode); },
               [](RunConfig& c, const std::string& v) { c.mode = training::parse_mode(trim(v)); }});
  k.push_back({"augmentation", "none, mixup or rate", "",
               [](const RunConfig& c) { return augment::to_string(c.augmentation); },
               [](RunConfig& c, const std::string& v) { c.augmentation = augment::parse_kind(trim(v)); }});
  k.push_back({"strategy", "S1 (augment D inputs only) or S2 (augment before mel extraction)", "S2",
               [](const RunConfig& c) { return augment::to_string(c.strategy); },
               [](RunConfig& c, const std::string& v) { c.strategy = augment::parse_strategy(trim(v)); }});
  k.push_back(bkey("fit_to_segment", "crop/pad rate-changed audio back to the segment",
                   [](RunConfig& c) -> bool& { return c.fit_to_segment; }));
  k.push_back(ukey("seed", "seed for weights, batches and augmentation", "",
                   [](RunConfig& c) -> std::uint64_t& { return c.seed; }));
  k.push_back({"segment_length", "training crop length in samples (multiple of hop)", "",
               [](const RunConfig& c) { return std::to_string(c.segment_length); },
               [](RunConfig& c, const std::string& v) { c.segment_length = to_count("segment_length", v); }});
  k.push_back(ukey("checkpoint_every", "steps between checkpoints (0: first and last only)", "",
                   [](RunConfig& c) -> std::uint64_t& { return c.checkpoint_every; }));
  k.push_back(ukey("validate_every", "steps between validations", "",
                   [](RunConfig& c) -> std::uint64_t& { return c.validate_every; }));
  k.push_back(ukey("patience", "validations without improvement before stopping (0 off)", "",
                   [](RunConfig& c) -> std::uint64_t& { return c.patience; }));
  k.push_back(bkey("log_wall_time", "record elapsed seconds in the log (false writes 0)",
                   [](RunConfig& c) -> bool& { return c.log_wall_time; }));
  k.push_back(skey("train_dir", "training corpus directory",
                   [](RunConfig& c) -> std::string& { return c.train_dir; }));
  k.push_back(skey("val_dir", "validation corpus directory",
                   [](RunConfig& c) -> std::string& { return c.val_dir; }));
  k.push_back(skey("out_dir", "run directory for logs and checkpoints",
                   [](RunConfig& c) -> std::string& { return c.out_dir; }));
  k.push_back(dkey("subset_ratio", "fraction of training clips kept", "",
                   [](RunConfig& c) -> double& { return c.subset_ratio; }));
  k.push_back(ukey("subset_seed", "seed of the subset shuffle", "",
                   [](RunConfig& c) -> std::uint64_t& { return c.subset_seed; }));
  return k;
}

}  // namespace

const std::vector<KeyInfo>& keys() {
  static const std::vector<KeyInfo> k = build_keys();
  return k;
}

const KeyInfo* find_key(const std::string& name) {
  for (const KeyInfo& k : keys()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

RunConfig profile(const std::string& name) {
  RunConfig c;
  c.profile = name;
  if (name == "paper") {
    c.spec.mel = dsp::MelConfig::paper();
    c.spec.generator = models::GeneratorConfig::paper();
    c.spec.discriminator = models::DiscriminatorConfig::paper();
    c.optimizer = training::OptimizerConfig{};
    c.segment_length = 8192;
    c.validate_every = 1000;
    c.checkpoint_every = 10000;
  } else if (name == "desk") {
    c.spec.mel = dsp::MelConfig::desk();
    c.spec.generator = models::GeneratorConfig::desk();
    c.spec.discriminator = models::DiscriminatorConfig::desk();
    c.optimizer.batch_size = 8;
    c.optimizer.max_iterations = 2000;
    c.segment_length = 2048;
    c.validate_every = 200;
    c.checkpoint_every = 500;
  } else {
    throw ConfigError("key 'profile': unknown profile '" + name + "' (expected paper or desk)");
  }
  return c;
}

void RunConfig::validate() const {
  auto wrap = [](const std::string& what, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      throw ConfigError(what + ": " + e.what());
    }
  };
  wrap("mel settings", [&] { spec.mel.validate(); });
  wrap("generator settings", [&] { spec.generator.validate(spec.mel.hop_length); });
  if (spec.generator.n_mels != spec.mel.n_mels) {
    throw ConfigError("key 'n_mels': generator and extractor disagree");
  }
  wrap("discriminator settings", [&] { model_spec().discriminator.validate(); });
  wrap("optimizer settings", [&] { optimizer.validate(); });
  wrap("loss weights", [&] { weights.validate(); });
  if (mode == training::TrainMode::kAugCondD && augmentation == augment::AugmentationKind::kNone) {
    throw ConfigError("keys 'mode'/'augmentation': augcondd requires augmentation mixup or rate");
  }
  if (!(subset_ratio > 0.0 && subset_ratio <= 1.0)) {
    throw ConfigError("key 'subset_ratio': must lie in (0, 1]");
  }
  if (segment_length == 0 || segment_length % spec.mel.hop_length != 0) {
    throw ConfigError("key 'segment_length': must be a positive multiple of hop_length (" +
                      std::to_string(spec.mel.hop_length) + ")");
  }
  if (validate_every == 0) throw ConfigError("key 'validate_every': must be at least 1");
  if (augmentation == augment::AugmentationKind::kRate && !fit_to_segment) {
    throw ConfigError("key 'fit_to_segment': rate augmentation needs it for rectangular batches");
  }
}

training::ModelSpec RunConfig::model_spec() const {
  training::ModelSpec s = spec;
  s.generator.n_mels = s.mel.n_mels;
  s.discriminator.augmentation_conditional = mode == training::TrainMode::kAugCondD;
  s.discriminator.mu_dim =
      std::max<int>(1, static_cast<int>(augment::state_dim(augmentation)));
  return s;
}

training::RunOptions RunConfig::run_options() const {
  training::RunOptions o;
  o.spec = model_spec();
  o.optimizer = optimizer;
  o.weights = weights;
  o.mode = mode;
  o.augmentation = augmentation;
  o.strategy = strategy;
  o.augment_options.fit_to_segment = fit_to_segment;
  o.seed = seed;
  o.segment_length = segment_length;
  o.checkpoint_every = checkpoint_every;
  o.validate_every = validate_every;
  o.patience = patience;
  o.log_wall_time = log_wall_time;
  o.out_dir = out_dir;
  // Where the data and outputs live does not change the run, so a moved or
  // copied run directory can still be resumed.
  RunConfig placeless = *this;
  placeless.train_dir.clear();
  placeless.val_dir.clear();
  placeless.out_dir.clear();
  o.config_echo = echo(placeless);
  return o;
}

Entries parse_entries(const std::string& text, const std::string& origin) {
  Entries out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(n) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (!find_key(key)) {
      throw ConfigError(origin + ":" + std::to_string(n) + ": unknown key '" + key + "'");
    }
    out.emplace_back(key, trim(t.substr(eq + 1)));
  }
  return out;
}

void apply(RunConfig& cfg, const Entries& entries) {
  for (const auto& [key, value] : entries) {
    if (key == "profile") continue;
    const KeyInfo* k = find_key(key);
    if (!k) throw ConfigError("unknown key '" + key + "'");
    k->set(cfg, value);
  }
}

RunConfig load(const std::optional<std::string>& profile_name,
               const std::optional<std::string>& file, const Entries& overrides) {
  Entries from_file;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw IoError("cannot read config " + *file);
    std::ostringstream s;
    s << in.rdbuf();
    from_file = parse_entries(s.str(), *file);
  }
  std::string name = "desk";
  for (const auto& [k, v] : from_file) {
    if (k == "profile") name = v;
  }
  for (const auto& [k, v] : overrides) {
    if (k == "profile") name = v;
  }
  if (profile_name) name = *profile_name;
  RunConfig cfg = profile(name);
  config::apply(cfg, from_file);
  config::apply(cfg, overrides);
  return cfg;
}

std::string echo(const RunConfig& cfg) {
  std::string out;
  for (const KeyInfo& k : keys()) out += k.name + " = " + k.get(cfg) + "\n";
  return out;
}

RunConfig from_echo(const std::string& text) {
  const Entries e = parse_entries(text, "config echo");
  std::string name = "desk";
  for (const auto& [k, v] : e) {
    if (k == "profile") name = v;
  }
  RunConfig cfg = profile(name);
  config::apply(cfg, e);
  return cfg;
}

}  // namespace augcondd::config
