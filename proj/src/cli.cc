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
#include "augcondd/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "augcondd/augment.h"
#include "augcondd/checkpoint.h"
#include "augcondd/config.h"
#include "augcondd/data.h"
#include "augcondd/errors.h"
#include "augcondd/evaluation.h"
#include "augcondd/models.h"
#include "augcondd/wav.h"

namespace augcondd::cli {
namespace {

namespace fs = std::filesystem;

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

// One string option per config key; collected in registry order.
struct KeyOptions {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;

  void attach(CLI::App& app) {
    const config::RunConfig paper = config::profile("paper");
    const config::RunConfig desk = config::profile("desk");
    for (const config::KeyInfo& k : config::keys()) {
      std::string help = k.help + " [desk: " + k.get(desk) + "]";
      if (!k.paper_default.empty()) help += " [paper: " + k.paper_default + "]";
      options[k.name] = app.add_option(dashed(k.name), values[k.name], help)->group("Config keys");
    }
  }

  config::Entries given() const {
    config::Entries out;
    for (const config::KeyInfo& k : config::keys()) {
      const auto it = options.find(k.name);
      if (it != options.end() && it->second->count() > 0) out.emplace_back(k.name, values.at(k.name));
    }
    return out;
  }
};

struct LoadedModel {
  config::RunConfig cfg;
  training::ModelSpec spec;
  models::ParamSet generator;
  std::uint64_t step = 0;
  std::string echo;
};

LoadedModel load_model(const std::string& path) {
  checkpoint::Checkpoint ck = checkpoint::load(path);
  LoadedModel m;
  m.echo = ck.config_echo;
  m.cfg = config::from_echo(ck.config_echo);
  m.spec = m.cfg.model_spec();
  m.generator = std::move(ck.state.generator);
  m.step = ck.state.step;
  return m;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("short write on " + path);
}

int cmd_gen_data(std::size_t clips, std::size_t val_clips, std::uint64_t seed,
                 double duration, int sample_rate, double f0_min, double f0_max,
                 const std::string& out_dir, std::ostream& out) {
  data::SyntheticOptions opt;
  opt.f0_min = f0_min;
  opt.f0_max = f0_max;
  opt.id_prefix = "clip";
  data::Corpus train = data::make_synthetic_corpus(clips, seed, sample_rate, duration, opt);
  data::write_corpus(train, (fs::path(out_dir) / "train").string());
  if (val_clips > 0) {
    opt.first_index = clips;
    opt.id_prefix = "val";
    data::Corpus val = data::make_synthetic_corpus(val_clips, seed, sample_rate, duration, opt);
    val.split = data::Split::kVal;
    data::write_corpus(val, (fs::path(out_dir) / "val").string());
  }
  out << "wrote " << clips << " train and " << val_clips << " val clips of "
      << train.clips.front().wave.size() << " samples (" << duration << " s at "
      << sample_rate << " Hz), seed " << seed << ", to " << out_dir << "\n";
  return kExitOk;
}

int cmd_train(const std::optional<std::string>& config_file,
              const std::optional<std::string>& profile_name,
              const config::Entries& overrides, const std::optional<std::string>& resume,
              std::uint64_t print_every, std::ostream& out) {
  std::optional<std::string> file = config_file;
  if (!file) {
    if (const char* env = std::getenv(kConfigEnv); env && *env) file = env;
  }
  const config::RunConfig cfg = config::load(profile_name, file, overrides);
  cfg.validate();
  if (cfg.train_dir.empty()) throw ConfigError("key 'train_dir': required for training");
  if (cfg.val_dir.empty()) throw ConfigError("key 'val_dir': required for training");
  if (cfg.out_dir.empty()) throw ConfigError("key 'out_dir': required for training");

  const data::Corpus full = data::load_corpus(cfg.train_dir, data::Split::kTrain);
  const data::Corpus train = data::subset(full, {cfg.subset_ratio, cfg.subset_seed});
  const data::Corpus val = data::load_corpus(cfg.val_dir, data::Split::kVal);
  out << "train corpus: " << train.size() << " of " << full.size() << " clips (subset_ratio "
      << cfg.subset_ratio << "), val corpus: " << val.size() << " clips\n";
  out << "mode " << training::to_string(cfg.mode) << ", augmentation "
      << augment::to_string(cfg.augmentation) << ", strategy "
      << augment::to_string(cfg.strategy) << ", " << cfg.optimizer.max_iterations
      << " iterations\n";

  training::RunOptions opts = cfg.run_options();
  opts.on_record = [&](const training::LogRecord& r) {
    if (r.kind == training::LogRecord::Kind::kVal) {
      out << "step " << r.step << " val_mel_l1 " << fixed(r.val_mel_l1) << "\n";
    } else if (print_every && r.step % print_every == 0) {
      out << "step " << r.step << " adv_d " << fixed(r.losses.adv_d) << " adv_g "
          << fixed(r.losses.adv_g) << " fm " << fixed(r.losses.fm) << " mel "
          << fixed(r.losses.mel) << " total_g " << fixed(r.losses.total_g) << "\n";
    }
    out.flush();
  };
  const training::TrainResult res = training::run_training(opts, train, val, resume);
  const std::uint64_t best = training::select_best(res.log);
  out << "finished at step " << res.state.step << (res.early_stopped ? " (early stop)" : "")
      << "; best validation at step " << best << " (" << fixed(res.state.best_val) << ")\n";
  return kExitOk;
}

int cmd_synth(const std::string& ckpt_path, const std::string& input, const std::string& output,
              const std::optional<std::string>& save_mel, std::ostream& out) {
  const LoadedModel m = load_model(ckpt_path);
  dsp::MelSpectrogram mel;
  if (fs::path(input).extension() == ".mel") {
    mel = data::read_mel(input);
    if (mel.n_mels != m.spec.generator.n_mels) {
      throw ConfigError("mel has " + std::to_string(mel.n_mels) +
                        " bands but the checkpoint generator expects " +
                        std::to_string(m.spec.generator.n_mels));
    }
    if (mel.config.hop_length != m.spec.mel.hop_length) {
      throw ConfigError("mel hop " + std::to_string(mel.config.hop_length) +
                        " differs from the checkpoint hop " +
                        std::to_string(m.spec.mel.hop_length));
    }
  } else {
    const dsp::Waveform wave = wav::read(input);
    if (wave.sample_rate != m.spec.mel.sample_rate) {
      throw ConfigError("input sample rate " + std::to_string(wave.sample_rate) +
                        " differs from the checkpoint's " + std::to_string(m.spec.mel.sample_rate));
    }
    dsp::MelExtractor ex(m.spec.mel);
    mel = ex.log_mel(wave);
  }
  mel.config = m.spec.mel;
  if (save_mel) data::write_mel(*save_mel, mel);
  const dsp::Waveform wave = models::generate(m.spec.generator, m.generator, mel);
  wav::write(output, wave);
  out << "wrote " << wave.size() << " samples (" << mel.frames << " frames x hop "
      << m.spec.mel.hop_length << ") to " << output << "\n";
  return kExitOk;
}

int cmd_eval(const std::optional<std::string>& ckpt_path,
             const std::optional<std::string>& synth_dir, const std::string& data_dir,
             const std::optional<std::string>& config_file,
             const std::optional<std::string>& output,
             const std::optional<std::string>& metrics,
             const std::optional<std::string>& plot, std::ostream& out) {
  if (!ckpt_path && !synth_dir) throw ConfigError("eval needs --checkpoint or --synth-dir");
  const data::Corpus ref = data::load_corpus(data_dir, data::Split::kVal);
  evaluation::EvalReport report;
  if (ckpt_path) {
    const LoadedModel m = load_model(*ckpt_path);
    evaluation::EvalOptions o;
    o.mel = m.spec.mel;
    o.mu_dim = m.cfg.mode == training::TrainMode::kAugCondD
                   ? static_cast<std::size_t>(m.spec.discriminator.mu_dim)
                   : 0;
    auto vocoder = [&](const dsp::MelSpectrogram& mel, const augment::AugmentationState&) {
      return models::generate(m.spec.generator, m.generator, mel);
    };
    report = evaluation::evaluate(vocoder, ref, o);
    report.config_echo = m.echo;
  } else {
    const config::RunConfig cfg = config::load(std::nullopt, config_file, {});
    evaluation::EvalOptions o;
    o.mel = cfg.spec.mel;
    const data::Corpus synth = data::load_corpus(*synth_dir, data::Split::kVal);
    report = evaluation::evaluate_pairs(synth, ref, o);
    report.config_echo = config::echo(cfg);
  }
  const std::string json = evaluation::to_json(report);
  if (output) {
    write_text(*output, json);
  } else {
    out << json;
  }
  if (plot) {
    if (!metrics) throw ConfigError("--plot needs --metrics");
    std::ifstream in(*metrics);
    if (!in) throw IoError("cannot read " + *metrics);
    std::vector<training::LogRecord> log;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) log.push_back(training::parse_json_line(line));
    }
    write_text(*plot, plot_svg(log));
  }
  if (output) {
    out << "clips " << report.rows.size() << " (failures " << report.failures << "), mel_l1 "
        << fixed(report.mean_mel_l1) << ", periodicity " << fixed(report.mean_periodicity_error)
        << ", voiced_f1 " << fixed(report.mean_voiced_f1);
    if (report.frechet_available) out << ", mel_frechet " << fixed(report.mel_frechet);
    out << "\n";
  }
  return kExitOk;
}

int cmd_preview(const std::string& data_dir, const std::vector<std::string>& ids,
                const std::string& kind_name, std::optional<double> m,
                std::optional<double> s, const std::optional<std::string>& partner_id,
                std::uint64_t seed, const std::string& out_dir, std::ostream& out) {
  const augment::AugmentationKind kind = augment::parse_kind(kind_name);
  const data::Corpus corpus = data::load_corpus(data_dir);
  auto index_of = [&](const std::string& id) {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (corpus.clips[i].id == id) return i;
    }
    throw InvalidInputError("no clip '" + id + "' in " + data_dir);
  };
  std::vector<std::size_t> chosen;
  for (const std::string& id : ids) chosen.push_back(index_of(id));
  if (chosen.empty()) chosen.push_back(0);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  Rng rng(seed);
  for (std::size_t i : chosen) {
    const data::Clip& clip = corpus.clips[i];
    nlohmann::ordered_json side;
    side["id"] = clip.id;
    side["augmentation"] = augment::to_string(kind);
    dsp::Waveform wave;
    augment::AugmentationState mu;
    if (kind == augment::AugmentationKind::kMixup) {
      const double mm = m ? *m : uniform(rng);
      std::size_t p = corpus.size() > 1 ? (i + 1) % corpus.size() : i;
      if (partner_id) p = index_of(*partner_id);
      const dsp::Waveform& other = corpus.clips[p].wave;
      dsp::Waveform partner = other;
      partner.samples.resize(clip.wave.size(), 0.0);
      std::tie(wave, mu) = augment::mixup(clip.wave, partner, mm);
      side["m"] = mm;
      side["partner"] = corpus.clips[p].id;
    } else if (kind == augment::AugmentationKind::kRate) {
      const double ss = s ? *s : augment::sample_rate(rng).s;
      std::tie(wave, mu) = augment::rate_change(clip.wave, ss);
      side["s"] = ss;
    } else {
      wave = clip.wave;
    }
    side["mu"] = mu.mu;
    const std::string stem = clip.id + "_" + augment::to_string(kind);
    wav::write((fs::path(out_dir) / (stem + ".wav")).string(), wave);
    write_text((fs::path(out_dir) / (stem + ".json")).string(), side.dump(2) + "\n");
    out << stem << ".wav mu " << side["mu"].dump() << "\n";
  }
  return kExitOk;
}

}  // namespace

std::string plot_svg(std::span<const training::LogRecord> log) {
  constexpr double kW = 640, kH = 220, kPad = 40;
  std::vector<std::pair<double, double>> series[2];
  for (const training::LogRecord& r : log) {
    if (r.kind == training::LogRecord::Kind::kTrain) {
      series[0].emplace_back(static_cast<double>(r.step), r.losses.total_g);
    } else {
      series[1].emplace_back(static_cast<double>(r.step), r.val_mel_l1);
    }
  }
  const char* names[2] = {"total_g", "val_mel_l1"};
  const char* colors[2] = {"#1f77b4", "#d62728"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
      << 2 * kH << "\">\n";
  for (int k = 0; k < 2; ++k) {
    const double top = k * kH;
    svg << "<rect x=\"" << kPad << "\" y=\"" << top + 10 << "\" width=\"" << kW - 2 * kPad
        << "\" height=\"" << kH - kPad << "\" fill=\"none\" stroke=\"#999\"/>\n";
    svg << "<text x=\"" << kPad + 4 << "\" y=\"" << top + 24 << "\" font-size=\"12\">"
        << names[k] << "</text>\n";
    const auto& pts = series[k];
    if (pts.empty()) continue;
    double x0 = pts.front().first, x1 = pts.front().first;
    double y0 = pts.front().second, y1 = pts.front().second;
    for (const auto& [x, y] : pts) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    svg << "<polyline fill=\"none\" stroke=\"" << colors[k] << "\" points=\"";
    for (const auto& [x, y] : pts) {
      const double px = kPad + (x - x0) / (x1 - x0) * (kW - 2 * kPad);
      const double py = top + 10 + (1.0 - (y - y0) / (y1 - y0)) * (kH - kPad);
      svg << fixed(px, 1) << "," << fixed(py, 1) << " ";
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << kW - kPad << "\" y=\"" << top + 24
        << "\" font-size=\"10\" text-anchor=\"end\">" << fixed(y0) << " .. " << fixed(y1)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Augmentation-conditional GAN vocoder training and evaluation"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "write a synthetic harmonic corpus (train/ and val/)");
  std::size_t clips = 64, val_clips = 8;
  std::uint64_t gen_seed = 0;
  double duration = 3.0, f0_min = 80.0, f0_max = 300.0;
  int sample_rate = 22050;
  std::string gen_out;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--clips", clips, "training clips")->check(CLI::PositiveNumber);
  gen->add_option("--val-clips", val_clips, "validation clips");
  gen->add_option("--seed", gen_seed, "corpus seed");
  gen->add_option("--duration", duration, "seconds per clip")->check(CLI::PositiveNumber);
  gen->add_option("--sample-rate", sample_rate, "Hz")->check(CLI::PositiveNumber);
  gen->add_option("--f0-min", f0_min, "lowest fundamental (Hz)")->check(CLI::PositiveNumber);
  gen->add_option("--f0-max", f0_max, "highest fundamental (Hz)")->check(CLI::PositiveNumber);

  // train
  auto* train = app.add_subcommand("train", "train a vocoder from a config plus --key overrides");
  std::optional<std::string> config_file, profile_name, resume;
  std::uint64_t print_every = 50;
  train->add_option("--config", config_file,
                    std::string("flat key = value config file (default $") + kConfigEnv + ")");
  train->add_option("--resume", resume, "continue from a checkpoint of the same configuration");
  train->add_option("--print-every", print_every, "steps between printed loss lines (0: none)");
  KeyOptions train_keys;
  train_keys.attach(*train);

  // synth
  auto* synth = app.add_subcommand("synth", "vocode a .wav (copy synthesis) or a .mel file");
  std::string synth_ckpt, synth_in, synth_out;
  std::optional<std::string> save_mel;
  synth->add_option("--checkpoint", synth_ckpt, "checkpoint file")->required();
  synth->add_option("--input", synth_in, "input .wav or .mel")->required();
  synth->add_option("--output", synth_out, "output .wav")->required();
  synth->add_option("--save-mel", save_mel, "also write the generator input as .mel");

  // eval
  auto* ev = app.add_subcommand("eval", "objective metrics against a reference corpus");
  std::optional<std::string> eval_ckpt, synth_dir, eval_out, eval_config, metrics, plot;
  std::string eval_data;
  ev->add_option("--checkpoint", eval_ckpt, "checkpoint to copy-synthesise with");
  ev->add_option("--synth-dir", synth_dir, "pre-synthesised clips, matched to --data by id");
  ev->add_option("--data", eval_data, "reference corpus directory")->required();
  ev->add_option("--config", eval_config, "mel settings for --synth-dir mode");
  ev->add_option("--output", eval_out, "report path (default: stdout)");
  ev->add_option("--metrics", metrics, "metrics.jsonl to plot");
  ev->add_option("--plot", plot, "write an SVG of the metrics log");

  // preview-aug
  auto* prev = app.add_subcommand("preview-aug", "write augmented clips with a mu sidecar");
  std::string prev_data, prev_out, prev_kind = "mixup";
  std::vector<std::string> prev_ids;
  std::optional<double> prev_m, prev_s;
  std::optional<std::string> prev_partner;
  std::uint64_t prev_seed = 0;
  prev->add_option("--data", prev_data, "corpus directory")->required();
  prev->add_option("--ids", prev_ids, "clip ids (default: first clip)")->delimiter(',');
  prev->add_option("--augmentation", prev_kind, "mixup, rate or none");
  prev->add_option("--m", prev_m, "mixup rate (default: sampled)")->check(CLI::Range(0.0, 1.0));
  prev->add_option("--s", prev_s, "rate exponent (default: sampled)")->check(CLI::Range(-1.0, 1.0));
  prev->add_option("--partner", prev_partner, "mixup partner id (default: next clip)");
  prev->add_option("--seed", prev_seed, "seed for sampled parameters");
  prev->add_option("--out", prev_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      return cmd_gen_data(clips, val_clips, gen_seed, duration, sample_rate, f0_min, f0_max,
                          gen_out, out);
    }
    if (train->parsed()) {
      return cmd_train(config_file, profile_name, train_keys.given(), resume, print_every, out);
    }
    if (synth->parsed()) return cmd_synth(synth_ckpt, synth_in, synth_out, save_mel, out);
    if (ev->parsed()) {
      return cmd_eval(eval_ckpt, synth_dir, eval_data, eval_config, eval_out, metrics, plot, out);
    }
    if (prev->parsed()) {
      return cmd_preview(prev_data, prev_ids, prev_kind, prev_m, prev_s, prev_partner, prev_seed,
                         prev_out, out);
    }
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}

}  // namespace augcondd::cli
