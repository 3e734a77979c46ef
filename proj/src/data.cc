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
#include "augcondd/data.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "augcondd/errors.h"
#include "augcondd/wav.h"

namespace augcondd::data {
namespace {

namespace fs = std::filesystem;

constexpr char kManifest[] = "manifest.tsv";

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, '\t')) out.push_back(field);
  return out;
}

std::vector<double> read_f0(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open f0 track " + path.string());
  std::vector<double> f0;
  double v;
  while (in >> v) f0.push_back(v);
  if (!in.eof()) throw IoError("malformed f0 track " + path.string());
  return f0;
}

// Raised-cosine bursts separated by short gaps, peak 1.
std::vector<double> syllable_envelope(std::size_t n, int sample_rate, Rng& rng) {
  std::vector<double> env(n, 0.0);
  std::size_t pos = static_cast<std::size_t>(uniform(rng, 0.02, 0.08) * sample_rate);
  while (pos < n) {
    const auto len = static_cast<std::size_t>(uniform(rng, 0.15, 0.35) * sample_rate);
    const double level = uniform(rng, 0.6, 1.0);
    for (std::size_t i = 0; i < len && pos + i < n; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / std::max<std::size_t>(len - 1, 1));
      env[pos + i] = level * w;
    }
    pos += len + static_cast<std::size_t>(uniform(rng, 0.03, 0.12) * sample_rate);
  }
  return env;
}

Clip synth_clip(std::uint64_t seed, std::size_t index, int sample_rate,
                std::size_t n, const SyntheticOptions& o) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  Rng rng(seq);
  const double sr = sample_rate;
  const double f0_base = uniform(rng, o.f0_min, o.f0_max);
  const double vib_rate = uniform(rng, 0.5, 2.0);
  const double vib_depth = uniform(rng, 0.005, 0.015);
  const double vib_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const int harmonics = o.min_harmonics +
      static_cast<int>(uniform_index(rng, static_cast<std::size_t>(o.max_harmonics - o.min_harmonics + 1)));
  const double decay = uniform(rng, 0.4, 0.7);
  std::vector<double> phase(harmonics + 1);
  for (double& p : phase) p = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  const std::vector<double> env = syllable_envelope(n, sample_rate, rng);

  std::vector<double> f0_inst(n);
  std::vector<double> voiced(n, 0.0);
  double theta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = i / sr;
    const double f0 = f0_base * (1.0 + vib_depth * std::sin(2.0 * std::numbers::pi * vib_rate * t + vib_phase));
    f0_inst[i] = f0;
    double v = 0.0, amp = 1.0;
    for (int h = 1; h <= harmonics; ++h) {
      if (h * f0 < 0.5 * sr) v += amp * std::sin(h * theta + phase[h]);
      amp *= decay;
    }
    voiced[i] = env[i] * v;
    theta += 2.0 * std::numbers::pi * f0 / sr;
    if (theta > 2.0 * std::numbers::pi * 1e6) theta = std::fmod(theta, 2.0 * std::numbers::pi);
  }

  double voiced_sq = 0.0;
  for (double v : voiced) voiced_sq += v * v;
  const double voiced_rms = std::sqrt(voiced_sq / n);
  // One-pole low-pass at 4 kHz over white noise, rescaled to the target level.
  std::vector<double> noise(n);
  const double a = std::exp(-2.0 * std::numbers::pi * std::min(4000.0, 0.45 * sr) / sr);
  double state = 0.0, noise_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    state = a * state + (1.0 - a) * normal(rng);
    noise[i] = state;
    noise_sq += state * state;
  }
  const double noise_rms = std::sqrt(noise_sq / n);
  const double noise_gain =
      noise_rms > 0.0 ? voiced_rms * std::pow(10.0, o.noise_db / 20.0) / noise_rms : 0.0;

  std::vector<double> samples(n);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    samples[i] = voiced[i] + noise_gain * noise[i];
    peak = std::max(peak, std::abs(samples[i]));
  }
  const double gain = peak > 0.0 ? o.peak / peak : 0.0;
  for (double& s : samples) s *= gain;

  Clip clip;
  char id[64];
  std::snprintf(id, sizeof(id), "%s_%05zu", o.id_prefix.c_str(), index);
  clip.id = id;
  clip.wave = dsp::ingest(std::move(samples), sample_rate);
  clip.f0_hop = o.f0_hop;
  double env_peak = *std::max_element(env.begin(), env.end());
  const std::size_t frames = (n + o.f0_hop - 1) / o.f0_hop;
  clip.f0.resize(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    const std::size_t c = std::min(n - 1, f * o.f0_hop);
    clip.f0[f] = env[c] > 0.3 * env_peak ? f0_inst[c] : 0.0;
  }
  return clip;
}

}  // namespace

std::vector<std::string> Corpus::ids() const {
  std::vector<std::string> out;
  out.reserve(clips.size());
  for (const Clip& c : clips) out.push_back(c.id);
  return out;
}

Corpus load_corpus(const std::string& dir, Split split) {
  const fs::path root(dir);
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav") files.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list " + dir + ": " + ec.message());
  if (files.empty()) throw IoError("no .wav files in " + dir);
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  // id -> f0 path from the manifest, when there is one.
  std::vector<std::pair<std::string, std::string>> f0_paths;
  const fs::path manifest = root / kManifest;
  if (fs::exists(manifest)) {
    std::ifstream in(manifest);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const std::vector<std::string> f = split_tabs(line);
      if (f.size() >= 4 && !f[3].empty()) f0_paths.emplace_back(f[0], f[3]);
    }
  }

  Corpus corpus;
  corpus.split = split;
  std::string errors;
  for (const fs::path& file : files) {
    Clip clip;
    clip.id = file.stem().string();
    clip.path = file.string();
    try {
      clip.wave = wav::read(file.string());
    } catch (const Error& e) {
      errors += std::string("\n  ") + e.what();
      continue;
    }
    for (const auto& [id, path] : f0_paths) {
      if (id == clip.id) clip.f0 = read_f0(root / path);
    }
    corpus.clips.push_back(std::move(clip));
  }
  if (!errors.empty()) throw IoError("unreadable files in " + dir + ":" + errors);
  corpus.sample_rate = corpus.clips.front().wave.sample_rate;
  for (const Clip& c : corpus.clips) {
    if (c.wave.sample_rate != corpus.sample_rate) {
      throw ConfigError(c.path + " has sample rate " + std::to_string(c.wave.sample_rate) +
                        ", expected " + std::to_string(corpus.sample_rate));
    }
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::string& dir) {
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  std::set<std::string> seen;
  std::ostringstream manifest;
  manifest << "# id\tpath\tduration\tf0_path\n";
  for (const Clip& c : corpus.clips) {
    if (!seen.insert(c.id).second) throw InvalidInputError("duplicate clip id " + c.id);
    const std::string wav_name = c.id + ".wav";
    wav::write((root / wav_name).string(), c.wave);
    std::string f0_name;
    if (!c.f0.empty()) {
      f0_name = c.id + ".f0";
      std::ofstream f(root / f0_name);
      f.precision(17);
      for (double v : c.f0) f << v << '\n';
      if (!f) throw IoError("cannot write " + (root / f0_name).string());
    }
    char dur[32];
    std::snprintf(dur, sizeof(dur), "%.6f",
                  static_cast<double>(c.wave.size()) / c.wave.sample_rate);
    manifest << c.id << '\t' << wav_name << '\t' << dur << '\t' << f0_name << '\n';
  }
  std::ofstream m(root / kManifest);
  m << manifest.str();
  if (!m) throw IoError("cannot write " + (root / kManifest).string());
}

Corpus subset(const Corpus& corpus, const SubsetSpec& spec) {
  if (!(spec.ratio > 0.0 && spec.ratio <= 1.0)) {
    throw ConfigError("subset ratio must lie in (0, 1]");
  }
  const std::size_t n = corpus.size();
  if (n == 0) throw InvalidInputError("cannot subset an empty corpus");
  const std::size_t keep =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(spec.ratio * n + 1e-9)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(keep);
  std::sort(order.begin(), order.end());
  Corpus out;
  out.split = corpus.split;
  out.sample_rate = corpus.sample_rate;
  for (std::size_t i : order) out.clips.push_back(corpus.clips[i]);
  return out;
}

dsp::Waveform sample_segment(const dsp::Waveform& clip, std::size_t length,
                             std::size_t hop, Rng& rng) {
  if (length == 0 || hop == 0) throw InvalidInputError("segment length and hop must be positive");
  dsp::Waveform seg;
  seg.sample_rate = clip.sample_rate;
  seg.samples.assign(length, 0.0);
  std::size_t offset = 0;
  if (clip.size() > length) {
    const std::size_t offsets = (clip.size() - length) / hop + 1;
    offset = hop * uniform_index(rng, offsets);
  }
  const std::size_t count = std::min(length, clip.size() - std::min(offset, clip.size()));
  std::copy_n(clip.samples.begin() + offset, count, seg.samples.begin());
  return seg;
}

Corpus make_synthetic_corpus(std::size_t n_clips, std::uint64_t seed,
                             int sample_rate, double duration_seconds,
                             const SyntheticOptions& options) {
  if (n_clips == 0) throw InvalidInputError("n_clips must be at least 1");
  if (sample_rate <= 0) throw InvalidInputError("sample rate must be positive");
  if (!(duration_seconds > 0.0)) throw InvalidInputError("duration must be positive");
  if (!(options.f0_min > 0.0 && options.f0_min <= options.f0_max)) {
    throw InvalidInputError("bad f0 range");
  }
  if (options.min_harmonics < 1 || options.max_harmonics < options.min_harmonics) {
    throw InvalidInputError("bad harmonic count range");
  }
  if (options.f0_hop < 1) throw InvalidInputError("f0 hop must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration_seconds * sample_rate));
  if (n < 2) throw InvalidInputError("clips must have at least 2 samples");
  Corpus corpus;
  corpus.sample_rate = sample_rate;
  for (std::size_t i = 0; i < n_clips; ++i) {
    corpus.clips.push_back(synth_clip(seed, options.first_index + i, sample_rate, n, options));
  }
  return corpus;
}

void write_mel(const std::string& path, const dsp::MelSpectrogram& mel) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f.write("AUGMEL01", 8);
  const std::int32_t head[4] = {mel.frames, mel.n_mels, mel.config.sample_rate,
                                mel.config.hop_length};
  f.write(reinterpret_cast<const char*>(head), sizeof(head));
  f.write(reinterpret_cast<const char*>(mel.values.data()),
          static_cast<std::streamsize>(mel.values.size() * sizeof(double)));
  if (!f) throw IoError("short write on " + path);
}

dsp::MelSpectrogram read_mel(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path);
  char magic[8];
  std::int32_t head[4];
  f.read(magic, 8);
  f.read(reinterpret_cast<char*>(head), sizeof(head));
  if (!f || std::string(magic, 8) != "AUGMEL01") throw IoError(path + ": not a mel file");
  if (head[0] < 1 || head[1] < 1) throw IoError(path + ": bad mel dimensions");
  dsp::MelSpectrogram mel;
  mel.frames = head[0];
  mel.n_mels = head[1];
  mel.config.sample_rate = head[2];
  mel.config.hop_length = head[3];
  mel.config.n_mels = head[1];
  mel.values.resize(static_cast<std::size_t>(mel.frames) * mel.n_mels);
  f.read(reinterpret_cast<char*>(mel.values.data()),
         static_cast<std::streamsize>(mel.values.size() * sizeof(double)));
  if (!f) throw IoError(path + ": truncated mel data");
  return mel;
}

}  // namespace augcondd::data
