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
#ifndef AUGCONDD_DATA_H_
#define AUGCONDD_DATA_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "augcondd/dsp.h"
#include "augcondd/random.h"

namespace augcondd::data {

enum class Split { kTrain, kVal };

struct Clip {
  std::string id;
  dsp::Waveform wave;
  std::string path;          // empty for in-memory clips
  std::vector<double> f0;    // optional ground-truth track, Hz (0 = unvoiced)
  int f0_hop = 256;          // samples between f0 values
};

struct Corpus {
  std::vector<Clip> clips;
  Split split = Split::kTrain;
  int sample_rate = 22050;

  std::size_t size() const { return clips.size(); }
  std::vector<std::string> ids() const;
};

struct SubsetSpec {
  double ratio = 1.0;
  std::uint64_t seed = 0;
};

// Reads every *.wav in dir (sorted by filename; id = stem). A manifest.tsv
// next to the audio, when present, supplies f0 tracks. Unreadable files are
// collected into one IoError; mixed sample rates raise ConfigError naming
// the offending file.
Corpus load_corpus(const std::string& dir, Split split = Split::kTrain);

// Writes <id>.wav (16-bit), <id>.f0 when a track exists, and manifest.tsv
// with one "id<TAB>path<TAB>duration_seconds<TAB>f0_path" record per clip.
void write_corpus(const Corpus& corpus, const std::string& dir);

// floor(ratio * N) clips (at least one): the prefix of a seeded shuffle, so a
// smaller ratio under the same seed selects a subset of a larger one. Result
// keeps manifest order.
Corpus subset(const Corpus& corpus, const SubsetSpec& spec);

// Random hop-aligned crop of `length` samples; shorter clips are zero padded
// at the tail.
dsp::Waveform sample_segment(const dsp::Waveform& clip, std::size_t length,
                             std::size_t hop, Rng& rng);

struct SyntheticOptions {
  double f0_min = 80.0;
  double f0_max = 300.0;
  int min_harmonics = 3;
  int max_harmonics = 6;
  double noise_db = -20.0;   // noise RMS relative to the voiced signal RMS
  double peak = 0.9;         // clips are scaled to this absolute peak
  int f0_hop = 256;
  std::size_t first_index = 0;  // clip i uses stream (seed, first_index + i)
  std::string id_prefix = "clip";
};

// Harmonic "toy speech": a vibrato fundamental with 3-6 decaying harmonics
// under a syllable-like envelope, plus low-passed noise. Deterministic per
// (seed, clip index); the f0 track is stored on each clip.
Corpus make_synthetic_corpus(std::size_t n_clips, std::uint64_t seed,
                             int sample_rate, double duration_seconds,
                             const SyntheticOptions& options = {});

// Binary log-mel file: "AUGMEL01", i32 frames, i32 n_mels, i32 sample_rate,
// i32 hop_length, then frames x n_mels little-endian f64 values.
void write_mel(const std::string& path, const dsp::MelSpectrogram& mel);
dsp::MelSpectrogram read_mel(const std::string& path);

}  // namespace augcondd::data

#endif  // AUGCONDD_DATA_H_
