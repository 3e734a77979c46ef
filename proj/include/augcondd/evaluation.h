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
#ifndef AUGCONDD_EVALUATION_H_
#define AUGCONDD_EVALUATION_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "augcondd/augment.h"
#include "augcondd/data.h"
#include "augcondd/dsp.h"

namespace augcondd::evaluation {

// Element-mean L1 between log-mels after trimming both waves to the shorter.
double mel_l1(const dsp::Waveform& x, const dsp::Waveform& y,
              const dsp::MelConfig& cfg);

struct PeriodicityConfig {
  int frame_length = 1024;
  int hop_length = 256;
  double fmin = 80.0;
  double fmax = 400.0;
  double voicing_threshold = 0.5;
  // Frames whose RMS falls below this are unvoiced with periodicity 0.
  double silence_rms = 1e-4;
};

struct PitchFrame {
  double periodicity = 0.0;  // max normalised autocorrelation, in [0, 1]
  double f0 = 0.0;           // Hz, 0 on silent frames
};

// ceil(len / hop) frames, frame f centred on sample f * hop (zero outside).
std::vector<PitchFrame> pitch_track(const dsp::Waveform& wave,
                                    const PeriodicityConfig& cfg = {});
std::vector<double> periodicity_track(const dsp::Waveform& wave,
                                      const PeriodicityConfig& cfg = {});

struct PeriodicityError {
  double rmse = 0.0;
  double voiced_f1 = 1.0;
};

// Both tracks over the shorter wave. F1 treats the reference voicing as
// truth; with no voiced frame on either side it is 1.
PeriodicityError periodicity_error(const dsp::Waveform& synth,
                                   const dsp::Waveform& ref,
                                   const PeriodicityConfig& cfg = {});

struct GaussianFit {
  int dim = 0;
  std::size_t count = 0;
  std::vector<double> mean;  // dim
  std::vector<double> cov;   // dim x dim, row-major, 1/(count - 1)
};

// Fit over every frame of every mel.
GaussianFit fit_gaussian(std::span<const dsp::MelSpectrogram> mels);

struct FrechetResult {
  double distance = 0.0;
  bool floored = false;  // an eigenvalue was raised to the floor
};

// |m_a - m_b|^2 + tr(C_a + C_b - 2 (C_a C_b)^(1/2)); eigenvalues of both
// covariances are floored at eigen_floor first.
FrechetResult gaussian_frechet(const GaussianFit& a, const GaussianFit& b,
                               double eigen_floor = 1e-10);

// Fréchet distance between Gaussian fits of pooled log-mel frames. Each set
// must provide at least n_mels + 1 frames.
FrechetResult mel_frechet(std::span<const dsp::Waveform> set_a,
                          std::span<const dsp::Waveform> set_b,
                          const dsp::MelConfig& cfg);

// Synthesises audio from a mel under augmentation state mu.
using Vocoder = std::function<dsp::Waveform(const dsp::MelSpectrogram&,
                                            const augment::AugmentationState&)>;
// Sees every mu handed to the vocoder.
using MuProbe = std::function<void(const augment::AugmentationState&)>;

struct ClipRow {
  std::string id;
  bool ok = true;
  std::string error;
  double mel_l1 = 0.0;
  double periodicity_error = 0.0;
  double voiced_f1 = 0.0;
};

struct EvalReport {
  std::vector<ClipRow> rows;
  std::size_t failures = 0;
  double mean_mel_l1 = 0.0;
  double mean_periodicity_error = 0.0;
  double mean_voiced_f1 = 0.0;
  double mel_frechet = 0.0;
  bool frechet_floored = false;
  bool frechet_available = false;  // false when too few frames
  std::string config_echo;
};

struct EvalOptions {
  dsp::MelConfig mel;
  PeriodicityConfig periodicity;
  std::size_t mu_dim = 0;  // state dimension of the model; mu is all zeros
  MuProbe probe;
};

// Copy synthesis of every clip in inference mode. Generation failures become
// failed rows; aggregates cover the successful ones.
EvalReport evaluate(const Vocoder& vocoder, const data::Corpus& corpus,
                    const EvalOptions& options);

// Metrics between paired clips (matched by id) without a model.
EvalReport evaluate_pairs(const data::Corpus& synth, const data::Corpus& ref,
                          const EvalOptions& options);

std::string to_json(const EvalReport& report);

}  // namespace augcondd::evaluation

#endif  // AUGCONDD_EVALUATION_H_
