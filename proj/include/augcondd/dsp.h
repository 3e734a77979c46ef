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
#ifndef AUGCONDD_DSP_H_
#define AUGCONDD_DSP_H_

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace augcondd::dsp {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 22050;

  std::size_t size() const { return samples.size(); }
  bool operator==(const Waveform&) const = default;
};

// Rejects empty or non-finite waves and clamps samples into [-1, 1].
Waveform ingest(std::vector<double> samples, int sample_rate);

struct MelConfig {
  int fft_size = 1024;
  int hop_length = 256;
  int win_length = 1024;
  int n_mels = 80;
  int sample_rate = 22050;
  double fmin = 0.0;
  double fmax = 11025.0;
  double log_floor = 1e-5;

  // Throws ConfigError unless hop <= win <= fft, fft is a power of two,
  // n_mels >= 1 and fmin < fmax <= sample_rate / 2.
  void validate() const;
  int num_bins() const { return fft_size / 2 + 1; }
  // Frames of a wave with `length` samples: ceil(length / hop).
  int num_frames(std::size_t length) const;

  // 22.05 kHz, 1024/256/1024, 80 mels.
  static MelConfig paper();
  // 22.05 kHz, 256/64/256, 40 mels.
  static MelConfig desk();

  bool operator==(const MelConfig&) const = default;
};

struct MelSpectrogram {
  int frames = 0;
  int n_mels = 0;
  std::vector<double> values;  // frames x n_mels, row-major
  MelConfig config;

  double at(int frame, int mel) const { return values[frame * n_mels + mel]; }
  bool operator==(const MelSpectrogram&) const = default;
};

struct ComplexSpectrogram {
  int frames = 0;
  int bins = 0;
  std::vector<std::complex<double>> values;  // frames x bins

  std::complex<double> at(int frame, int bin) const {
    return values[frame * bins + bin];
  }
};

// Slaney-scale mel conversions.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular Slaney-normalized filters, n_mels x (fft_size/2 + 1) row-major.
std::vector<double> mel_filterbank(const MelConfig& cfg);
// Centre frequency (Hz) of each mel band.
std::vector<double> mel_center_frequencies(const MelConfig& cfg);

// Hann-windowed STFT, one frame centred on every multiple of hop_length,
// reflect padding at the edges.
ComplexSpectrogram stft(const Waveform& wave, const MelConfig& cfg);

// log(max(filterbank * |stft|, log_floor)).
MelSpectrogram log_mel(const Waveform& wave, const MelConfig& cfg);

// Precomputed window, filterbank and FFT for repeated extraction. Forward and
// backward passes over raw sample spans back the differentiable op in
// nn::log_mel. Not thread-safe; use one instance per thread.
class MelExtractor {
 public:
  explicit MelExtractor(const MelConfig& cfg);
  ~MelExtractor();
  MelExtractor(MelExtractor&&) noexcept;
  MelExtractor& operator=(MelExtractor&&) noexcept;

  const MelConfig& config() const { return cfg_; }

  // State kept from forward() for backward().
  struct Cache {
    std::size_t length = 0;
    std::vector<std::complex<double>> spectrum;  // frames x bins
    std::vector<double> mel;                     // frames x n_mels, linear
  };

  ComplexSpectrogram stft(std::span<const double> x);
  // Writes frames x n_mels into out (resized).
  void forward(std::span<const double> x, std::vector<double>& out,
               Cache* cache = nullptr);
  // Accumulates d(loss)/d(x) into grad_x given d(loss)/d(log-mel).
  void backward(const Cache& cache, std::span<const double> grad_log_mel,
                std::span<double> grad_x);

  MelSpectrogram log_mel(const Waveform& wave);

 private:
  std::size_t reflect(long index, std::size_t length) const;

  MelConfig cfg_;
  std::vector<double> window_;      // fft_size, win centred and zero padded
  std::vector<double> filterbank_;  // n_mels x bins
  std::vector<int> band_first_;     // first nonzero bin per band
  std::vector<int> band_last_;      // one past last nonzero bin per band
  struct FftImpl;
  std::unique_ptr<FftImpl> fft_;
};

// Sparse linear map from an input signal to an output signal: output[j] =
// sum over taps of weight * input[index].
struct LinearMap {
  std::size_t input_length = 0;
  std::vector<std::size_t> row_begin;  // output_length + 1 offsets
  std::vector<std::size_t> index;
  std::vector<double> weight;

  std::size_t output_length() const {
    return row_begin.empty() ? 0 : row_begin.size() - 1;
  }
  void apply(std::span<const double> in, std::span<double> out) const;
  // out_grad -> in_grad accumulation (transpose).
  void apply_transpose(std::span<const double> out_grad,
                       std::span<double> in_grad) const;
};

// Windowed-sinc time-scale map: output length round(input_length / factor),
// output sample j reads input position j * factor. Kernel: 8 zero crossings
// each side of a sinc with cutoff min(1, 1/factor), Hann tapered, DC
// normalized.
LinearMap time_scale_map(std::size_t input_length, double factor);

// Time-compresses a wave by `factor` (> 1 speeds up) without changing the
// sample rate. Throws InvalidInputError if the result would be shorter than
// two samples.
Waveform resample_time_scale(const Waveform& wave, double factor);

}  // namespace augcondd::dsp

#endif  // AUGCONDD_DSP_H_
