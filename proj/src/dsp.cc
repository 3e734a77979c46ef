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
#include "augcondd/dsp.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <unsupported/Eigen/FFT>

#include "augcondd/errors.h"

namespace augcondd::dsp {
namespace {

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

double sinc(double x) {
  if (x == 0.0) return 1.0;
  return std::sin(kPi * x) / (kPi * x);
}

void require_length(std::size_t length) {
  if (length < 2) {
    throw InvalidInputError("waveform needs at least 2 samples, got " +
                            std::to_string(length));
  }
}

}  // namespace

Waveform ingest(std::vector<double> samples, int sample_rate) {
  if (samples.empty()) throw InvalidInputError("empty waveform");
  if (sample_rate <= 0) {
    throw InvalidInputError("sample rate must be positive");
  }
  for (double& s : samples) {
    if (!std::isfinite(s)) throw InvalidInputError("non-finite sample");
    s = std::clamp(s, -1.0, 1.0);
  }
  return Waveform{std::move(samples), sample_rate};
}

void MelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (sample_rate <= 0) fail("sample_rate must be positive");
  if (!is_power_of_two(fft_size)) fail("fft_size must be a power of two");
  if (hop_length < 1) fail("hop_length must be >= 1");
  if (hop_length > win_length) fail("hop_length must be <= win_length");
  if (win_length > fft_size) fail("win_length must be <= fft_size");
  if (n_mels < 1) fail("n_mels must be >= 1");
  if (!(fmin >= 0.0 && fmin < fmax)) fail("need 0 <= fmin < fmax");
  if (fmax > sample_rate / 2.0) fail("fmax must be <= sample_rate / 2");
  if (!(log_floor > 0.0)) fail("log_floor must be positive");
}

int MelConfig::num_frames(std::size_t length) const {
  return static_cast<int>((length + hop_length - 1) / hop_length);
}

MelConfig MelConfig::paper() { return MelConfig{}; }

MelConfig MelConfig::desk() {
  MelConfig cfg;
  cfg.fft_size = 256;
  cfg.hop_length = 64;
  cfg.win_length = 256;
  cfg.n_mels = 40;
  return cfg;
}

double hz_to_mel(double hz) {
  constexpr double kFSp = 200.0 / 3.0;
  constexpr double kMinLogHz = 1000.0;
  constexpr double kMinLogMel = kMinLogHz / kFSp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz < kMinLogHz) return hz / kFSp;
  return kMinLogMel + std::log(hz / kMinLogHz) / logstep;
}

double mel_to_hz(double mel) {
  constexpr double kFSp = 200.0 / 3.0;
  constexpr double kMinLogHz = 1000.0;
  constexpr double kMinLogMel = kMinLogHz / kFSp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel < kMinLogMel) return mel * kFSp;
  return kMinLogHz * std::exp(logstep * (mel - kMinLogMel));
}

namespace {

std::vector<double> band_edges_hz(const MelConfig& cfg) {
  const double lo = hz_to_mel(cfg.fmin);
  const double hi = hz_to_mel(cfg.fmax);
  std::vector<double> hz(cfg.n_mels + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i) {
    hz[i] = mel_to_hz(lo + (hi - lo) * i / (cfg.n_mels + 1));
  }
  return hz;
}

}  // namespace

std::vector<double> mel_center_frequencies(const MelConfig& cfg) {
  std::vector<double> edges = band_edges_hz(cfg);
  return {edges.begin() + 1, edges.end() - 1};
}

std::vector<double> mel_filterbank(const MelConfig& cfg) {
  cfg.validate();
  const int bins = cfg.num_bins();
  const std::vector<double> edges = band_edges_hz(cfg);
  std::vector<double> fb(static_cast<std::size_t>(cfg.n_mels) * bins, 0.0);
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double left = edges[m];
    const double centre = edges[m + 1];
    const double right = edges[m + 2];
    const double norm = 2.0 / (right - left);
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
      const double rising = (f - left) / (centre - left);
      const double falling = (right - f) / (right - centre);
      const double w = std::max(0.0, std::min(rising, falling));
      fb[static_cast<std::size_t>(m) * bins + k] = w * norm;
    }
  }
  return fb;
}

struct MelExtractor::FftImpl {
  Eigen::FFT<double> fft;
  std::vector<double> frame;
  std::vector<std::complex<double>> spectrum;
  std::vector<std::complex<double>> cbuf;
};

MelExtractor::MelExtractor(const MelConfig& cfg)
    : cfg_(cfg), fft_(std::make_unique<FftImpl>()) {
  cfg_.validate();
  window_.assign(cfg_.fft_size, 0.0);
  const int offset = (cfg_.fft_size - cfg_.win_length) / 2;
  for (int n = 0; n < cfg_.win_length; ++n) {
    // Periodic Hann.
    window_[offset + n] =
        0.5 - 0.5 * std::cos(2.0 * kPi * n / cfg_.win_length);
  }
  filterbank_ = mel_filterbank(cfg_);
  const int bins = cfg_.num_bins();
  band_first_.assign(cfg_.n_mels, 0);
  band_last_.assign(cfg_.n_mels, 0);
  for (int m = 0; m < cfg_.n_mels; ++m) {
    int first = bins, last = 0;
    for (int k = 0; k < bins; ++k) {
      if (filterbank_[static_cast<std::size_t>(m) * bins + k] != 0.0) {
        first = std::min(first, k);
        last = k + 1;
      }
    }
    band_first_[m] = std::min(first, last);
    band_last_[m] = last;
  }
  fft_->frame.resize(cfg_.fft_size);
  fft_->cbuf.resize(cfg_.fft_size);
}

MelExtractor::~MelExtractor() = default;
MelExtractor::MelExtractor(MelExtractor&&) noexcept = default;
MelExtractor& MelExtractor::operator=(MelExtractor&&) noexcept = default;

std::size_t MelExtractor::reflect(long index, std::size_t length) const {
  const long period = 2 * (static_cast<long>(length) - 1);
  long i = index % period;
  if (i < 0) i += period;
  if (i >= static_cast<long>(length)) i = period - i;
  return static_cast<std::size_t>(i);
}

ComplexSpectrogram MelExtractor::stft(std::span<const double> x) {
  require_length(x.size());
  const int frames = cfg_.num_frames(x.size());
  const int bins = cfg_.num_bins();
  const int n_fft = cfg_.fft_size;
  ComplexSpectrogram out;
  out.frames = frames;
  out.bins = bins;
  out.values.resize(static_cast<std::size_t>(frames) * bins);
  std::vector<double>& frame = fft_->frame;
  for (int t = 0; t < frames; ++t) {
    const long start = static_cast<long>(t) * cfg_.hop_length - n_fft / 2;
    for (int n = 0; n < n_fft; ++n) {
      frame[n] = window_[n] == 0.0
                     ? 0.0
                     : window_[n] * x[reflect(start + n, x.size())];
    }
    fft_->fft.fwd(fft_->spectrum, frame);
    std::copy_n(fft_->spectrum.begin(), bins,
                out.values.begin() + static_cast<std::size_t>(t) * bins);
  }
  return out;
}

void MelExtractor::forward(std::span<const double> x, std::vector<double>& out,
                           Cache* cache) {
  ComplexSpectrogram spec = stft(x);
  const int bins = spec.bins;
  const int n_mels = cfg_.n_mels;
  out.assign(static_cast<std::size_t>(spec.frames) * n_mels, 0.0);
  std::vector<double> magnitude(bins);
  std::vector<double> linear;
  if (cache) linear.assign(out.size(), 0.0);
  for (int t = 0; t < spec.frames; ++t) {
    for (int k = 0; k < bins; ++k) {
      magnitude[k] = std::abs(spec.values[static_cast<std::size_t>(t) * bins + k]);
    }
    for (int m = 0; m < n_mels; ++m) {
      const double* row = &filterbank_[static_cast<std::size_t>(m) * bins];
      double acc = 0.0;
      for (int k = band_first_[m]; k < band_last_[m]; ++k) {
        acc += row[k] * magnitude[k];
      }
      const std::size_t idx = static_cast<std::size_t>(t) * n_mels + m;
      out[idx] = std::log(std::max(acc, cfg_.log_floor));
      if (cache) linear[idx] = acc;
    }
  }
  if (cache) {
    cache->length = x.size();
    cache->spectrum = std::move(spec.values);
    cache->mel = std::move(linear);
  }
}

void MelExtractor::backward(const Cache& cache,
                            std::span<const double> grad_log_mel,
                            std::span<double> grad_x) {
  const int bins = cfg_.num_bins();
  const int n_mels = cfg_.n_mels;
  const int n_fft = cfg_.fft_size;
  const int frames = cfg_.num_frames(cache.length);
  std::vector<double> grad_mag(bins);
  std::vector<std::complex<double>>& g = fft_->cbuf;
  for (int t = 0; t < frames; ++t) {
    std::fill(grad_mag.begin(), grad_mag.end(), 0.0);
    bool any = false;
    for (int m = 0; m < n_mels; ++m) {
      const std::size_t idx = static_cast<std::size_t>(t) * n_mels + m;
      const double mel = cache.mel[idx];
      if (!(mel > cfg_.log_floor) || grad_log_mel[idx] == 0.0) continue;
      const double gm = grad_log_mel[idx] / mel;
      const double* row = &filterbank_[static_cast<std::size_t>(m) * bins];
      for (int k = band_first_[m]; k < band_last_[m]; ++k) {
        grad_mag[k] += gm * row[k];
      }
      any = true;
    }
    if (!any) continue;
    // d|X_k|/d(frame_n) = Re(u_k e^{+2 pi i k n / N}), u_k = X_k / |X_k|.
    // sum_k conj(G_k) e^{-...} via a forward FFT, then conjugate back.
    std::fill(g.begin(), g.end(), std::complex<double>(0.0, 0.0));
    for (int k = 0; k < bins; ++k) {
      const std::complex<double> x =
          cache.spectrum[static_cast<std::size_t>(t) * bins + k];
      const double mag = std::abs(x);
      if (mag == 0.0 || grad_mag[k] == 0.0) continue;
      g[k] = std::conj(x / mag * grad_mag[k]);
    }
    fft_->fft.fwd(fft_->spectrum, g);
    const long start = static_cast<long>(t) * cfg_.hop_length - n_fft / 2;
    for (int n = 0; n < n_fft; ++n) {
      if (window_[n] == 0.0) continue;
      grad_x[reflect(start + n, cache.length)] +=
          window_[n] * fft_->spectrum[n].real();
    }
  }
}

MelSpectrogram MelExtractor::log_mel(const Waveform& wave) {
  if (wave.sample_rate != cfg_.sample_rate) {
    throw ConfigError("sample rate mismatch: wave " +
                      std::to_string(wave.sample_rate) + " Hz, config " +
                      std::to_string(cfg_.sample_rate) + " Hz");
  }
  MelSpectrogram mel;
  forward(wave.samples, mel.values);
  mel.frames = cfg_.num_frames(wave.size());
  mel.n_mels = cfg_.n_mels;
  mel.config = cfg_;
  return mel;
}

ComplexSpectrogram stft(const Waveform& wave, const MelConfig& cfg) {
  MelExtractor extractor(cfg);
  return extractor.stft(wave.samples);
}

MelSpectrogram log_mel(const Waveform& wave, const MelConfig& cfg) {
  MelExtractor extractor(cfg);
  return extractor.log_mel(wave);
}

void LinearMap::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t j = 0; j + 1 < row_begin.size(); ++j) {
    double acc = 0.0;
    for (std::size_t p = row_begin[j]; p < row_begin[j + 1]; ++p) {
      acc += weight[p] * in[index[p]];
    }
    out[j] = acc;
  }
}

void LinearMap::apply_transpose(std::span<const double> out_grad,
                                std::span<double> in_grad) const {
  for (std::size_t j = 0; j + 1 < row_begin.size(); ++j) {
    const double g = out_grad[j];
    if (g == 0.0) continue;
    for (std::size_t p = row_begin[j]; p < row_begin[j + 1]; ++p) {
      in_grad[index[p]] += weight[p] * g;
    }
  }
}

LinearMap time_scale_map(std::size_t input_length, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw InvalidInputError("time-scale factor must be positive and finite");
  }
  const long out_len =
      std::lround(static_cast<double>(input_length) / factor);
  if (out_len < 2) {
    throw InvalidInputError("time-scaled output would have " +
                            std::to_string(out_len) + " samples");
  }
  constexpr double kZeroCrossings = 8.0;
  const double cutoff = std::min(1.0, 1.0 / factor);
  const double half_width = kZeroCrossings / cutoff;

  LinearMap map;
  map.input_length = input_length;
  map.row_begin.reserve(out_len + 1);
  map.row_begin.push_back(0);
  std::vector<double> taps;
  std::vector<long> positions;
  for (long j = 0; j < out_len; ++j) {
    const double centre = static_cast<double>(j) * factor;
    const long lo = static_cast<long>(std::floor(centre - half_width)) + 1;
    const long hi = static_cast<long>(std::ceil(centre + half_width)) - 1;
    taps.clear();
    positions.clear();
    double total = 0.0;
    for (long i = lo; i <= hi; ++i) {
      const double u = centre - static_cast<double>(i);
      if (std::abs(u) >= half_width) continue;
      const double taper = 0.5 * (1.0 + std::cos(kPi * u / half_width));
      const double w = cutoff * sinc(cutoff * u) * taper;
      total += w;
      taps.push_back(w);
      positions.push_back(i);
    }
    for (std::size_t p = 0; p < taps.size(); ++p) {
      const long i = positions[p];
      if (i < 0 || i >= static_cast<long>(input_length)) continue;
      map.index.push_back(static_cast<std::size_t>(i));
      map.weight.push_back(taps[p] / total);
    }
    map.row_begin.push_back(map.index.size());
  }
  return map;
}

Waveform resample_time_scale(const Waveform& wave, double factor) {
  const LinearMap map = time_scale_map(wave.size(), factor);
  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.samples.assign(map.output_length(), 0.0);
  map.apply(wave.samples, out.samples);
  return out;
}

}  // namespace augcondd::dsp
