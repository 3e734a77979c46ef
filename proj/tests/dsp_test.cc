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

#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "augcondd/errors.h"
#include "test_util.h"

namespace augcondd::dsp {
namespace {

using augcondd::testing::fixtures;
using augcondd::testing::noise;
using augcondd::testing::sine;

TEST(MelConfigTest, ProfilesValidate) {
  EXPECT_NO_THROW(MelConfig::paper().validate());
  EXPECT_NO_THROW(MelConfig::desk().validate());
  const MelConfig p = MelConfig::paper();
  EXPECT_EQ(p.fft_size, 1024);
  EXPECT_EQ(p.hop_length, 256);
  EXPECT_EQ(p.win_length, 1024);
  EXPECT_EQ(p.n_mels, 80);
  EXPECT_EQ(p.sample_rate, 22050);
}

TEST(MelConfigTest, RejectsInconsistentSettings) {
  MelConfig c = MelConfig::desk();
  c.hop_length = 512;
  EXPECT_THROW(c.validate(), ConfigError);
  c = MelConfig::desk();
  c.win_length = 512;
  EXPECT_THROW(c.validate(), ConfigError);
  c = MelConfig::desk();
  c.fft_size = 300;
  c.win_length = 256;
  EXPECT_THROW(c.validate(), ConfigError);
  c = MelConfig::desk();
  c.fmax = 20000;
  EXPECT_THROW(c.validate(), ConfigError);
  c = MelConfig::desk();
  c.n_mels = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(StftTest, FrameCountFollowsHop) {
  const MelConfig c = MelConfig::paper();
  EXPECT_EQ(stft(sine(440, 2560), c).frames, 10);
  for (std::size_t n : {2u, 63u, 64u, 65u, 1000u, 4097u}) {
    const MelConfig d = MelConfig::desk();
    EXPECT_EQ(log_mel(sine(300, n), d).frames,
              static_cast<int>((n + d.hop_length - 1) / d.hop_length)) << n;
  }
}

TEST(StftTest, ZeroInputGivesZeroMagnitude) {
  const ComplexSpectrogram s = stft(Waveform{std::vector<double>(1000, 0.0), 22050}, MelConfig::desk());
  for (auto v : s.values) EXPECT_EQ(std::abs(v), 0.0);
}

TEST(StftTest, RejectsTooShortInput) {
  EXPECT_THROW(stft(Waveform{{0.5}, 22050}, MelConfig::desk()), InvalidInputError);
}

TEST(StftTest, ImpulseFramesBoundedByWindowPeak) {
  const MelConfig c = MelConfig::desk();
  std::vector<double> x(2048, 0.0);
  x[1024] = 1.0;
  const ComplexSpectrogram s = stft(Waveform{x, 22050}, c);
  for (auto v : s.values) EXPECT_LE(std::abs(v), 1.0 + 1e-12);
}

// Frame t: samples t*hop - fft/2 .. t*hop + fft/2 - 1 under reflection,
// times a periodic Hann window, through a direct DFT.
TEST(StftTest, MatchesDirectDftOnOneFrame) {
  const MelConfig c = MelConfig::desk();
  const Waveform w = noise(900, 3);
  const ComplexSpectrogram s = stft(w, c);
  const int n = static_cast<int>(w.size());
  for (int t : {0, 5, 14}) {
    std::vector<double> frame(c.fft_size);
    for (int i = 0; i < c.fft_size; ++i) {
      int k = t * c.hop_length - c.fft_size / 2 + i;
      if (k < 0) k = -k;
      if (k >= n) k = 2 * (n - 1) - k;
      const double win = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / c.win_length);
      frame[i] = w.samples[k] * win;
    }
    for (int b : {0, 1, 17, 64, 128}) {
      std::complex<double> acc = 0.0;
      for (int i = 0; i < c.fft_size; ++i) {
        acc += frame[i] * std::polar(1.0, -2 * std::numbers::pi * b * i / c.fft_size);
      }
      EXPECT_NEAR(std::abs(s.at(t, b) - acc), 0.0, 1e-10) << "frame " << t << " bin " << b;
    }
  }
}

TEST(MelFilterbankTest, MatchesNumpyOracle) {
  const auto& fx = fixtures();
  if (fx.is_null()) GTEST_SKIP() << "oracle fixtures unavailable";
  const MelConfig c = MelConfig::desk();
  const std::vector<double> fb = mel_filterbank(c);
  const auto& ref = fx["filterbank"];
  ASSERT_EQ(ref.size(), static_cast<std::size_t>(c.n_mels));
  for (int m = 0; m < c.n_mels; ++m) {
    for (int b = 0; b < c.num_bins(); ++b) {
      EXPECT_NEAR(fb[m * c.num_bins() + b], ref[m][b].get<double>(), 1e-12);
    }
  }
  const std::vector<double> centers = mel_center_frequencies(c);
  for (int m = 0; m < c.n_mels; ++m) EXPECT_NEAR(centers[m], fx["centers"][m].get<double>(), 1e-9);
}

TEST(MelScaleTest, RoundTripsAndIsLinearBelow1k) {
  for (double hz : {0.0, 100.0, 999.0, 1000.0, 4321.0, 11025.0}) {
    EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
  }
  EXPECT_NEAR(hz_to_mel(500.0), 7.5, 1e-12);
  EXPECT_NEAR(hz_to_mel(1000.0), 15.0, 1e-12);
}

TEST(LogMelTest, SilenceSitsOnTheFloor) {
  const MelConfig c = MelConfig::desk();
  const MelSpectrogram m = log_mel(Waveform{std::vector<double>(512, 0.0), 22050}, c);
  for (double v : m.values) EXPECT_EQ(v, std::log(c.log_floor));
}

TEST(LogMelTest, SineAtBandCentrePeaksInThatBand) {
  const auto& fx = fixtures();
  if (fx.is_null()) GTEST_SKIP() << "oracle fixtures unavailable";
  const MelConfig c = MelConfig::desk();
  const std::vector<double> centers = mel_center_frequencies(c);
  for (int k : {10, 20, 30, 38}) {
    const MelSpectrogram m = log_mel(sine(centers[k], 4096), c);
    const int expected = fx["sine_argmax"][std::to_string(k)].get<int>();
    for (int f = 4; f < m.frames - 4; ++f) {
      int arg = 0;
      for (int b = 1; b < m.n_mels; ++b) {
        if (m.at(f, b) > m.at(f, arg)) arg = b;
      }
      EXPECT_EQ(arg, expected) << "band " << k << " frame " << f;
    }
  }
}

TEST(LogMelTest, ValuesMatchNumpyPipeline) {
  const auto& fx = fixtures();
  if (fx.is_null()) GTEST_SKIP() << "oracle fixtures unavailable";
  const MelConfig c = MelConfig::desk();
  const double f = mel_center_frequencies(c)[20];
  const MelSpectrogram m = log_mel(sine(f, 1000), c);
  const auto& ref = fx["sine_log_mel_k20"];
  ASSERT_EQ(ref.size(), static_cast<std::size_t>(m.frames));
  for (int t = 0; t < m.frames; ++t) {
    for (int b = 0; b < m.n_mels; ++b) EXPECT_NEAR(m.at(t, b), ref[t][b].get<double>(), 1e-9);
  }
}

TEST(LogMelTest, IsDeterministic) {
  const Waveform w = noise(3000, 9);
  EXPECT_EQ(log_mel(w, MelConfig::desk()), log_mel(w, MelConfig::desk()));
}

TEST(LogMelTest, GainNeverLowersUnflooredEntries) {
  const MelConfig c = MelConfig::desk();
  const Waveform w = noise(2048, 4, 22050, 0.2);
  Waveform loud = w;
  for (double& v : loud.samples) v *= 1.7;
  const MelSpectrogram a = log_mel(w, c), b = log_mel(loud, c);
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (a.values[i] > std::log(c.log_floor)) EXPECT_GE(b.values[i], a.values[i]);
  }
}

TEST(LogMelTest, SampleRateMismatchIsConfigError) {
  MelExtractor ex(MelConfig::desk());
  EXPECT_THROW(ex.log_mel(sine(100, 1000, 16000)), ConfigError);
}

TEST(LogMelTest, BackwardMatchesFiniteDifferences) {
  MelConfig c = MelConfig::desk();
  MelExtractor ex(c);
  const Waveform w = noise(300, 5);
  std::vector<double> out;
  MelExtractor::Cache cache;
  ex.forward(w.samples, out, &cache);
  std::vector<double> g(out.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::sin(0.37 * i);
  std::vector<double> grad(w.size(), 0.0);
  ex.backward(cache, g, grad);
  auto objective = [&](const std::vector<double>& x) {
    std::vector<double> o;
    ex.forward(x, o);
    double s = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) s += g[i] * o[i];
    return s;
  };
  for (std::size_t i : {0u, 1u, 77u, 150u, 298u, 299u}) {
    std::vector<double> xp = w.samples, xm = w.samples;
    xp[i] += 1e-6;
    xm[i] -= 1e-6;
    const double num = (objective(xp) - objective(xm)) / 2e-6;
    EXPECT_NEAR(grad[i], num, 1e-5 * std::max(1.0, std::abs(num))) << i;
  }
}

TEST(ResampleTest, IdentityFactor) {
  const Waveform w = noise(777, 2);
  const Waveform r = resample_time_scale(w, 1.0);
  ASSERT_EQ(r.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(r.samples[i], w.samples[i], 1e-6);
}

TEST(ResampleTest, LengthRule) {
  EXPECT_EQ(resample_time_scale(noise(1000, 1), 2.0).size(), 500u);
  EXPECT_EQ(resample_time_scale(noise(1000, 1), 0.5).size(), 2000u);
  EXPECT_EQ(resample_time_scale(noise(8192, 1), std::sqrt(2.0)).size(),
            static_cast<std::size_t>(std::llround(8192 / std::sqrt(2.0))));
  EXPECT_EQ(resample_time_scale(noise(10, 1), 1.3).sample_rate, 22050);
  EXPECT_THROW(resample_time_scale(noise(2, 1), 2.0), InvalidInputError);
  EXPECT_THROW(resample_time_scale(noise(30, 1), 0.0), InvalidInputError);
}

int zero_crossings(const std::vector<double>& x, std::size_t from, std::size_t to) {
  int n = 0;
  for (std::size_t i = from + 1; i < to; ++i) n += (x[i - 1] < 0) != (x[i] < 0);
  return n;
}

TEST(ResampleTest, DoublingSpeedDoublesFrequency) {
  const int sr = 22050;
  const Waveform w = sine(100.0, sr, sr, 0.8, 0.1);
  const Waveform r = resample_time_scale(w, 2.0);
  // 100 Hz has 200 crossings per second; 0.4 s of output away from the edges.
  const std::size_t a = 1000, b = a + static_cast<std::size_t>(0.4 * sr);
  const double freq = zero_crossings(r.samples, a, b) / (2.0 * 0.4);
  EXPECT_NEAR(freq, 200.0, 2.5);
}

TEST(ResampleTest, ThereAndBackPreservesMel) {
  const MelConfig c = MelConfig::desk();
  Waveform w = sine(300.0, 8192, 22050, 0.4);
  const Waveform s2 = sine(750.0, 8192, 22050, 0.2);
  for (std::size_t i = 0; i < w.size(); ++i) w.samples[i] += s2.samples[i];
  for (double f : {0.5, 0.8, 1.25, 2.0}) {
    Waveform back = resample_time_scale(resample_time_scale(w, f), 1.0 / f);
    back.samples.resize(w.size(), 0.0);
    const MelSpectrogram a = log_mel(w, c), b = log_mel(back, c);
    double l1 = 0.0;
    // Edge frames see truncated kernels; compare the interior.
    int count = 0;
    for (int t = 2; t < a.frames - 4; ++t) {
      for (int m = 0; m < a.n_mels; ++m, ++count) l1 += std::abs(a.at(t, m) - b.at(t, m));
    }
    EXPECT_LT(l1 / count, 0.05) << "factor " << f;
  }
}

TEST(LinearMapTest, TransposeIsAdjoint) {
  const LinearMap m = time_scale_map(200, 1.37);
  const Waveform x = noise(200, 11), y = noise(m.output_length(), 12);
  std::vector<double> mx(m.output_length()), mty(200, 0.0);
  m.apply(x.samples, mx);
  m.apply_transpose(y.samples, mty);
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) a += mx[i] * y.samples[i];
  for (std::size_t i = 0; i < 200; ++i) b += x.samples[i] * mty[i];
  EXPECT_NEAR(a, b, 1e-12);
}

TEST(IngestTest, ClampsAndRejects) {
  const Waveform w = ingest({0.5, 1.5, -2.0}, 16000);
  EXPECT_EQ(w.samples, (std::vector<double>{0.5, 1.0, -1.0}));
  EXPECT_THROW(ingest({}, 16000), InvalidInputError);
  EXPECT_THROW(ingest({0.1, NAN}, 16000), InvalidInputError);
  EXPECT_THROW(ingest({0.1}, 0), InvalidInputError);
}

}  // namespace
}  // namespace augcondd::dsp
