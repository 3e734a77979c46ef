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
#include "augcondd/evaluation.h"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "json.hpp"

#include "augcondd/errors.h"

namespace augcondd::evaluation {
namespace {

dsp::Waveform trimmed(const dsp::Waveform& w, std::size_t n) {
  dsp::Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(w.samples.begin(), w.samples.begin() + n);
  return out;
}

double mean_abs_log_mel(const dsp::MelSpectrogram& a, const dsp::MelSpectrogram& b) {
  const std::size_t n = std::min(a.values.size(), b.values.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(a.values[i] - b.values[i]);
  return s / static_cast<double>(n);
}

Eigen::MatrixXd floored_matrix(const Eigen::MatrixXd& c, double floor, bool& floored) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  Eigen::VectorXd lambda = es.eigenvalues();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < floor) {
      lambda[i] = floor;
      floored = true;
    }
  }
  return es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

void aggregate(EvalReport& r) {
  std::size_t ok = 0;
  r.failures = 0;
  r.mean_mel_l1 = r.mean_periodicity_error = r.mean_voiced_f1 = 0.0;
  for (const ClipRow& row : r.rows) {
    if (!row.ok) {
      ++r.failures;
      continue;
    }
    ++ok;
    r.mean_mel_l1 += row.mel_l1;
    r.mean_periodicity_error += row.periodicity_error;
    r.mean_voiced_f1 += row.voiced_f1;
  }
  if (ok) {
    r.mean_mel_l1 /= ok;
    r.mean_periodicity_error /= ok;
    r.mean_voiced_f1 /= ok;
  }
}

void add_frechet(EvalReport& r, std::span<const dsp::Waveform> synth,
                 std::span<const dsp::Waveform> ref, const dsp::MelConfig& cfg) {
  if (synth.empty()) return;
  std::size_t frames_a = 0, frames_b = 0;
  for (const auto& w : synth) frames_a += cfg.num_frames(w.size());
  for (const auto& w : ref) frames_b += cfg.num_frames(w.size());
  const auto need = static_cast<std::size_t>(cfg.n_mels) + 1;
  if (frames_a < need || frames_b < need) return;
  const FrechetResult f = mel_frechet(synth, ref, cfg);
  r.mel_frechet = f.distance;
  r.frechet_floored = f.floored;
  r.frechet_available = true;
}

}  // namespace

double mel_l1(const dsp::Waveform& x, const dsp::Waveform& y, const dsp::MelConfig& cfg) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) throw InvalidInputError("mel_l1 needs at least 2 overlapping samples");
  dsp::MelExtractor ex(cfg);
  return mean_abs_log_mel(ex.log_mel(trimmed(x, n)), ex.log_mel(trimmed(y, n)));
}

std::vector<PitchFrame> pitch_track(const dsp::Waveform& wave, const PeriodicityConfig& cfg) {
  if (cfg.frame_length < 2 || cfg.hop_length < 1 || !(cfg.fmin > 0.0 && cfg.fmin < cfg.fmax)) {
    throw ConfigError("bad periodicity configuration");
  }
  const double sr = wave.sample_rate;
  const int min_lag = std::max(1, static_cast<int>(std::floor(sr / cfg.fmax)));
  const int max_lag = std::min(cfg.frame_length - 1, static_cast<int>(std::ceil(sr / cfg.fmin)));
  const std::size_t n = wave.size();
  const std::size_t frames = (n + cfg.hop_length - 1) / cfg.hop_length;
  const long half = cfg.frame_length / 2;
  std::vector<PitchFrame> out(frames);
  std::vector<double> buf(cfg.frame_length);
  std::vector<double> r(max_lag + 2, 0.0);
  for (std::size_t f = 0; f < frames; ++f) {
    const long start = static_cast<long>(f) * cfg.hop_length - half;
    double energy = 0.0;
    for (int i = 0; i < cfg.frame_length; ++i) {
      const long k = start + i;
      buf[i] = (k >= 0 && k < static_cast<long>(n)) ? wave.samples[k] : 0.0;
      energy += buf[i] * buf[i];
    }
    if (std::sqrt(energy / cfg.frame_length) < cfg.silence_rms) continue;
    double best = 0.0;
    for (int lag = min_lag; lag <= max_lag + 1 && lag < cfg.frame_length; ++lag) {
      double xy = 0.0, xx = 0.0, yy = 0.0;
      for (int i = 0; i + lag < cfg.frame_length; ++i) {
        xy += buf[i] * buf[i + lag];
        xx += buf[i] * buf[i];
        yy += buf[i + lag] * buf[i + lag];
      }
      r[lag] = (xx > 0.0 && yy > 0.0) ? xy / std::sqrt(xx * yy) : 0.0;
      if (lag <= max_lag) best = std::max(best, r[lag]);
    }
    PitchFrame& pf = out[f];
    pf.periodicity = std::clamp(best, 0.0, 1.0);
    if (best <= 0.0) continue;
    // First lag close to the maximum, to avoid sub-octave picks.
    int pick = min_lag;
    for (int lag = min_lag; lag <= max_lag; ++lag) {
      const bool peak = lag > min_lag && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1];
      if (peak && r[lag] >= 0.9 * best) {
        pick = lag;
        break;
      }
      if (r[lag] == best) pick = lag;
    }
    double shift = 0.0;
    if (pick > min_lag && pick < max_lag + 1) {
      const double a = r[pick - 1], b = r[pick], c = r[pick + 1];
      const double den = a - 2.0 * b + c;
      if (den < 0.0) shift = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
    }
    pf.f0 = sr / (pick + shift);
  }
  return out;
}

std::vector<double> periodicity_track(const dsp::Waveform& wave, const PeriodicityConfig& cfg) {
  std::vector<double> p;
  for (const PitchFrame& f : pitch_track(wave, cfg)) p.push_back(f.periodicity);
  return p;
}

PeriodicityError periodicity_error(const dsp::Waveform& synth, const dsp::Waveform& ref,
                                   const PeriodicityConfig& cfg) {
  const std::size_t n = std::min(synth.size(), ref.size());
  if (n == 0) throw InvalidInputError("periodicity_error on empty waves");
  const std::vector<double> ps = periodicity_track(trimmed(synth, n), cfg);
  const std::vector<double> pr = periodicity_track(trimmed(ref, n), cfg);
  double sq = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double d = ps[i] - pr[i];
    sq += d * d;
    const bool vs = ps[i] >= cfg.voicing_threshold, vr = pr[i] >= cfg.voicing_threshold;
    tp += vs && vr;
    fp += vs && !vr;
    fn += !vs && vr;
  }
  PeriodicityError e;
  e.rmse = std::sqrt(sq / ps.size());
  e.voiced_f1 = tp + fp + fn == 0 ? 1.0 : 2.0 * tp / (2.0 * tp + fp + fn);
  return e;
}

GaussianFit fit_gaussian(std::span<const dsp::MelSpectrogram> mels) {
  if (mels.empty()) throw InvalidInputError("no mels to fit");
  GaussianFit g;
  g.dim = mels.front().n_mels;
  const auto d = static_cast<std::size_t>(g.dim);
  for (const auto& m : mels) {
    if (m.n_mels != g.dim) throw InvalidInputError("mels with different band counts");
    g.count += m.frames;
  }
  if (g.count < 2) throw InvalidInputError("need at least two frames for a covariance");
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(g.dim);
  for (const auto& m : mels) {
    for (int f = 0; f < m.frames; ++f) {
      mean += Eigen::Map<const Eigen::VectorXd>(m.values.data() + f * d, g.dim);
    }
  }
  mean /= static_cast<double>(g.count);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(g.dim, g.dim);
  for (const auto& m : mels) {
    for (int f = 0; f < m.frames; ++f) {
      const Eigen::VectorXd x =
          Eigen::Map<const Eigen::VectorXd>(m.values.data() + f * d, g.dim) - mean;
      cov.selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
  }
  cov = cov.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(g.count - 1);
  g.mean.assign(mean.data(), mean.data() + d);
  g.cov.resize(d * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) g.cov[i * d + j] = cov(i, j);
  }
  return g;
}

FrechetResult gaussian_frechet(const GaussianFit& a, const GaussianFit& b, double eigen_floor) {
  if (a.dim != b.dim || a.dim < 1) throw InvalidInputError("Gaussian fits of different dimension");
  const int d = a.dim;
  const Eigen::Map<const Eigen::VectorXd> ma(a.mean.data(), d), mb(b.mean.data(), d);
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::MatrixXd ca0 = Eigen::Map<const RowMat>(a.cov.data(), d, d);
  const Eigen::MatrixXd cb0 = Eigen::Map<const RowMat>(b.cov.data(), d, d);
  FrechetResult r;
  const Eigen::MatrixXd ca = floored_matrix(0.5 * (ca0 + ca0.transpose()), eigen_floor, r.floored);
  const Eigen::MatrixXd cb = floored_matrix(0.5 * (cb0 + cb0.transpose()), eigen_floor, r.floored);
  // tr (Ca Cb)^(1/2) = tr (Ca^(1/2) Cb Ca^(1/2))^(1/2), the latter symmetric.
  const Eigen::MatrixXd ra = sqrt_psd(ca);
  Eigen::MatrixXd inner = ra * cb * ra;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
  const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  r.distance = (ma - mb).squaredNorm() + ca.trace() + cb.trace() - 2.0 * tr_sqrt;
  r.distance = std::max(r.distance, 0.0);
  return r;
}

FrechetResult mel_frechet(std::span<const dsp::Waveform> set_a,
                          std::span<const dsp::Waveform> set_b, const dsp::MelConfig& cfg) {
  dsp::MelExtractor ex(cfg);
  auto fit = [&](std::span<const dsp::Waveform> set) {
    std::vector<dsp::MelSpectrogram> mels;
    std::size_t frames = 0;
    for (const auto& w : set) {
      mels.push_back(ex.log_mel(w));
      frames += mels.back().frames;
    }
    if (frames < static_cast<std::size_t>(cfg.n_mels) + 1) {
      throw InvalidInputError("mel_frechet needs at least n_mels + 1 frames per set, got " +
                              std::to_string(frames));
    }
    return fit_gaussian(mels);
  };
  return gaussian_frechet(fit(set_a), fit(set_b));
}

EvalReport evaluate(const Vocoder& vocoder, const data::Corpus& corpus, const EvalOptions& o) {
  dsp::MelExtractor ex(o.mel);
  const augment::AugmentationState mu{std::vector<double>(o.mu_dim, 0.0)};
  EvalReport report;
  std::vector<dsp::Waveform> synth, ref;
  for (const data::Clip& clip : corpus.clips) {
    ClipRow row;
    row.id = clip.id;
    try {
      if (o.probe) o.probe(mu);
      dsp::Waveform out = vocoder(ex.log_mel(clip.wave), mu);
      const std::size_t n = std::min(out.size(), clip.wave.size());
      out = trimmed(out, n);
      const dsp::Waveform r = trimmed(clip.wave, n);
      row.mel_l1 = mel_l1(out, r, o.mel);
      const PeriodicityError pe = periodicity_error(out, r, o.periodicity);
      row.periodicity_error = pe.rmse;
      row.voiced_f1 = pe.voiced_f1;
      synth.push_back(std::move(out));
      ref.push_back(r);
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  aggregate(report);
  add_frechet(report, synth, ref, o.mel);
  return report;
}

EvalReport evaluate_pairs(const data::Corpus& synth_corpus, const data::Corpus& ref_corpus,
                          const EvalOptions& o) {
  EvalReport report;
  std::vector<dsp::Waveform> synth, ref;
  for (const data::Clip& clip : ref_corpus.clips) {
    ClipRow row;
    row.id = clip.id;
    const auto it = std::find_if(synth_corpus.clips.begin(), synth_corpus.clips.end(),
                                 [&](const data::Clip& c) { return c.id == clip.id; });
    try {
      if (it == synth_corpus.clips.end()) throw InvalidInputError("no synthesised clip " + clip.id);
      const std::size_t n = std::min(it->wave.size(), clip.wave.size());
      const dsp::Waveform s = trimmed(it->wave, n), r = trimmed(clip.wave, n);
      row.mel_l1 = mel_l1(s, r, o.mel);
      const PeriodicityError pe = periodicity_error(s, r, o.periodicity);
      row.periodicity_error = pe.rmse;
      row.voiced_f1 = pe.voiced_f1;
      synth.push_back(s);
      ref.push_back(r);
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  aggregate(report);
  add_frechet(report, synth, ref, o.mel);
  return report;
}

std::string to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["mean_mel_l1"] = r.mean_mel_l1;
  j["mean_periodicity_error"] = r.mean_periodicity_error;
  j["mean_voiced_f1"] = r.mean_voiced_f1;
  if (r.frechet_available) {
    j["mel_frechet"] = r.mel_frechet;
    j["mel_frechet_floored"] = r.frechet_floored;
  } else {
    j["mel_frechet"] = nullptr;
  }
  j["clips"] = r.rows.size();
  j["failures"] = r.failures;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const ClipRow& row : r.rows) {
    nlohmann::ordered_json x;
    x["id"] = row.id;
    if (row.ok) {
      x["mel_l1"] = row.mel_l1;
      x["periodicity_error"] = row.periodicity_error;
      x["voiced_f1"] = row.voiced_f1;
    } else {
      x["error"] = row.error;
    }
    rows.push_back(std::move(x));
  }
  j["rows"] = std::move(rows);
  j["config"] = r.config_echo;
  return j.dump(2) + "\n";
}

}  // namespace augcondd::evaluation
