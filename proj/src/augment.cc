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
#include "augcondd/augment.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "augcondd/errors.h"

namespace augcondd::augment {

std::string to_string(AugmentationKind kind) {
  switch (kind) {
    case AugmentationKind::kNone: return "none";
    case AugmentationKind::kMixup: return "mixup";
    case AugmentationKind::kRate: return "rate";
  }
  return "?";
}

std::string to_string(Strategy strategy) {
  return strategy == Strategy::kS1 ? "S1" : "S2";
}

AugmentationKind parse_kind(const std::string& name) {
  if (name == "none") return AugmentationKind::kNone;
  if (name == "mixup") return AugmentationKind::kMixup;
  if (name == "rate") return AugmentationKind::kRate;
  throw ConfigError("unknown augmentation '" + name + "' (none|mixup|rate)");
}

Strategy parse_strategy(const std::string& name) {
  if (name == "S1" || name == "s1") return Strategy::kS1;
  if (name == "S2" || name == "s2") return Strategy::kS2;
  throw ConfigError("unknown strategy '" + name + "' (S1|S2)");
}

std::size_t state_dim(AugmentationKind kind) {
  return kind == AugmentationKind::kNone ? 0 : 1;
}

double mixup_state(double m) { return (1.0 - std::max(m, 1.0 - m)) * 2.0; }

double rate_state(double s) { return std::exp2(s); }

MixupParams sample_mixup(Rng& rng, std::size_t own_index, std::size_t batch_size) {
  MixupParams p;
  p.m = uniform(rng);
  if (batch_size <= 1) {
    p.partner_index = own_index;
  } else {
    std::size_t other = uniform_index(rng, batch_size - 1);
    p.partner_index = other >= own_index ? other + 1 : other;
  }
  return p;
}

std::vector<MixupParams> sample_mixup_batch(Rng& rng, std::size_t batch_size) {
  // Sattolo's algorithm: uniformly random single cycle.
  std::vector<std::size_t> perm(batch_size);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = batch_size; i > 1; --i) {
    const std::size_t j = uniform_index(rng, i - 1);
    std::swap(perm[i - 1], perm[j]);
  }
  std::vector<MixupParams> out(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    out[i].m = uniform(rng);
    out[i].partner_index = perm[i];
  }
  return out;
}

RateParams sample_rate(Rng& rng) { return RateParams{uniform(rng, -1.0, 1.0)}; }

std::pair<dsp::Waveform, AugmentationState> mixup(const dsp::Waveform& x1,
                                                  const dsp::Waveform& x2,
                                                  double m) {
  if (x1.size() != x2.size()) {
    throw InvalidInputError("mixup length mismatch: " + std::to_string(x1.size()) +
                            " vs " + std::to_string(x2.size()));
  }
  if (x1.sample_rate != x2.sample_rate) {
    throw InvalidInputError("mixup sample-rate mismatch");
  }
  if (!(m >= 0.0 && m <= 1.0)) throw InvalidInputError("mixture rate outside [0, 1]");
  dsp::Waveform out;
  out.sample_rate = x1.sample_rate;
  out.samples.resize(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) {
    out.samples[i] = m * x1.samples[i] + (1.0 - m) * x2.samples[i];
  }
  return {std::move(out), AugmentationState{{mixup_state(m)}}};
}

std::pair<dsp::Waveform, AugmentationState> rate_change(const dsp::Waveform& x,
                                                        double s) {
  if (!(s >= -1.0 && s <= 1.0)) throw InvalidInputError("rate exponent outside [-1, 1]");
  const double factor = rate_state(s);
  return {dsp::resample_time_scale(x, factor), AugmentationState{{factor}}};
}

AugmentationState state_of(const AugmentRecord& record) {
  switch (record.kind) {
    case AugmentationKind::kNone: return AugmentationState{};
    case AugmentationKind::kMixup: return AugmentationState{{mixup_state(record.m)}};
    case AugmentationKind::kRate: return AugmentationState{{rate_state(record.s)}};
  }
  return {};
}

std::vector<AugmentRecord> plan_augmentation(Rng& rng, AugmentationKind kind,
                                             std::size_t batch_size,
                                             std::size_t segment_length,
                                             const AugmentOptions& options) {
  std::vector<AugmentRecord> records(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    records[i].kind = kind;
    records[i].partner = i;
  }
  if (kind == AugmentationKind::kMixup) {
    const std::vector<MixupParams> params = sample_mixup_batch(rng, batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
      records[i].m = params[i].m;
      records[i].partner = params[i].partner_index;
    }
  } else if (kind == AugmentationKind::kRate) {
    for (AugmentRecord& r : records) {
      r.s = sample_rate(rng).s;
      const std::size_t scaled = static_cast<std::size_t>(
          std::lround(static_cast<double>(segment_length) / rate_state(r.s)));
      if (options.fit_to_segment && scaled > segment_length) {
        r.crop_offset = uniform_index(rng, scaled - segment_length + 1);
      }
    }
  }
  return records;
}

std::vector<dsp::Waveform> apply_records(std::span<const dsp::Waveform> waves,
                                         std::span<const AugmentRecord> records,
                                         const AugmentOptions& options) {
  if (records.size() != waves.size()) {
    throw InvalidInputError("augmentation records do not match batch size");
  }
  std::vector<dsp::Waveform> out;
  out.reserve(waves.size());
  for (std::size_t i = 0; i < waves.size(); ++i) {
    const AugmentRecord& r = records[i];
    switch (r.kind) {
      case AugmentationKind::kNone:
        out.push_back(waves[i]);
        break;
      case AugmentationKind::kMixup:
        if (r.partner >= waves.size()) throw InvalidInputError("mixup partner out of range");
        out.push_back(mixup(waves[i], waves[r.partner], r.m).first);
        break;
      case AugmentationKind::kRate: {
        dsp::Waveform scaled = rate_change(waves[i], r.s).first;
        if (options.fit_to_segment) {
          const std::size_t len = waves[i].size();
          dsp::Waveform fitted;
          fitted.sample_rate = scaled.sample_rate;
          fitted.samples.assign(len, 0.0);
          for (std::size_t t = 0; t < len; ++t) {
            const std::size_t src = r.crop_offset + t;
            if (src < scaled.size()) fitted.samples[t] = scaled.samples[src];
          }
          scaled = std::move(fitted);
        }
        out.push_back(std::move(scaled));
        break;
      }
    }
  }
  return out;
}

TrainingBatch apply_strategy(std::span<const dsp::Waveform> real_waves,
                             Strategy strategy,
                             std::span<const AugmentRecord> records,
                             dsp::MelExtractor& extractor,
                             const AugmentOptions& options) {
  TrainingBatch batch;
  batch.strategy = strategy;
  batch.kind = records.empty() ? AugmentationKind::kNone : records.front().kind;
  batch.options = options;
  batch.records.assign(records.begin(), records.end());
  batch.real_waves = apply_records(real_waves, records, options);
  for (const AugmentRecord& r : records) batch.mu.push_back(state_of(r));
  if (strategy == Strategy::kS2) {
    for (const dsp::Waveform& w : batch.real_waves) {
      batch.gen_inputs.push_back(extractor.log_mel(w));
    }
  } else {
    for (const dsp::Waveform& w : real_waves) {
      batch.raw_mels.push_back(extractor.log_mel(w));
    }
    batch.gen_inputs = batch.raw_mels;
  }
  return batch;
}

TrainingBatch apply_strategy(std::span<const dsp::Waveform> real_waves,
                             Strategy strategy, AugmentationKind kind, Rng& rng,
                             dsp::MelExtractor& extractor,
                             const AugmentOptions& options) {
  if (real_waves.empty()) throw InvalidInputError("empty batch");
  const std::size_t len = real_waves.front().size();
  for (const dsp::Waveform& w : real_waves) {
    if (w.size() != len) throw InvalidInputError("batch waves must share one length");
  }
  const std::vector<AugmentRecord> records =
      plan_augmentation(rng, kind, real_waves.size(), len, options);
  return apply_strategy(real_waves, strategy, records, extractor, options);
}

}  // namespace augcondd::augment
