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
#ifndef AUGCONDD_AUGMENT_H_
#define AUGCONDD_AUGMENT_H_

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "augcondd/dsp.h"
#include "augcondd/random.h"

namespace augcondd::augment {

enum class AugmentationKind { kNone, kMixup, kRate };
enum class Strategy { kS1, kS2 };

std::string to_string(AugmentationKind kind);
std::string to_string(Strategy strategy);
// Throw ConfigError on unknown names.
AugmentationKind parse_kind(const std::string& name);
Strategy parse_strategy(const std::string& name);

// Dimension of the state vector an augmentation produces (0 for none).
std::size_t state_dim(AugmentationKind kind);

struct AugmentationState {
  std::vector<double> mu;

  std::size_t dim() const { return mu.size(); }
  bool operator==(const AugmentationState&) const = default;
};

struct MixupParams {
  double m = 1.0;
  std::size_t partner_index = 0;
};

struct RateParams {
  double s = 0.0;
};

// (1 - max(m, 1 - m)) * 2: 0 at the endpoints, 1 at m = 0.5.
double mixup_state(double m);
// 2^s.
double rate_state(double s);

// m ~ U(0, 1); partner uniform over the other indices (own index when the
// batch has a single element).
MixupParams sample_mixup(Rng& rng, std::size_t own_index, std::size_t batch_size);
// One draw per element with partners given by a random cyclic permutation,
// so no element pairs with itself unless batch_size == 1.
std::vector<MixupParams> sample_mixup_batch(Rng& rng, std::size_t batch_size);
// s ~ U(-1, 1).
RateParams sample_rate(Rng& rng);

// m * x1 + (1 - m) * x2, no renormalisation.
std::pair<dsp::Waveform, AugmentationState> mixup(const dsp::Waveform& x1,
                                                  const dsp::Waveform& x2,
                                                  double m);
// Speed change by 2^s; state 2^s.
std::pair<dsp::Waveform, AugmentationState> rate_change(const dsp::Waveform& x,
                                                        double s);

// Parameters of one batch element's augmentation, kept so that S1 can apply
// exactly the same transform to generated audio.
struct AugmentRecord {
  AugmentationKind kind = AugmentationKind::kNone;
  double m = 1.0;
  std::size_t partner = 0;
  double s = 0.0;
  // Rate change: start of the output window inside the resampled signal.
  std::size_t crop_offset = 0;
};

struct AugmentOptions {
  // Rate change only: crop or zero-pad resampled waves back to the input
  // length so batches stay rectangular.
  bool fit_to_segment = true;
};

struct TrainingBatch {
  Strategy strategy = Strategy::kS2;
  AugmentationKind kind = AugmentationKind::kNone;
  std::vector<dsp::Waveform> real_waves;         // augmented real audio
  std::vector<dsp::MelSpectrogram> gen_inputs;   // what G receives
  std::vector<AugmentationState> mu;
  std::vector<dsp::MelSpectrogram> raw_mels;     // S1: un-augmented mels
  std::vector<AugmentRecord> records;
  AugmentOptions options;

  std::size_t size() const { return real_waves.size(); }
};

// Draws fresh per-element parameters for a batch of equal-length segments.
std::vector<AugmentRecord> plan_augmentation(Rng& rng, AugmentationKind kind,
                                             std::size_t batch_size,
                                             std::size_t segment_length,
                                             const AugmentOptions& options = {});

// Applies records to the batch (used for the real batch and, under S1, for the
// generated batch). Records index partners within `waves`.
std::vector<dsp::Waveform> apply_records(std::span<const dsp::Waveform> waves,
                                         std::span<const AugmentRecord> records,
                                         const AugmentOptions& options = {});
AugmentationState state_of(const AugmentRecord& record);

// S2: real_waves = Aug(x), gen_inputs = log_mel(real_waves).
// S1: real_waves = Aug(x), gen_inputs = raw_mels = log_mel(x).
TrainingBatch apply_strategy(std::span<const dsp::Waveform> real_waves,
                             Strategy strategy,
                             std::span<const AugmentRecord> records,
                             dsp::MelExtractor& extractor,
                             const AugmentOptions& options = {});
TrainingBatch apply_strategy(std::span<const dsp::Waveform> real_waves,
                             Strategy strategy, AugmentationKind kind, Rng& rng,
                             dsp::MelExtractor& extractor,
                             const AugmentOptions& options = {});

}  // namespace augcondd::augment

#endif  // AUGCONDD_AUGMENT_H_
