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
#ifndef AUGCONDD_OPS_H_
#define AUGCONDD_OPS_H_

#include <cstddef>
#include <span>
#include <vector>

#include "augcondd/autograd.h"
#include "augcondd/dsp.h"

// Differentiable ops over (batch, channel, time) tensors.
namespace augcondd::nn {

struct ConvSpec {
  int stride = 1;
  int dilation = 1;
  int padding = 0;
};

// x: (B, Cin, T), weight: (Cout, Cin, K), bias: (Cout) or invalid Var.
// Zero padding; output length (T + 2p - d(K-1) - 1) / s + 1.
Var conv1d(const Var& x, const Var& weight, const Var& bias, ConvSpec spec);

// x: (B, Cin, T), weight: (Cin, Cout, K). Output length
// (T - 1) * stride - 2 * padding + K.
Var conv_transpose1d(const Var& x, const Var& weight, const Var& bias,
                     int stride, int padding);

Var leaky_relu(const Var& x, double slope);
Var tanh(const Var& x);
Var add(const Var& a, const Var& b);
// Scalars only.
Var weighted_sum(std::span<const Var> terms, std::span<const double> weights);
Var scale(const Var& x, double factor);

// Non-overlapping average pooling by 2 along time (odd tail dropped).
Var avg_pool2(const Var& x);

// x: (B, 1, T), mu: (B, d) -> (B, 1 + d, T); channel 0 is x, channel 1 + j
// is mu[:, j] repeated T times.
Var concat_condition(const Var& x, const Var& mu);

// x: (B, 1, T) -> (B, frames, n_mels) log-mel, differentiable in x.
Var log_mel(const Var& x, dsp::MelExtractor& extractor);

// out[b] = m[b] * x[b] + (1 - m[b]) * x[partner[b]].
Var mix_batch(const Var& x, std::span<const std::size_t> partner,
              std::span<const double> m);

// Per-element linear resampling followed by a crop/zero-pad window:
// out[b, 0, t] = map_b(x[b, 0, :])[offset[b] + t] for t < out_length.
Var apply_linear_maps(const Var& x, const std::vector<dsp::LinearMap>& maps,
                      std::span<const std::size_t> offset,
                      std::size_t out_length);

// mean((x - target)^2) over every element.
Var mean_squared_offset(const Var& x, double target);
// mean(|a - b|) over every element; shapes must match.
Var mean_abs_diff(const Var& a, const Var& b);

}  // namespace augcondd::nn

#endif  // AUGCONDD_OPS_H_
