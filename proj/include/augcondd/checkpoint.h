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
#ifndef AUGCONDD_CHECKPOINT_H_
#define AUGCONDD_CHECKPOINT_H_

#include <string>

#include "augcondd/training.h"

// Binary little-endian container, field order:
//   magic "AUGCDCKP" (8 bytes), u32 version (1),
//   str config_echo, u64 step, str rng_state,
//   u8 has_best, u64 best_step, f64 best_val, u64 stale_validations,
//   params generator, params discriminator,
//   u64 adam_g.t, params adam_g.m, params adam_g.v,
//   u64 adam_d.t, params adam_d.m, params adam_d.v,
//   str "END".
// str = u64 byte length + bytes; params = u32 count, then per tensor
// str name, u32 rank, u64 dims[rank], f64 values[prod(dims)].
namespace augcondd::checkpoint {

inline constexpr char kMagic[9] = "AUGCDCKP";
inline constexpr unsigned kVersion = 1;

struct Checkpoint {
  std::string config_echo;
  training::TrainState state;
};

std::string serialize(const Checkpoint& ckpt);
Checkpoint deserialize(const std::string& bytes);

void save(const std::string& path, const Checkpoint& ckpt);
Checkpoint load(const std::string& path);

}  // namespace augcondd::checkpoint

#endif  // AUGCONDD_CHECKPOINT_H_
