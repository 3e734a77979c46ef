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
#ifndef AUGCONDD_WAV_H_
#define AUGCONDD_WAV_H_

#include <string>

#include "augcondd/dsp.h"

namespace augcondd::wav {

// Mono RIFF/WAVE PCM, 16- or 24-bit. Integer value v maps to v / 2^(bits-1),
// so a full-scale 16-bit 32767 reads as 32767 / 32768.
dsp::Waveform read(const std::string& path);
// Writes round(x * 2^(bits-1)) clamped to the integer range; exact inverse of
// read() for samples that are multiples of 2^-(bits-1).
void write(const std::string& path, const dsp::Waveform& wave, int bits = 16);

}  // namespace augcondd::wav

#endif  // AUGCONDD_WAV_H_
