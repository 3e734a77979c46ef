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
#include "augcondd/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "augcondd/errors.h"

namespace augcondd::wav {
namespace {

std::uint32_t le32(const unsigned char* p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void put32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

dsp::Waveform read(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  auto fail = [&](const std::string& why) -> void { throw IoError(path + ": " + why); };
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    fail("not a RIFF/WAVE file");
  }
  int channels = 0, bits = 0, format = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const std::uint32_t size = le32(p + pos + 4);
    const unsigned char* body = p + pos + 8;
    if (pos + 8 + size > n) fail("truncated chunk");
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      if (size < 16) fail("short fmt chunk");
      format = le16(body);
      channels = le16(body + 2);
      rate = le32(body + 4);
      bits = le16(body + 14);
      if (format == 0xFFFE && size >= 26) format = le16(body + 24);
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      data = body;
      data_size = size;
    }
    pos += 8 + size + (size & 1);
  }
  if (format != 1) fail("only PCM is supported (format " + std::to_string(format) + ")");
  if (channels != 1) fail("expected mono, got " + std::to_string(channels) + " channels");
  if (bits != 16 && bits != 24) fail("unsupported bit depth " + std::to_string(bits));
  if (!data) fail("no data chunk");
  if (rate == 0) fail("zero sample rate");
  const std::size_t width = bits / 8;
  const std::size_t count = data_size / width;
  if (count == 0) fail("empty data chunk");
  std::vector<double> samples(count);
  const double scale = 1.0 / static_cast<double>(1 << (bits - 1));
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned char* s = data + i * width;
    std::int32_t v;
    if (bits == 16) {
      v = static_cast<std::int16_t>(le16(s));
    } else {
      v = s[0] | (s[1] << 8) | (s[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
    }
    samples[i] = v * scale;
  }
  return dsp::ingest(std::move(samples), static_cast<int>(rate));
}

void write(const std::string& path, const dsp::Waveform& wave, int bits) {
  if (bits != 16 && bits != 24) throw InvalidInputError("bits must be 16 or 24");
  const std::size_t width = bits / 8;
  const std::uint32_t data_size = static_cast<std::uint32_t>(wave.size() * width);
  std::string out;
  out.reserve(44 + data_size);
  out += "RIFF";
  put32(out, 36 + data_size);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(wave.sample_rate));
  put32(out, static_cast<std::uint32_t>(wave.sample_rate * width));
  put16(out, static_cast<std::uint16_t>(width));
  put16(out, static_cast<std::uint16_t>(bits));
  out += "data";
  put32(out, data_size);
  const double full = static_cast<double>(1 << (bits - 1));
  for (double x : wave.samples) {
    const double q = std::clamp(std::round(x * full), -full, full - 1.0);
    const std::int32_t v = static_cast<std::int32_t>(q);
    for (std::size_t b = 0; b < width; ++b) {
      out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("short write on " + path);
}

}  // namespace augcondd::wav
