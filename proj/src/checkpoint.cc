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
#include "augcondd/checkpoint.h"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "augcondd/errors.h"

namespace augcondd::checkpoint {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  template <typename T>
  void pod(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out_.append(buf, sizeof(T));
  }
  void str(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_ += s;
  }
  void params(const models::ParamSet& p) {
    pod<std::uint32_t>(static_cast<std::uint32_t>(p.entries.size()));
    for (const models::NamedTensor& e : p.entries) {
      str(e.name);
      pod<std::uint32_t>(static_cast<std::uint32_t>(e.value.rank()));
      for (std::size_t d : e.value.shape()) pod<std::uint64_t>(d);
      out_.append(reinterpret_cast<const char*>(e.value.data()),
                  e.value.size() * sizeof(double));
    }
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string str() {
    const std::uint64_t n = pod<std::uint64_t>();
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  models::ParamSet params() {
    models::ParamSet p;
    const std::uint32_t count = pod<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
      models::NamedTensor e;
      e.name = str();
      const std::uint32_t rank = pod<std::uint32_t>();
      if (rank > 8) throw IoError("checkpoint tensor rank too large");
      Shape shape(rank);
      for (std::uint32_t r = 0; r < rank; ++r) shape[r] = pod<std::uint64_t>();
      const std::size_t n = shape_size(shape);
      need(n * sizeof(double));
      std::vector<double> data(n);
      std::memcpy(data.data(), in_.data() + pos_, n * sizeof(double));
      pos_ += n * sizeof(double);
      e.value = Tensor(std::move(shape), std::move(data));
      p.entries.push_back(std::move(e));
    }
    return p;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw IoError("truncated checkpoint");
  }
  const std::string& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize(const Checkpoint& ckpt) {
  const training::TrainState& s = ckpt.state;
  Writer w;
  std::string magic(kMagic, 8);
  for (char c : magic) w.pod<char>(c);
  w.pod<std::uint32_t>(kVersion);
  w.str(ckpt.config_echo);
  w.pod<std::uint64_t>(s.step);
  w.str(rng_state(s.rng));
  w.pod<std::uint8_t>(s.has_best ? 1 : 0);
  w.pod<std::uint64_t>(s.best_step);
  w.pod<double>(s.best_val);
  w.pod<std::uint64_t>(s.stale_validations);
  w.params(s.generator);
  w.params(s.discriminator);
  w.pod<std::uint64_t>(s.adam_g.t);
  w.params(s.adam_g.m);
  w.params(s.adam_g.v);
  w.pod<std::uint64_t>(s.adam_d.t);
  w.params(s.adam_d.m);
  w.params(s.adam_d.v);
  w.str("END");
  return w.take();
}

Checkpoint deserialize(const std::string& bytes) {
  Reader r(bytes);
  std::string magic;
  for (int i = 0; i < 8; ++i) magic.push_back(r.pod<char>());
  if (magic != std::string(kMagic, 8)) throw IoError("not a checkpoint (bad magic)");
  const std::uint32_t version = r.pod<std::uint32_t>();
  if (version != kVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  training::TrainState& s = ckpt.state;
  ckpt.config_echo = r.str();
  s.step = r.pod<std::uint64_t>();
  set_rng_state(s.rng, r.str());
  s.has_best = r.pod<std::uint8_t>() != 0;
  s.best_step = r.pod<std::uint64_t>();
  s.best_val = r.pod<double>();
  s.stale_validations = r.pod<std::uint64_t>();
  s.generator = r.params();
  s.discriminator = r.params();
  s.adam_g.t = r.pod<std::uint64_t>();
  s.adam_g.m = r.params();
  s.adam_g.v = r.params();
  s.adam_d.t = r.pod<std::uint64_t>();
  s.adam_d.m = r.params();
  s.adam_d.v = r.params();
  if (r.str() != "END") throw IoError("checkpoint trailer missing");
  return ckpt;
}

void save(const std::string& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize(ckpt);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write on checkpoint " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path + ": " + ec.message());
}

Checkpoint load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize(buf.str());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace augcondd::checkpoint
