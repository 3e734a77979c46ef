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

#ifndef AUGCONDD_ERRORS_H_
#define AUGCONDD_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace augcondd {

// Root of every error the library throws. The CLI maps subclasses onto exit
// codes (see cli.h).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument values: too-short waveforms, length mismatches, non-finite
// augmentation states.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// Inconsistent configuration: bad mel parameters, mu supplied to an
// unconditional discriminator, sample-rate mismatches.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A loss or optimizer moment went non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(std::uint64_t step, const std::string& what)
      : Error("divergence at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace augcondd

#endif  // AUGCONDD_ERRORS_H_
