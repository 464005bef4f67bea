// Copyright 2026 The qsdc-hsps Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qsdc {

/// Parameter or configuration value outside its admissible domain.
/// `field()` carries the dotted path of the offending value.
class ValidationError : public std::invalid_argument {
public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// A computation that cannot produce a meaningful number for the given
/// inputs (truncation too coarse, degenerate source, zero gain, ...).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class TruncationError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class DegenerateError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace qsdc
