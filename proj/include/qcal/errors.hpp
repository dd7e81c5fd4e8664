// Copyright 2026 The qcal Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace qcal {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a physical formula (T <= 0, t outside the
/// horizon, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An absorption would push the calorimeter's squared temperature to <= 0.
class CalorimeterExhausted : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Adaptive integrator could not reach the requested time.
class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, double time, double step)
      : Error(what + " (t=" + std::to_string(time) +
              ", h=" + std::to_string(step) + ")"),
        time_(time),
        step_(step) {}

  double time() const { return time_; }
  double step() const { return step_; }

 private:
  double time_;
  double step_;
};

/// A measurement outcome with zero reference probability was observed.
class InfiniteEntropy : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Exhaustive enumeration requested beyond the supported size.
class CombinatorialLimit : public Error {
 public:
  using Error::Error;
};

/// Temperature lattice truncation lost weight even after enlargement.
class LatticeBoundsError : public Error {
 public:
  using Error::Error;
};

/// A trajectory set mixes configurations or directions.
class MixedEnsembleError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration text; carries the 1-based location when known.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0, int column = 0)
      : Error(line > 0 ? what + " at line " + std::to_string(line) +
                             ", column " + std::to_string(column)
                       : what),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Well-formed configuration that violates a physical or protocol invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcal
