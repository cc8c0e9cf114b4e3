// Copyright 2026 The ertrl Authors
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

#ifndef ERTRL_ERRORS_H_
#define ERTRL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace ertrl {

// Argument errors (bad shapes, out-of-range sizes) are reported with
// std::invalid_argument; everything else derives from Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Numerical failure: non-finite loss, covariance not positive definite, ...
class ComputationError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  enum class Kind {
    kTruncated,
    kRowCountMismatch,
    kChecksumMismatch,
    kVersionMismatch,
    kMalformed,
  };

  DatasetError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace ertrl

#endif  // ERTRL_ERRORS_H_
