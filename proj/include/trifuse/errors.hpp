// Copyright 2026 The TriFuse Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <stdexcept>
#include <string>

namespace trifuse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor dimensions that do not fit an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid model/run configuration, detected before any compute.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Malformed file contents (NPY headers, label lines, JSONL records).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input whose values violate a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace trifuse
