// Copyright 2026 The Shardhouse Authors
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

namespace shardhouse {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid sharing parameters or coefficient family.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A value does not fit the digit domain of its column or scheme.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Shares failed an algebraic or signature check during reconstruction.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

/// Every candidate group of CSPs failed verification.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

/// Fewer than t CSPs could be reached.
class UnavailableError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class QueryError : public Error {
 public:
  using Error::Error;
};

/// Malformed frame or response on the store protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A store answered with an error status. `code` mirrors the wire field.
class RemoteError : public Error {
 public:
  RemoteError(std::string code, const std::string& message)
      : Error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace shardhouse
