/*
 * Copyright 2026 The FedIIC Simulator Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FEDIIC_ERRORS_H_
#define FEDIIC_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fediic {

// Root of every error thrown by the library. The CLI maps subclasses onto
// process exit codes (see ExitCodeFor in tools/).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or insufficient input data.
class DataError : public Error {
 public:
  using Error::Error;
};

// A parse failure that can be pinned to a 1-based line of the input.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Operand shapes that do not fit the primitive or model they are fed to.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf appeared where finite values are promised.
class NumericError : public Error {
 public:
  using Error::Error;
};

class CryptoError : public Error {
 public:
  using Error::Error;
};

// Participants of the aggregation protocol disagree on encoding parameters.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace fediic

#endif  // FEDIIC_ERRORS_H_
