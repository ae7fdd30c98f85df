//
// Copyright 2026 The dpmargin Authors
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
//

#ifndef DPMARGIN_ERROR_HPP_
#define DPMARGIN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dpmargin {

// Every failure raised by the library derives from Error. The kind() string is
// stable and is what the CLI reports in machine-readable error documents.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("parse_error",
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class LabelError : public Error {
 public:
  LabelError(const std::string& message, std::size_t line)
      : Error("label_error", "line " + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& message)
      : Error("dimension_error", message) {}
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& message)
      : Error("domain_error", message) {}
};

// A privacy precondition failed. Never clamped.
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& message)
      : Error("precondition_error", message) {}
};

class ResourceError : public Error {
 public:
  explicit ResourceError(const std::string& message)
      : Error("resource_error", message) {}
};

class GenerationError : public Error {
 public:
  explicit GenerationError(const std::string& message)
      : Error("generation_error", message) {}
};

class OracleError : public Error {
 public:
  OracleError(const std::string& message, double lower, double upper)
      : Error("oracle_error", message + " (bracket [" + std::to_string(lower) +
                                  ", " + std::to_string(upper) + "])"),
        lower_(lower),
        upper_(upper) {}
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  double lower_;
  double upper_;
};

class SizeError : public Error {
 public:
  explicit SizeError(const std::string& message)
      : Error("size_error", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io_error", message) {}
};

}  // namespace dpmargin

#endif  // DPMARGIN_ERROR_HPP_
