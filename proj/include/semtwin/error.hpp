// Copyright 2026 The semtwin Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semtwin {

// Base of every error raised by the library. Each module throws one of the
// subclasses below; callers that only need a message can catch Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input (N-Triples, WKT, rule files, HURDAT2, CSV, config).
// line/column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(format(message, line, column)),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  static std::string format(const std::string& message, std::size_t line,
                            std::size_t column) {
    if (line == 0) return message;
    return std::to_string(line) + ":" + std::to_string(column) + ": " +
           message;
  }

  std::size_t line_;
  std::size_t column_;
};

// A value that is syntactically fine but breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ReasonError : public Error {
 public:
  using Error::Error;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

class LayoutError : public Error {
 public:
  using Error::Error;
};

class MetricsError : public Error {
 public:
  using Error::Error;
};

// Bad command-line usage or scenario configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace semtwin
