/*
 * Copyright 2026 The FedSV Authors.
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

#ifndef FEDSV_COMMON_ERRORS_H_
#define FEDSV_COMMON_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fedsv {

// Root of every error raised by the library. Callers that only need to report
// a failure can catch this; the subclasses exist for tests and for the CLI to
// pick exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid numeric parameter (epsilon, delta, fractions, dimensions...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration was asked for a player count above the cap.
class EnumerationRefused : public Error {
 public:
  using Error::Error;
};

// The utility oracle failed or returned a value outside [0, r].
class OracleError : public Error {
 public:
  using Error::Error;
};

// Local training diverged or was given unusable inputs.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Malformed on-disk data (IDX files, snapshots, reports).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Configuration document failed validation. `path` points into the document,
// e.g. "/training/participant_fraction".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace fedsv

#endif  // FEDSV_COMMON_ERRORS_H_
