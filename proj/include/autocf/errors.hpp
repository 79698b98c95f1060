/*
 * Copyright 2026 The AutoCF Authors.
 *
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

#ifndef AUTOCF_ERRORS_HPP_
#define AUTOCF_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace autocf {

// Invalid user-supplied configuration: bad shapes, malformed config text,
// incompatible stage choices, out-of-range indices.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Violated internal contract (stale tape, mismatched gradient set). Indicates
// a bug in the caller rather than bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Failure reading or parsing an interaction file.
class IngestError : public std::runtime_error {
 public:
  IngestError(const std::string& message, long line)
      : std::runtime_error(line > 0 ? message + " (line " +
                                          std::to_string(line) + ")"
                                    : message),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// A split produced an empty partition or ratios were invalid.
class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No valid negative item exists for a user.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent persisted artifact (snapshot, history, cache).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace autocf

#endif  // AUTOCF_ERRORS_HPP_
