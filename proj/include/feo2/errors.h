//
// Copyright 2026 The FeO2 Authors
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

#ifndef FEO2_ERRORS_H_
#define FEO2_ERRORS_H_

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace feo2 {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad parameter ranges, dimension mismatches, unknown
// config keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition (for example, an unclipped update
// handed to the private mean).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Caller misuse that is not a configuration problem (empty ledger, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Zero noise multiplier: the release has unbounded privacy loss.
class InfinitePrivacyLossError : public Error {
 public:
  using Error::Error;
};

// A closed-form optimal lambda diverges (tau^2 = 0 and similar corners).
class UnboundedLambdaError : public Error {
 public:
  using Error::Error;
};

// Variances are all zero, the optimal ratio is 0/0.
class UndefinedRatioError : public Error {
 public:
  using Error::Error;
};

// Root finding left its bracket.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared during training.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, int64_t round, int64_t client_id)
      : Error(what + " (round " + std::to_string(round) + ", client " +
              std::to_string(client_id) + ")"),
        round_(round),
        client_id_(client_id) {}

  int64_t round() const { return round_; }
  int64_t client_id() const { return client_id_; }

 private:
  int64_t round_;
  int64_t client_id_;
};

// Malformed binary input. `offset` is the byte position where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at byte offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace feo2

#endif  // FEO2_ERRORS_H_
