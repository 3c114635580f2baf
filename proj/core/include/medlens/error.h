// Copyright 2026 The MedLens Authors.
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

#ifndef MEDLENS_ERROR_H_
#define MEDLENS_ERROR_H_

#include <stdexcept>
#include <string>

namespace medlens {

// Error hierarchy. The three leaf kinds map one-to-one onto the CLI exit
// codes (1 usage/config, 2 data, 3 internal invariant).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration, bad arguments, or a violated precondition on inputs
// supplied by the caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

// The data itself cannot be processed: missing files or columns, no usable
// rows, degenerate class counts.
class DataError : public Error {
 public:
  using Error::Error;
};

// Something that must never happen did.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace medlens

#endif  // MEDLENS_ERROR_H_
