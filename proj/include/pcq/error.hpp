// Copyright 2026 The pcq Authors.
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

namespace pcq {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad shape, bad parameter).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Input data could not be read or failed validation.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed query text or command-line usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace pcq
