/* Copyright 2026 The imbalseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef IMBALSEG_ERROR_HPP_
#define IMBALSEG_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace imbalseg {

// Error hierarchy. The CLI maps these onto exit codes:
//   UsageError -> 1, DataError -> 2, NumericError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, arguments, or violated preconditions on parameters.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Missing/malformed files, inconsistent datasets, out-of-range labels.
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf, zero-sum normalization and other arithmetic failures.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace imbalseg

#endif  // IMBALSEG_ERROR_HPP_
