// Copyright 2026 The qpt Authors
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

#ifndef QPT_ERROR_HPP_
#define QPT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace qpt {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented invariant (not Hermitian, not PSD, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A numerical kernel did not converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace qpt

#endif  // QPT_ERROR_HPP_
