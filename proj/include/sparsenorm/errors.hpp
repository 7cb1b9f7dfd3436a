// Copyright 2026 The sparsenorm Authors.
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

#ifndef SPARSENORM_ERRORS_HPP_
#define SPARSENORM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace sparsenorm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates a domain-type invariant (non-finite logit, empty vector,
/// non-positive epsilon, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Operand dimensions disagree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// The Jacobian of ev-softmax is undefined because some score sits on the
/// mean within the boundary margin.
class BoundaryError : public Error {
 public:
  explicit BoundaryError(const std::string& what, std::size_t index = 0)
      : Error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// A subset-mass query was made for a set of cardinality <= 1.
class SubsetError : public Error {
 public:
  using Error::Error;
};

/// Dempster's rule is undefined: the degree of conflict is (numerically) 1.
class TotalConflictError : public Error {
 public:
  using Error::Error;
};

/// A benchmark or dataset configuration cannot be honoured.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite objective.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparsenorm

#endif  // SPARSENORM_ERRORS_HPP_
