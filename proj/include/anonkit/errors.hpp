// Copyright 2026 The anonkit Authors
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
#ifndef ANONKIT_ERRORS_HPP_
#define ANONKIT_ERRORS_HPP_

#include <stdexcept>

namespace anonkit {

// max_attempts draws all failed the acceptance conditions; the configured
// tau/delta are infeasible for the gallery at hand.
class SamplingExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A covariance that must be positive definite is not.
class DegenerateCovarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative optimization produced a non-finite objective.
class TrainingDivergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace anonkit

#endif  // ANONKIT_ERRORS_HPP_
