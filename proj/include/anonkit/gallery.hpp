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
#ifndef ANONKIT_GALLERY_HPP_
#define ANONKIT_GALLERY_HPP_

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anonkit/errors.hpp"
#include "anonkit/random.hpp"

namespace anonkit {

// Replacement-identity pool. Codes are stored column-wise and normalized to
// unit length at construction; the pool is immutable afterwards and safe to
// share across threads.
struct Gallery {
  Eigen::MatrixXd codes;    // d x N, unit-norm columns
  std::vector<int> labels;  // one identity label per column
  bool eval_disjoint = true;

  Eigen::Index dim() const { return codes.rows(); }
  Eigen::Index size() const { return codes.cols(); }
};

struct SamplerConfig {
  double tau = 0.3;          // distinctness threshold on cosine similarity
  double delta = 0.0;        // manifold-adherence threshold
  int k_nn = 5;              // neighbors used by the adherence distance
  int max_attempts = 64;     // exhaustion signals misconfiguration, not bad luck
};

struct SampleOutcome {
  Eigen::VectorXd replacement;  // accepted z'_id, unit norm
  int attempts = 0;
  double accepted_sim = 0.0;    // sim(z_id, z'_id), strictly below tau
  Eigen::Index gallery_index = -1;
};

struct AttemptsSummary {
  double mean = 0.0;
  int max = 0;
  std::map<int, std::int64_t> histogram;  // attempts -> count
};

Gallery build_gallery(const std::vector<Eigen::VectorXd>& codes,
                      const std::vector<int>& labels);
Gallery build_gallery(const Eigen::MatrixXd& codes,
                      const std::vector<int>& labels);
Gallery build_gallery(const Eigen::MatrixXd& codes);

// tau = impostor mean minus two sample standard deviations (n-1 divisor).
double calibrate_tau(const std::vector<double>& impostor_sims);

// Mean Euclidean distance from z to its k_nn nearest gallery codes. Reduces
// to nearest-neighbor distance at k_nn = 1.
double manifold_distance(const Eigen::VectorXd& z, const Gallery& gallery,
                         int k_nn);

// Default adherence threshold: 99th percentile of leave-one-out
// manifold_distance over the gallery's own codes.
double calibrate_delta(const Gallery& gallery, int k_nn,
                       double percentile = 0.99);

// Draw candidates uniformly from the gallery until one satisfies both
// acceptance conditions: sim(z_id, candidate) < tau and manifold adherence
// within delta. The input z_id influences nothing but the accept/reject bit.
SampleOutcome reject_sample(const Eigen::VectorXd& z_id, const Gallery& gallery,
                            const SamplerConfig& cfg, RngEngine& rng);

// 1 / (p_min * acceptance volume): upper bound on expected rejection steps.
double expected_steps_bound(double p_min, double acceptance_volume);

AttemptsSummary empirical_attempts(const Eigen::VectorXd& z_id,
                                   const Gallery& gallery,
                                   const SamplerConfig& cfg, int trials,
                                   RngEngine& rng);

// One record per line: comma-separated components, trailing label column.
// Header line carries dimension and count.
void save_gallery(const Gallery& gallery, const std::string& path);
Gallery load_gallery(const std::string& path);

}  // namespace anonkit

#endif  // ANONKIT_GALLERY_HPP_
