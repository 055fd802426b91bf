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
#ifndef ANONKIT_BOUNDS_HPP_
#define ANONKIT_BOUNDS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "anonkit/gallery.hpp"
#include "anonkit/objectives.hpp"
#include "anonkit/world_model.hpp"

namespace anonkit {

// One numerically verified inequality. Exact comparisons carry a 1e-9
// tolerance, Monte Carlo comparisons three standard errors; the rule is
// always passed == (margin >= -tolerance).
struct BoundReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool passed = false;
  double tolerance = 0.0;
  int n_trials = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string notes;
};

BoundReport make_report(std::string name, double lhs, double rhs,
                        double tolerance, int n_trials, std::uint64_t seed,
                        std::string notes = {});

// Acceptance-probability lower bound: empirical rejection rate of uniform
// sphere draws against the sub-Gaussian tail.
BoundReport verify_lemma1(Eigen::Index d, double tau, int n_trials,
                          std::uint64_t seed);

// Expected rejection-step bound against the Monte-Carlo acceptance mass.
BoundReport verify_prop1(const Gallery& gallery, const SamplerConfig& cfg,
                         int trials, std::uint64_t seed);

// Identity leakage never exceeds the disentanglement residual; the closed
// form is cross-checked by the KSG estimator when n_samples > 0.
BoundReport verify_theorem1(const WorldModel& world, int n_samples,
                            std::uint64_t seed);

// Rejection-event information: binary entropy of the exact rejection
// probability against the entropy of the sub-Gaussian bound. The prose
// constant of one nano-bit is reported, not asserted.
BoundReport verify_remark1(Eigen::Index d, double tau);

// Semantic distortion triangle bound, per trial and in aggregate.
BoundReport verify_theorem2(const WorldModel& world, int n_trials,
                            std::uint64_t seed,
                            const LinearEncoder* encoder = nullptr);

// Pareto condition assembled from the theorem-1 and theorem-2 components.
BoundReport verify_theorem3(const WorldModel& world,
                            const TradeoffParams& params, int n_trials,
                            std::uint64_t seed);

// Per-oracle mean anonymized similarity against impostor mean plus the
// Pinsker-Lipschitz term.
BoundReport verify_prop2(const WorldModel& world,
                         const std::vector<Oracle>& oracles, int n_trials,
                         std::uint64_t seed);

// Worlds below the target residual keep leakage below the target for any
// generator matrices.
BoundReport verify_corollary1(const std::vector<WorldModel>& worlds,
                              double epsilon_star, int generators_per_world,
                              std::uint64_t seed);

// Comma-separated (name, lhs, rhs, margin, passed, n_trials, seed) rows.
void save_reports(const std::vector<BoundReport>& reports,
                  const std::string& path);

}  // namespace anonkit

#endif  // ANONKIT_BOUNDS_HPP_
