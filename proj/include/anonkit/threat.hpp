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
#ifndef ANONKIT_THREAT_HPP_
#define ANONKIT_THREAT_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anonkit/gallery.hpp"
#include "anonkit/objectives.hpp"
#include "anonkit/world_model.hpp"

namespace anonkit {

struct ThreatSizes {
  int n_identities = 100;
  int samples_per_identity = 25;
  int gallery_size = 400;            // replacement identities, disjoint from
                                     // the evaluated population
  int impostor_calibration = 20000;  // pairs per oracle for the threshold
  double train_fraction = 0.5;       // tier 2 / tier 3 attacker splits
  double far_target = 0.01;
  double probe_ridge = 1e-3;
};

struct ProbeAccuracy {
  double top1 = 0.0;
  double top5 = 0.0;
};

struct ThreatReport {
  std::vector<double> tier1;  // per-oracle de-anonymization rate
  ProbeAccuracy tier2;
  double tier3 = 0.0;         // adaptive DAR, mean over oracles
  std::vector<double> tier3_per_oracle;
  double chance_level = 0.0;  // 1 / n_identities
  double far_target = 0.0;
  int n_pairs = 0;
  std::string config_digest;
};

// Tier 1: black-box observer. Per-oracle threshold at the (1 - far_target)
// quantile of that oracle's impostor similarities; DAR is the fraction of
// raw/safe pairs scoring above it.
std::vector<double> tier1_dar(
    const std::vector<Oracle>& oracles, const Eigen::MatrixXd& raw_images,
    const Eigen::MatrixXd& safe_images,
    const std::vector<std::vector<double>>& impostor_sims_per_oracle,
    double far_target);

// Tier 2: white-box linear probe from attribute codes to identity, ridge
// regression against one-hot targets with a per-identity train/test split.
ProbeAccuracy tier2_probe(const Eigen::MatrixXd& attr_codes,
                          const std::vector<int>& identity_labels,
                          double train_fraction, double ridge, RngEngine& rng);

// Tier 3: adaptive attacker fitting a least-squares map from safe to raw
// embeddings on paired data, then re-running the tier-1 decision on held-out
// pairs. Returns per-oracle rates.
std::vector<double> tier3_adaptive(
    const std::vector<Oracle>& oracles, const Eigen::MatrixXd& raw_images,
    const Eigen::MatrixXd& safe_images,
    const std::vector<std::vector<double>>& impostor_sims_per_oracle,
    double far_target, double train_fraction, RngEngine& rng);

// Runs all three tiers on one generated population. When an encoder is given,
// attribute codes come from its attribute head and safe images decode them;
// otherwise the world's true codes are used. A sampler delta <= 0 is
// calibrated from the gallery.
ThreatReport run_threat_suite(const WorldModel& world,
                              const std::vector<Oracle>& oracles,
                              const SamplerConfig& sampler_cfg,
                              const ThreatSizes& sizes, RngEngine& rng,
                              const LinearEncoder* encoder = nullptr);

}  // namespace anonkit

#endif  // ANONKIT_THREAT_HPP_
