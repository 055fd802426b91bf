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
#ifndef ANONKIT_CONFIG_HPP_
#define ANONKIT_CONFIG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace anonkit {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TauMode { kFixed, kCalibrated };
enum class DeltaMode { kPercentile, kFixed };

// Fully resolved experiment configuration. Every field has a documented
// default except master_seed, which the config file must provide. Unknown or
// duplicate keys in the file are hard errors.
struct ExperimentConfig {
  std::uint64_t master_seed = 0;
  std::string output_dir = "anonkit-out";

  // world
  int d_id = 2;
  int d_attr = 2;
  int d_out = 6;
  std::vector<double> rho = {0.6};
  std::vector<double> rho_grid = {0.0, 0.3, 0.6, 0.9};
  double sigma_g = 0.05;

  // gallery (sphere geometry checks and the rejection sampler)
  int gallery_dim = 512;
  int gallery_size = 1000;

  // sampler
  TauMode tau_mode = TauMode::kFixed;
  double tau = 0.3;
  DeltaMode delta_mode = DeltaMode::kPercentile;
  double delta = 1.5;
  int k_nn = 5;
  int max_attempts = 64;

  // tradeoff
  double lambda = 1.0;
  double mu = 0.1;
  double beta = 0.1;
  double hinge_tau = 0.3;

  // oracles
  int oracle_count = 3;
  int oracle_dim = 16;
  int oracle_impostor_pairs = 10000;

  // suites
  bool suite_verify = true;
  bool suite_threat = false;
  bool suite_optimize = false;
  bool suite_estimators = false;

  // trials
  int lemma1_trials = 1000000;
  int prop1_trials = 10000;
  int theorem1_samples = 10000;
  int theorem1_sweep = 100;
  int theorem2_trials = 1000;
  int prop2_trials = 2000;
  int prop2_worlds = 20;
  int corollary1_worlds = 20;
  double epsilon_star = 0.1;
  int threat_identities = 100;
  int threat_samples_per_identity = 25;
  int threat_gallery = 400;
  int threat_impostor = 20000;
  double far_target = 0.01;
  int optimize_steps = 500;
  double optimize_step_size = 0.004;
  int optimize_seeds = 10;
  int mine_epochs = 500;
  double mine_step_size = 0.02;
  int mine_hidden = 64;
  int estimator_samples = 10000;
  int ksg_k = 3;
};

// Parses and validates a JSON config file; applies defaults and rejects
// unknown keys, duplicate keys, type mismatches, and missing master_seed.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Canonical serialization of a resolved config (sorted keys).
std::string resolved_config_json(const ExperimentConfig& config);

// Content hash of the resolved config, stable under key reordering in the
// source file.
std::string config_digest(const ExperimentConfig& config);

}  // namespace anonkit

#endif  // ANONKIT_CONFIG_HPP_
