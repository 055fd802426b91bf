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
#ifndef ANONKIT_RUNNER_HPP_
#define ANONKIT_RUNNER_HPP_

#include <string>
#include <vector>

#include "anonkit/bounds.hpp"
#include "anonkit/config.hpp"

namespace anonkit {

inline constexpr const char* kToolVersion = "0.1.0";

struct SuiteResult {
  std::string name;
  bool passed = false;
  bool ran = false;
  double seconds = 0.0;
  std::vector<std::string> outputs;  // files written, relative to out dir
  std::string detail;                // one-line status
};

struct RunReport {
  std::string config_digest;
  std::string tool_version = kToolVersion;
  std::vector<SuiteResult> suites;
  bool all_passed = true;
};

// Executes every selected suite; per-suite errors are recorded and the run
// continues. All CSV outputs are a pure function of (config digest, tool
// version); wall-clock timings go to a separate timings file.
RunReport run_experiment(const ExperimentConfig& config,
                         const std::string& out_dir);

// The eight analytic bound checks at the configured sizes.
std::vector<BoundReport> run_verification_suite(const ExperimentConfig& config);

// Re-renders summary.txt from the CSVs of a previous run; no recomputation.
std::string render_report_from_outputs(const std::string& dir);

// Test hook: when set, the named bound report is forced to fail before the
// rollup (exercises the nonzero exit path).
void set_injected_failure(const std::string& report_name);

}  // namespace anonkit

#endif  // ANONKIT_RUNNER_HPP_
