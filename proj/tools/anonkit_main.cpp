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
//
// Batch front-end: verification, threat simulation, encoder optimization,
// estimator checks, calibration, and report re-rendering over JSON configs.
// Exit status: 0 all selected checks passed, 1 any check failed, 2 on
// configuration or I/O errors.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "anonkit/config.hpp"
#include "anonkit/core_geometry.hpp"
#include "anonkit/csv.hpp"
#include "anonkit/gallery.hpp"
#include "anonkit/runner.hpp"
#include "anonkit/world_model.hpp"

namespace {

using anonkit::ExperimentConfig;

std::string resolve_out_dir(const ExperimentConfig& cfg,
                            const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("ANONKIT_OUT"); env && *env) return env;
  return cfg.output_dir;
}

int run_suites(const std::string& config_path, const std::string& out_flag,
               bool verify, bool threat, bool optimize, bool estimators) {
  ExperimentConfig cfg = anonkit::parse_config(config_path);
  cfg.suite_verify = verify;
  cfg.suite_threat = threat;
  cfg.suite_optimize = optimize;
  cfg.suite_estimators = estimators;
  const std::string out_dir = resolve_out_dir(cfg, out_flag);
  const anonkit::RunReport report = anonkit::run_experiment(cfg, out_dir);
  std::cout << anonkit::render_report_from_outputs(out_dir);
  return report.all_passed ? 0 : 1;
}

int run_calibrate(const std::string& config_path, const std::string& out_flag) {
  ExperimentConfig cfg = anonkit::parse_config(config_path);
  const std::string out_dir = resolve_out_dir(cfg, out_flag);
  std::filesystem::create_directories(out_dir + "/calibrate");

  anonkit::RngEngine gallery_rng = anonkit::make_engine(
      anonkit::derive_seed(cfg.master_seed, "calibrate.gallery"));
  Eigen::MatrixXd codes(cfg.gallery_dim, cfg.gallery_size);
  for (int j = 0; j < cfg.gallery_size; ++j)
    codes.col(j) = anonkit::sample_unit_vector(cfg.gallery_dim, gallery_rng);
  const anonkit::Gallery gallery = anonkit::build_gallery(codes);

  std::vector<double> sphere_sims;
  sphere_sims.reserve(40000);
  for (int i = 0; i < 40000; ++i) {
    const Eigen::VectorXd a =
        anonkit::sample_unit_vector(cfg.gallery_dim, gallery_rng);
    const Eigen::VectorXd b =
        anonkit::sample_unit_vector(cfg.gallery_dim, gallery_rng);
    sphere_sims.push_back(anonkit::cosine_sim(a, b));
  }
  const double tau_cal = anonkit::calibrate_tau(sphere_sims);
  const double delta_cal = anonkit::calibrate_delta(gallery, cfg.k_nn);

  anonkit::RngEngine world_rng = anonkit::make_engine(
      anonkit::derive_seed(cfg.master_seed, "calibrate.world"));
  Eigen::VectorXd rho(static_cast<Eigen::Index>(cfg.rho.size()));
  for (std::size_t i = 0; i < cfg.rho.size(); ++i)
    rho[static_cast<Eigen::Index>(i)] = cfg.rho[i];
  const anonkit::WorldModel world =
      anonkit::make_world(cfg.d_id, cfg.d_attr, cfg.d_out, rho, cfg.sigma_g,
                          world_rng, cfg.master_seed);

  std::ofstream out(out_dir + "/calibrate/calibration.csv", std::ios::binary);
  anonkit::write_csv_row(out, {"quantity", "value"});
  anonkit::write_csv_row(out, {"tau_calibrated", anonkit::csv_number(tau_cal)});
  anonkit::write_csv_row(out,
                         {"delta_percentile", anonkit::csv_number(delta_cal)});
  for (int j = 0; j < cfg.oracle_count; ++j) {
    const anonkit::Oracle oracle = anonkit::make_oracle(
        world, cfg.oracle_dim, world_rng, cfg.oracle_impostor_pairs);
    anonkit::write_csv_row(out, {"oracle" + std::to_string(j) + "_impostor_mean",
                                 anonkit::csv_number(oracle.impostor_mean)});
    anonkit::write_csv_row(out, {"oracle" + std::to_string(j) + "_impostor_sd",
                                 anonkit::csv_number(oracle.impostor_sd)});
    anonkit::write_csv_row(out, {"oracle" + std::to_string(j) + "_theta",
                                 anonkit::csv_number(oracle.theta)});
  }
  std::cout << "tau_calibrated=" << anonkit::csv_number(tau_cal)
            << " delta_percentile=" << anonkit::csv_number(delta_cal) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anonkit: numerical verification of identity-decoupled "
               "anonymization on linear-Gaussian worlds"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string report_dir;
  std::string force_fail;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON experiment config")
        ->required();
    cmd->add_option("--out", out_dir,
                    "output directory (overrides config and ANONKIT_OUT)");
  };

  CLI::App* verify = app.add_subcommand(
      "verify", "run the eight analytic bound checks");
  add_common(verify);
  verify->add_option("--force-fail", force_fail,
                     "test hook: force the named bound report to fail")
      ->group("");

  CLI::App* threat = app.add_subcommand(
      "threat", "run the three-tier threat simulation over the rho grid");
  add_common(threat);

  CLI::App* optimize = app.add_subcommand(
      "optimize", "run encoder optimization ablations");
  add_common(optimize);

  CLI::App* estimate = app.add_subcommand(
      "estimate", "run estimator-versus-closed-form checks");
  add_common(estimate);

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "derive tau/delta and oracle impostor statistics");
  add_common(calibrate);

  CLI::App* report = app.add_subcommand(
      "report", "re-render the summary from stored CSV outputs");
  report->add_option("--in", report_dir, "directory of a previous run")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (verify->parsed()) {
      if (!force_fail.empty()) anonkit::set_injected_failure(force_fail);
      return run_suites(config_path, out_dir, true, false, false, false);
    }
    if (threat->parsed())
      return run_suites(config_path, out_dir, false, true, false, false);
    if (optimize->parsed())
      return run_suites(config_path, out_dir, false, false, true, false);
    if (estimate->parsed())
      return run_suites(config_path, out_dir, false, false, false, true);
    if (calibrate->parsed()) return run_calibrate(config_path, out_dir);
    if (report->parsed()) {
      const std::string summary =
          anonkit::render_report_from_outputs(report_dir);
      std::ofstream out(report_dir + "/summary.txt", std::ios::binary);
      if (!out) {
        std::cerr << "report: cannot write to " << report_dir << "\n";
        return 2;
      }
      out << summary;
      std::cout << summary;
      return 0;
    }
  } catch (const anonkit::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
