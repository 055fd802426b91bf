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
#include "anonkit/world_model.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include <Eigen/SVD>

#include "anonkit/core_geometry.hpp"
#include "anonkit/estimators.hpp"
#include "../support/stats.hpp"

using namespace anonkit;

namespace {

Eigen::VectorXd rho1(double v) {
  Eigen::VectorXd rho(1);
  rho << v;
  return rho;
}

}  // namespace

TEST_CASE("epsilon_dis closed form") {
  RngEngine rng = make_engine(31);
  const WorldModel indep = make_world(3, 3, 8, Eigen::VectorXd(), 0.05, rng);
  CHECK(epsilon_dis(indep) == 0.0);

  const WorldModel w8 = make_world(3, 3, 8, rho1(0.8), 0.05, rng);
  CHECK(epsilon_dis(w8) == doctest::Approx(-0.5 * std::log(0.36)).epsilon(1e-12));
  CHECK(epsilon_dis(w8) == doctest::Approx(0.5108256238).epsilon(1e-9));

  Eigen::VectorXd rho2(2);
  rho2 << 0.5, 0.5;
  const WorldModel w55 = make_world(3, 3, 8, rho2, 0.05, rng);
  CHECK(epsilon_dis(w55) == doctest::Approx(2 * 0.1438410362).epsilon(1e-9));

  const WorldModel w6 = make_world(2, 2, 6, rho1(0.6), 0.05, rng);
  CHECK(epsilon_dis(w6) == doctest::Approx(0.2231435513).epsilon(1e-9));
}

TEST_CASE("make_world rejects degenerate couplings and bad shapes") {
  RngEngine rng = make_engine(32);
  CHECK_THROWS_AS(make_world(3, 3, 8, rho1(1.0), 0.05, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_world(3, 3, 8, rho1(-0.2), 0.05, rng),
                  std::invalid_argument);
  Eigen::VectorXd too_many(4);
  too_many << 0.1, 0.1, 0.1, 0.1;
  CHECK_THROWS_AS(make_world(3, 3, 8, too_many, 0.05, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_world(4, 4, 3, rho1(0.5), 0.05, rng),
                  std::invalid_argument);
}

TEST_CASE("joint covariance has identity blocks and exact canonical correlations") {
  RngEngine rng = make_engine(33);
  Eigen::VectorXd rho(2);
  rho << 0.7, 0.3;
  const WorldModel w = make_world(4, 5, 12, rho, 0.05, rng);
  const Eigen::MatrixXd joint = joint_covariance(w);
  CHECK((joint.topLeftCorner(4, 4) - Eigen::MatrixXd::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  CHECK((joint.bottomRightCorner(5, 5) - Eigen::MatrixXd::Identity(5, 5))
            .cwiseAbs()
            .maxCoeff() < 1e-14);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(w.cross);
  CHECK(svd.singularValues()(0) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(svd.singularValues()(1) == doctest::Approx(0.3).epsilon(1e-12));
  // mixing frames are orthonormal and mutually orthogonal when they fit
  CHECK((w.A.transpose() * w.A - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
  CHECK((w.B.transpose() * w.B - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-12);
  CHECK((w.A.transpose() * w.B).norm() < 1e-12);
}

TEST_CASE("epsilon_dis agrees with the Gaussian MI oracle on world blocks") {
  RngEngine rng = make_engine(34);
  Eigen::VectorXd rho(2);
  rho << 0.6, 0.25;
  const WorldModel w = make_world(3, 4, 10, rho, 0.05, rng);
  const MiEstimate mi = gaussian_mi(Eigen::MatrixXd::Identity(3, 3),
                                    Eigen::MatrixXd::Identity(4, 4), w.cross);
  CHECK(std::abs(mi.value - epsilon_dis(w)) < 1e-12);
}

TEST_CASE("sample_pair matches the world law") {
  RngEngine rng = make_engine(35);
  const WorldModel indep = make_world(2, 2, 6, Eigen::VectorXd(), 0.05, rng);
  const int n = 100000;
  Eigen::MatrixXd cross_acc = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const SamplePair pair = sample_pair(indep, rng);
    cross_acc += pair.z_id * pair.z_attr.transpose();
  }
  CHECK((cross_acc / n).cwiseAbs().maxCoeff() < 0.02);

  const WorldModel coupled = make_world(1, 1, 4, rho1(0.9), 0.05, rng);
  double sum_xy = 0.0, sum_xx = 0.0, sum_yy = 0.0;
  for (int i = 0; i < n; ++i) {
    const SamplePair pair = sample_pair(coupled, rng);
    sum_xy += pair.z_id[0] * pair.z_attr[0];
    sum_xx += pair.z_id[0] * pair.z_id[0];
    sum_yy += pair.z_attr[0] * pair.z_attr[0];
  }
  CHECK(sum_xy / std::sqrt(sum_xx * sum_yy) == doctest::Approx(0.9).epsilon(0.012));
}

TEST_CASE("sample_pair replays identically under the same stream") {
  RngEngine a = make_engine(36);
  RngEngine b = make_engine(36);
  const WorldModel w = [&] {
    RngEngine rng = make_engine(37);
    return make_world(3, 3, 8, rho1(0.4), 0.05, rng);
  }();
  const SamplePair pa = sample_pair(w, a);
  const SamplePair pb = sample_pair(w, b);
  CHECK(pa.z_id.isApprox(pb.z_id, 0.0));
  CHECK(pa.z_attr.isApprox(pb.z_attr, 0.0));
}

TEST_CASE("generate is linear and injects the configured noise") {
  RngEngine rng = make_engine(38);
  const WorldModel w0 = make_world(3, 3, 9, rho1(0.5), 0.0, rng);
  CHECK(generate(w0, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), rng)
            .norm() == 0.0);
  const Eigen::VectorXd id = normal_vector(3, rng);
  const Eigen::VectorXd attr = normal_vector(3, rng);
  const Eigen::VectorXd diff = generate(w0, 2 * id, attr, rng) -
                               generate(w0, id, attr, rng);
  CHECK((diff - w0.A * id).cwiseAbs().maxCoeff() < 1e-12);
  CHECK_THROWS_AS(generate(w0, Eigen::VectorXd::Zero(4), attr, rng),
                  std::invalid_argument);

  // sigma = 0.1 adds variance 0.01 per coordinate
  const WorldModel wn = make_world(3, 3, 9, rho1(0.5), 0.1, rng);
  const int n = 20000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(9);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(9);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd out = generate(wn, id, attr, rng);
    mean += out;
    sq += out.cwiseProduct(out);
  }
  mean /= n;
  const Eigen::VectorXd var = sq / n - mean.cwiseProduct(mean);
  CHECK(std::abs(var.mean() - 0.01) < 3.0 * 0.01 * std::sqrt(2.0 / n) +
                                          1e-4 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("oracle embedding is 1-Lipschitz with unit spectral norm") {
  RngEngine rng = make_engine(39);
  const WorldModel w = make_world(4, 4, 12, rho1(0.5), 0.05, rng);
  const Oracle oracle = make_oracle(w, 3, rng, 2000);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(oracle.W);
  CHECK(svd.singularValues()(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(oracle.lipschitz == 1.0);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::VectorXd x = normal_vector(12, rng);
    const Eigen::VectorXd y = normal_vector(12, rng);
    CHECK((oracle.W * (x - y)).norm() <= (x - y).norm() + 1e-12);
  }
}

TEST_CASE("identical generations embed identically at zero noise") {
  RngEngine rng = make_engine(40);
  const WorldModel w = make_world(4, 4, 12, rho1(0.5), 0.0, rng);
  const Oracle oracle = make_oracle(w, 4, rng, 1000);
  const Eigen::VectorXd id = normal_vector(4, rng);
  const Eigen::VectorXd attr = normal_vector(4, rng);
  const Eigen::VectorXd a = generate(w, id, attr, rng);
  const Eigen::VectorXd b = generate(w, id, attr, rng);
  CHECK(cosine_sim(embed(oracle, a), embed(oracle, b)) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("impostor statistics center near zero") {
  RngEngine rng = make_engine(41);
  const WorldModel w = make_world(64, 32, 128, rho1(0.3), 0.05, rng);
  const Oracle oracle = make_oracle(w, 64, rng, 10000);
  CHECK(std::abs(oracle.impostor_mean) < 0.02);
  CHECK(oracle.impostor_sd > 0.0);
  CHECK(oracle.theta > oracle.impostor_mean);
}

TEST_CASE("genuine pairs dominate impostor pairs in similarity") {
  RngEngine rng = make_engine(42);
  const WorldModel w = make_world(6, 6, 16, rho1(0.5), 0.3, rng);
  const Oracle oracle = make_oracle(w, 6, rng, 2000);
  const std::vector<double> genuine = genuine_sims(w, oracle, 1500, rng);
  const std::vector<double> impostor = impostor_sims(w, oracle, 1500, rng);
  CHECK(testsupport::mann_whitney_p_greater(genuine, impostor) < 0.01);
}

TEST_CASE("closed-form leakage vanishes without coupling") {
  RngEngine rng = make_engine(43);
  const WorldModel indep = make_world(3, 3, 8, rho1(0.0), 0.05, rng);
  CHECK(closed_form_leakage(indep) <= 1e-9);

  WorldModel severed = make_world(3, 3, 8, rho1(0.7), 0.05, rng);
  severed.B.setZero();
  finalize_world(severed);
  CHECK(closed_form_leakage(severed) <= 1e-9);
}

TEST_CASE("leakage stays below the disentanglement residual") {
  RngEngine rng = make_engine(44);
  const WorldModel w = make_world(3, 3, 8, rho1(0.7), 0.05, rng);
  const double leak = closed_form_leakage(w);
  const double eps = epsilon_dis(w);
  CHECK(eps == doctest::Approx(-0.5 * std::log1p(-0.49)).epsilon(1e-12));
  CHECK(leak <= eps + 1e-9);
  CHECK(eps - leak > 0.0);  // strictly positive margin at sigma > 0

  for (int i = 0; i < 10; ++i) {
    std::uniform_real_distribution<double> u(0.0, 0.95);
    const WorldModel random_world =
        make_world(2 + i % 3, 2 + (i + 1) % 3, 10, rho1(u(rng)), 0.05, rng);
    CHECK(closed_form_leakage(random_world) <=
          epsilon_dis(random_world) + 1e-9);
  }
}

TEST_CASE("noiseless overcomplete output covariance is flagged degenerate") {
  RngEngine rng = make_engine(45);
  CHECK_THROWS_AS(
      [&] {
        const WorldModel w = make_world(2, 2, 8, rho1(0.5), 0.0, rng);
        return closed_form_leakage(w);
      }(),
      DegenerateCovarianceError);
}

TEST_CASE("post-processing never increases leakage") {
  RngEngine rng = make_engine(46);
  const WorldModel w = make_world(3, 3, 10, rho1(0.8), 0.05, rng);
  const double base = closed_form_leakage(w);
  for (int t = 0; t < 20; ++t) {
    std::uniform_int_distribution<int> rows(1, 10);
    const Eigen::MatrixXd post = normal_matrix(rows(rng), 10, rng);
    CHECK(closed_form_leakage(w, post) <= base + 1e-9);
  }
}

TEST_CASE("world round-trips through serialization") {
  RngEngine rng = make_engine(47);
  WorldModel w = make_world(3, 4, 9, rho1(0.65), 0.07, rng, 99);
  w.attr_shape = AttrShape{2, 2, 1};
  const std::string path =
      (std::filesystem::temp_directory_path() / "anonkit_world_test.json")
          .string();
  save_world(w, path);
  const WorldModel loaded = load_world(path);
  CHECK(loaded.p == 3);
  CHECK(loaded.q == 4);
  CHECK(loaded.m == 9);
  CHECK(loaded.seed == 99);
  CHECK(loaded.attr_shape.has_value());
  CHECK(loaded.attr_shape->channels == 2);
  CHECK((loaded.A - w.A).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((loaded.B - w.B).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((loaded.cross - w.cross).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(epsilon_dis(loaded) == doctest::Approx(epsilon_dis(w)).epsilon(1e-12));
  CHECK(closed_form_leakage(loaded) ==
        doctest::Approx(closed_form_leakage(w)).epsilon(1e-12));
  std::remove(path.c_str());
}
