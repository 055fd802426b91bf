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
#include "anonkit/bounds.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "anonkit/core_geometry.hpp"

using namespace anonkit;

namespace {

Eigen::VectorXd rho1(double v) {
  Eigen::VectorXd rho(1);
  rho << v;
  return rho;
}

Gallery random_gallery(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
  RngEngine rng = make_engine(seed);
  Eigen::MatrixXd codes(d, n);
  for (Eigen::Index j = 0; j < n; ++j) codes.col(j) = sample_unit_vector(d, rng);
  return build_gallery(codes);
}

}  // namespace

TEST_CASE("lemma 1 verifies across regimes") {
  const BoundReport high = verify_lemma1(512, 0.3, 20000, 201);
  CHECK(high.passed);
  CHECK(high.lhs == 0.0);  // bound 1e-10: no rejection is ever observed
  CHECK(high.rhs > 1.0e-10);
  CHECK(high.rhs < 1.1e-10);

  const BoundReport small_d = verify_lemma1(4, 0.9, 5000, 202);
  CHECK(small_d.passed);
  CHECK(small_d.rhs == doctest::Approx(std::exp(-1.215)).epsilon(1e-9));
  // empirical rejection matches the exact spherical cap mass
  const double exact_tail = 1.0 - exact_cos_cdf(4, 0.9);
  CHECK(std::abs(small_d.lhs - exact_tail) <=
        3.0 * std::sqrt(exact_tail * (1 - exact_tail) / 5000.0) + 1e-3);

  const BoundReport vacuous = verify_lemma1(2, 0.1, 10000, 203);
  CHECK(vacuous.passed);
  CHECK(vacuous.rhs == doctest::Approx(std::exp(-0.005)).epsilon(1e-9));
  CHECK(vacuous.margin > 0.0);

  CHECK_THROWS_AS(verify_lemma1(8, 0.3, 10, 204), std::invalid_argument);
}

TEST_CASE("proposition 1 bound holds at the paper operating point") {
  const Gallery g = random_gallery(512, 1000, 205);
  SamplerConfig cfg;
  cfg.tau = 0.3;
  cfg.delta = 2.0;
  const BoundReport r = verify_prop1(g, cfg, 2000, 206);
  CHECK(r.passed);
  CHECK(r.lhs == doctest::Approx(1.0).epsilon(0.01));
  CHECK(r.rhs >= 1.0);
  CHECK(r.rhs < 1.05);
}

TEST_CASE("proposition 1 bound holds at half acceptance") {
  const Gallery g = random_gallery(4, 1200, 207);
  SamplerConfig cfg;
  cfg.tau = 0.0;  // symmetric law: acceptance one half
  cfg.delta = 10.0;
  const BoundReport r = verify_prop1(g, cfg, 3000, 208);
  CHECK(r.passed);
  CHECK(r.lhs == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("proposition 1 reports exhaustion as failure") {
  const Gallery g = random_gallery(16, 100, 209);
  SamplerConfig cfg;
  cfg.tau = -0.999;
  cfg.delta = 10.0;
  const BoundReport r = verify_prop1(g, cfg, 50, 210);
  CHECK_FALSE(r.passed);
  CHECK(r.notes.find("infeasible") != std::string::npos);
}

TEST_CASE("theorem 1 margins are nonnegative with agreeing estimators") {
  RngEngine rng = make_engine(211);
  const WorldModel indep = make_world(2, 2, 6, rho1(0.0), 0.05, rng);
  const BoundReport zero = verify_theorem1(indep, 0, 212);
  CHECK(zero.passed);
  CHECK(zero.lhs <= 1e-9);
  CHECK(zero.rhs == 0.0);

  const WorldModel coupled = make_world(2, 2, 6, rho1(0.7), 0.05, rng);
  const BoundReport r = verify_theorem1(coupled, 4000, 213);
  CHECK(r.passed);
  CHECK(r.margin >= 0.0);
  CHECK(r.notes.find("agree") != std::string::npos);

  for (int i = 0; i < 20; ++i) {
    std::uniform_real_distribution<double> u(0.0, 0.9);
    const WorldModel w = make_world(2, 3, 7, rho1(u(rng)), 0.05, rng);
    CHECK(verify_theorem1(w, 0, 214 + static_cast<std::uint64_t>(i)).passed);
  }
}

TEST_CASE("remark 1 reports the rejection information honestly") {
  const BoundReport paper_point = verify_remark1(512, 0.3);
  CHECK(paper_point.passed);
  CHECK(paper_point.rhs > 3.4e-9);
  CHECK(paper_point.rhs < 3.8e-9);
  CHECK(paper_point.lhs <= paper_point.rhs);
  CHECK(paper_point.notes.find("exceeds the quoted 1e-9 bits") !=
        std::string::npos);

  // rejection becomes impossible as tau approaches one
  const BoundReport tight = verify_remark1(512, 0.999);
  CHECK(tight.passed);
  CHECK(tight.rhs < 1e-60);

  // a vacuous bound caps at the one-bit ceiling but the hand value of
  // H2(Bern(0.8825)) = 0.52 bits is recorded
  const BoundReport vacuous = verify_remark1(2, 0.5);
  CHECK(vacuous.passed);
  CHECK(vacuous.rhs == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(binary_entropy(subgaussian_tail_bound<double>(2, 0.5), LogBase::kTwo) ==
        doctest::Approx(0.5224).epsilon(1e-3));
  CHECK(vacuous.notes.find("0.52") != std::string::npos);
}

TEST_CASE("theorem 2 is exact without noise and robust with it") {
  RngEngine rng = make_engine(215);
  const WorldModel clean = make_world(3, 3, 9, rho1(0.5), 0.0, rng);
  const BoundReport exact = verify_theorem2(clean, 200, 216);
  CHECK(exact.passed);
  CHECK(exact.lhs < 1e-12);
  CHECK(exact.rhs < 1e-12);

  // a perfect linear encoder reproduces the exact case
  LinearEncoder enc;
  enc.e_id = clean.A.transpose();
  enc.e_attr = clean.B.transpose();
  const BoundReport with_encoder = verify_theorem2(clean, 200, 217, &enc);
  CHECK(with_encoder.passed);
  CHECK(with_encoder.lhs < 1e-9);

  const WorldModel noisy = make_world(3, 3, 9, rho1(0.5), 0.05, rng);
  const BoundReport r = verify_theorem2(noisy, 1000, 218);
  CHECK(r.passed);
  CHECK(r.margin > 0.0);
  CHECK(r.notes.find("triangle_violations=0") != std::string::npos);
}

TEST_CASE("theorem 3 composes the privacy and utility bounds") {
  RngEngine rng = make_engine(219);
  // noiseless square frame keeps the output covariance invertible
  const WorldModel clean = make_world(3, 3, 6, rho1(0.0), 0.0, rng);
  TradeoffParams params;
  const BoundReport zero = verify_theorem3(clean, params, 200, 220);
  CHECK(zero.passed);
  CHECK(zero.lhs == doctest::Approx(0.0));
  CHECK(zero.rhs == doctest::Approx(0.0));

  const WorldModel w = make_world(3, 3, 9, rho1(0.6), 0.05, rng);
  for (double lambda : {0.1, 1.0, 10.0}) {
    TradeoffParams p;
    p.lambda = lambda;
    const BoundReport r = verify_theorem3(w, p, 500, 221);
    CHECK(r.passed);
  }
  TradeoffParams bad;
  bad.lambda = 0.0;
  CHECK_THROWS_AS(verify_theorem3(w, bad, 100, 222), std::invalid_argument);
}

TEST_CASE("proposition 2 holds for decoupled and coupled worlds") {
  RngEngine rng = make_engine(223);
  const WorldModel indep = make_world(4, 4, 12, rho1(0.0), 0.05, rng);
  std::vector<Oracle> oracles;
  for (int j = 0; j < 3; ++j) oracles.push_back(make_oracle(indep, 4, rng, 2000));
  const BoundReport floor = verify_prop2(indep, oracles, 2000, 224);
  CHECK(floor.passed);
  CHECK(std::abs(floor.lhs - oracles[0].impostor_mean) < 0.1);

  const WorldModel coupled = make_world(4, 4, 12, rho1(0.9), 0.05, rng);
  std::vector<Oracle> strong;
  for (int j = 0; j < 3; ++j)
    strong.push_back(make_oracle(coupled, 4, rng, 2000));
  const BoundReport loose = verify_prop2(coupled, strong, 1500, 225);
  CHECK(loose.passed);
  // the bound inflates by sqrt(2 * 0.8304) = 1.2887 over the impostor mean
  CHECK(loose.rhs - strong.front().impostor_mean >= 1.28);
  CHECK(loose.notes.find("oracle2") != std::string::npos);

  CHECK_THROWS_AS(verify_prop2(coupled, {}, 100, 226), std::invalid_argument);
}

TEST_CASE("corollary 1 filters worlds by the target residual") {
  RngEngine rng = make_engine(227);
  std::vector<WorldModel> worlds;
  std::uniform_real_distribution<double> u(0.0, 0.95);
  for (int i = 0; i < 8; ++i)
    worlds.push_back(make_world(2, 2, 6, rho1(u(rng)), 0.05, rng));
  const BoundReport r = verify_corollary1(worlds, 0.1, 10, 228);
  CHECK(r.passed);
  CHECK(r.rhs == doctest::Approx(0.1));

  std::vector<WorldModel> decoupled;
  for (int i = 0; i < 3; ++i)
    decoupled.push_back(make_world(2, 2, 6, rho1(0.0), 0.05, rng));
  const BoundReport zero = verify_corollary1(decoupled, 0.0, 10, 229);
  CHECK(zero.passed);
  CHECK(zero.lhs <= 1e-9);
}

TEST_CASE("reports are reproducible bit for bit under the same seed") {
  const Gallery g = random_gallery(64, 200, 230);
  SamplerConfig cfg;
  cfg.tau = 0.3;
  cfg.delta = 2.0;
  const BoundReport a = verify_prop1(g, cfg, 500, 231);
  const BoundReport b = verify_prop1(g, cfg, 500, 231);
  CHECK(a.lhs == b.lhs);
  CHECK(a.rhs == b.rhs);
  CHECK(a.margin == b.margin);
  CHECK(a.notes == b.notes);
}

TEST_CASE("report CSV emission carries the contract columns") {
  std::vector<BoundReport> reports;
  reports.push_back(make_report("alpha", 1.0, 2.0, 0.0, 10, 7));
  reports.push_back(make_report("beta", 3.0, 2.5, 0.1, 20, 8));
  CHECK(reports[0].passed);
  CHECK_FALSE(reports[1].passed);
  CHECK(reports[1].margin == doctest::Approx(-0.5));

  const std::string path =
      (std::filesystem::temp_directory_path() / "anonkit_bounds_test.csv")
          .string();
  save_reports(reports, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "name,lhs,rhs,margin,passed,n_trials,seed");
  std::string row;
  std::getline(in, row);
  CHECK(row.find("alpha") == 0);
  CHECK(row.find(",1,") != std::string::npos);
  std::remove(path.c_str());
}
