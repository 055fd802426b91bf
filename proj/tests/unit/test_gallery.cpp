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
#include "anonkit/gallery.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "anonkit/core_geometry.hpp"
#include "anonkit/csv.hpp"
#include "../support/stats.hpp"

using namespace anonkit;

namespace {

Gallery random_gallery(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
  RngEngine rng = make_engine(seed);
  Eigen::MatrixXd codes(d, n);
  for (Eigen::Index j = 0; j < n; ++j) codes.col(j) = sample_unit_vector(d, rng);
  return build_gallery(codes);
}

}  // namespace

TEST_CASE("build_gallery normalizes and validates") {
  std::vector<Eigen::VectorXd> codes;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
    e[i] = 2.5;  // normalization brings it back to a basis vector
    codes.push_back(e);
  }
  const Gallery g = build_gallery(codes, {0, 1, 2});
  CHECK(g.size() == 3);
  for (int j = 0; j < 3; ++j)
    CHECK(g.codes.col(j).norm() == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<Eigen::VectorXd> mixed = codes;
  mixed.push_back(Eigen::VectorXd::Ones(4));
  CHECK_THROWS_AS(build_gallery(mixed, {0, 1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(build_gallery(std::vector<Eigen::VectorXd>{}, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_gallery(codes, {0, 1}), std::invalid_argument);
}

TEST_CASE("random high-dimensional gallery concentrates near orthogonality") {
  const Gallery g = random_gallery(512, 1000, 11);
  const Eigen::MatrixXd sims = g.codes.transpose() * g.codes;
  std::vector<double> offdiag;
  offdiag.reserve(1000 * 999 / 2);
  for (Eigen::Index i = 0; i < 1000; ++i)
    for (Eigen::Index j = i + 1; j < 1000; ++j)
      offdiag.push_back(std::abs(sims(i, j)));
  std::sort(offdiag.begin(), offdiag.end());
  const double p95 = offdiag[static_cast<std::size_t>(0.95 * offdiag.size())];
  CHECK(p95 < 0.09);  // 1.96 / sqrt(512) = 0.0866
}

TEST_CASE("calibrate_tau formula and equivariance") {
  CHECK(calibrate_tau({0.25, 0.25, 0.25}) == doctest::Approx(0.25));
  // mean 0.2, sample sd 0.1
  CHECK(calibrate_tau({0.1, 0.2, 0.3}) == doctest::Approx(0.0).epsilon(1e-12));
  const std::vector<double> sims{0.05, -0.1, 0.2, 0.03, -0.07};
  const double base = calibrate_tau(sims);
  std::vector<double> shifted = sims;
  for (double& s : shifted) s += 0.37;
  CHECK(calibrate_tau(shifted) == doctest::Approx(base + 0.37).epsilon(1e-12));
  CHECK_THROWS_AS(calibrate_tau({0.1}), std::invalid_argument);
}

TEST_CASE("calibrate_tau on simulated impostors at d = 512") {
  // First sphere coordinate has sd exactly 1/sqrt(512) = 0.04419, so the
  // calibrated threshold sits near -0.0884.
  RngEngine rng = make_engine(12);
  std::vector<double> sims;
  sims.reserve(100000);
  for (int i = 0; i < 100000; ++i) sims.push_back(sample_unit_vector(512, rng)[0]);
  const double tau = calibrate_tau(sims);
  CHECK(tau == doctest::Approx(-2.0 / std::sqrt(512.0)).epsilon(0.025));
  CHECK(std::abs(tau + 0.088) < 0.002);
}

TEST_CASE("manifold_distance reference geometry") {
  std::vector<Eigen::VectorXd> basis;
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
    e[i] = 1.0;
    basis.push_back(e);
  }
  const Gallery g = build_gallery(basis, {0, 1, 2});
  CHECK(manifold_distance(basis[0], g, 1) == doctest::Approx(0.0));
  CHECK(manifold_distance(basis[0], g, 2) ==
        doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(manifold_distance(basis[0], g, 4), std::invalid_argument);
  CHECK_THROWS_AS(manifold_distance(Eigen::VectorXd::Ones(5), g, 1),
                  std::invalid_argument);
}

TEST_CASE("manifold_distance is permutation invariant") {
  const Gallery g = random_gallery(16, 50, 13);
  RngEngine rng = make_engine(14);
  const Eigen::VectorXd z = sample_unit_vector(16, rng);
  const double base = manifold_distance(z, g, 5);
  Eigen::MatrixXd shuffled = g.codes;
  std::vector<Eigen::Index> perm(50);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (Eigen::Index j = 0; j < 50; ++j) shuffled.col(j) = g.codes.col(perm[j]);
  const Gallery g2 = build_gallery(shuffled);
  CHECK(manifold_distance(z, g2, 5) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("manifold_distance of a random probe matches the order-statistics oracle") {
  // Near-orthogonality puts gallery codes at distance ~sqrt(2); the mean over
  // the five nearest of 1000 sits a few percent below it. The oracle is an
  // independent Monte Carlo over fresh cosine draws.
  RngEngine rng = make_engine(15);
  std::vector<double> oracle;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> cosines(1000);
    for (double& c : cosines) c = sample_unit_vector(512, rng)[0];
    std::sort(cosines.begin(), cosines.end());
    double mean_dist = 0.0;
    for (int i = 0; i < 5; ++i)
      mean_dist += std::sqrt(2.0 - 2.0 * cosines[999 - static_cast<std::size_t>(i)]);
    oracle.push_back(mean_dist / 5.0);
  }
  const double oracle_mean = testsupport::mean_of(oracle);
  const double oracle_sd = testsupport::sd_of(oracle);

  const Gallery g = random_gallery(512, 1000, 16);
  const Eigen::VectorXd z = sample_unit_vector(512, rng);
  const double observed = manifold_distance(z, g, 5);
  CHECK(std::abs(observed - oracle_mean) <= 4.0 * oracle_sd);
  // coarse envelope: within eight percent of sqrt(2)
  CHECK(observed > 0.92 * std::sqrt(2.0));
  CHECK(observed < 1.02 * std::sqrt(2.0));
}

TEST_CASE("calibrate_delta admits the gallery's own codes") {
  const Gallery g = random_gallery(64, 200, 17);
  const double delta = calibrate_delta(g, 5);
  CHECK(delta > 0.0);
  int within = 0;
  for (Eigen::Index j = 0; j < g.size(); ++j)
    if (manifold_distance(g.codes.col(j), g, 5) <= delta) ++within;
  CHECK(within == g.size());  // self-distance zero always helps
}

TEST_CASE("reject_sample honors both acceptance conditions") {
  const Gallery g = random_gallery(64, 300, 18);
  SamplerConfig cfg;
  cfg.tau = 0.3;
  cfg.delta = calibrate_delta(g, cfg.k_nn);
  RngEngine rng = make_engine(19);
  for (int t = 0; t < 200; ++t) {
    const Eigen::VectorXd z = sample_unit_vector(64, rng);
    const SampleOutcome out = reject_sample(z, g, cfg, rng);
    CHECK(out.accepted_sim < cfg.tau);
    CHECK(cosine_sim(z, out.replacement) == doctest::Approx(out.accepted_sim));
    CHECK(manifold_distance(out.replacement, g, cfg.k_nn) <= cfg.delta);
    CHECK(out.attempts >= 1);
    CHECK(out.attempts <= cfg.max_attempts);
    CHECK(out.gallery_index >= 0);
    CHECK(out.replacement.isApprox(g.codes.col(out.gallery_index)));
  }
}

TEST_CASE("reject_sample exhausts on infeasible configurations") {
  RngEngine rng = make_engine(20);
  const Eigen::VectorXd z = sample_unit_vector(32, rng);
  // sole candidate is the query itself
  Eigen::MatrixXd one(32, 1);
  one.col(0) = z;
  const Gallery self = build_gallery(one);
  SamplerConfig cfg;
  cfg.tau = 0.3;
  cfg.delta = 10.0;
  cfg.k_nn = 1;
  CHECK_THROWS_AS(reject_sample(z, self, cfg, rng), SamplingExhaustedError);

  const Gallery g = random_gallery(32, 100, 21);
  SamplerConfig impossible;
  impossible.tau = -0.999;
  impossible.delta = 10.0;
  CHECK_THROWS_AS(reject_sample(z, g, impossible, rng), SamplingExhaustedError);
}

TEST_CASE("paper operating point accepts nearly always on the first draw") {
  const Gallery g = random_gallery(512, 1000, 22);
  SamplerConfig cfg;
  cfg.tau = 0.3;
  cfg.delta = 2.0;
  RngEngine rng = make_engine(23);
  int first = 0;
  const int trials = 3000;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd z = sample_unit_vector(512, rng);
    if (reject_sample(z, g, cfg, rng).attempts == 1) ++first;
  }
  CHECK(static_cast<double>(first) / trials >= 0.98);
}

TEST_CASE("accepted replacement is independent of the query identity") {
  // One-bit leakage: with first-draw acceptance for two distinct queries, the
  // replacement frequencies over gallery codes must be indistinguishable.
  const Gallery g = random_gallery(16, 32, 24);
  SamplerConfig cfg;
  cfg.tau = 0.9;  // essentially every candidate is distinct enough
  cfg.delta = 10.0;
  RngEngine rng = make_engine(25);
  const Eigen::VectorXd za = sample_unit_vector(16, rng);
  const Eigen::VectorXd zb = sample_unit_vector(16, rng);
  std::vector<long> freq_a(32, 0), freq_b(32, 0);
  for (int t = 0; t < 20000; ++t) {
    ++freq_a[static_cast<std::size_t>(reject_sample(za, g, cfg, rng).gallery_index)];
    ++freq_b[static_cast<std::size_t>(reject_sample(zb, g, cfg, rng).gallery_index)];
  }
  CHECK(testsupport::chi_square_homogeneity_p(freq_a, freq_b) > 0.01);
}

TEST_CASE("expected_steps_bound arithmetic and domain") {
  CHECK(expected_steps_bound(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(expected_steps_bound(0.5, 1.0) == doctest::Approx(2.0));
  CHECK(expected_steps_bound(0.5, 0.5) == doctest::Approx(4.0));
  CHECK_THROWS_AS(expected_steps_bound(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(expected_steps_bound(1.0, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(expected_steps_bound(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("empirical attempts follow the geometric law at half acceptance") {
  // At d = 4 the first-coordinate law is symmetric, so tau = 0 accepts about
  // half of all candidates and the attempt count is geometric with mean 2.
  const Gallery g = random_gallery(4, 1500, 26);
  SamplerConfig cfg;
  cfg.tau = 0.0;
  cfg.delta = 10.0;
  RngEngine rng = make_engine(27);
  const Eigen::VectorXd z = sample_unit_vector(4, rng);
  const AttemptsSummary s = empirical_attempts(z, g, cfg, 3000, rng);
  CHECK(std::abs(s.mean - 2.0) < 0.1);
  CHECK(s.max >= 3);

  const AttemptsSummary single = empirical_attempts(z, g, cfg, 1, rng);
  CHECK(single.histogram.size() == 1);
}

TEST_CASE("gallery round-trips through its line format") {
  const Gallery g = random_gallery(5, 7, 28);
  Gallery labeled = g;
  labeled.labels = {4, 2, 7, 1, 9, 3, 5};
  const std::string path =
      (std::filesystem::temp_directory_path() / "anonkit_gallery_test.csv")
          .string();
  save_gallery(labeled, path);
  const Gallery loaded = load_gallery(path);
  CHECK(loaded.dim() == 5);
  CHECK(loaded.size() == 7);
  CHECK((loaded.codes - labeled.codes).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(loaded.labels == labeled.labels);
  std::remove(path.c_str());

  CHECK_THROWS(load_gallery("/nonexistent/gallery.csv"));
}

TEST_CASE("sample matrices import from the gallery line format") {
  const Gallery g = random_gallery(4, 6, 29);
  const std::string path =
      (std::filesystem::temp_directory_path() / "anonkit_samples_test.csv")
          .string();
  save_gallery(g, path);
  const Eigen::MatrixXd samples = load_sample_matrix(path);
  CHECK(samples.rows() == 6);
  CHECK(samples.cols() == 4);
  CHECK((samples.transpose() - g.codes).cwiseAbs().maxCoeff() < 1e-14);
  std::remove(path.c_str());
}
