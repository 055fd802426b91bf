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
#include "anonkit/core_geometry.hpp"

#include <doctest.h>

#include <cmath>

using namespace anonkit;

TEST_CASE("sample_unit_vector returns unit norm in every dimension") {
  RngEngine rng = make_engine(1);
  for (Eigen::Index d : {1, 2, 7, 512}) {
    const Eigen::VectorXd z = sample_unit_vector(d, rng);
    REQUIRE(z.size() == d);
    CHECK(std::abs(z.norm() - 1.0) < 1e-9);
  }
  CHECK_THROWS_AS(sample_unit_vector(0, rng), std::invalid_argument);
}

TEST_CASE("sample_unit_vector in one dimension is a fair sign") {
  RngEngine rng = make_engine(2);
  int plus = 0;
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    const double v = sample_unit_vector(1, rng)[0];
    CHECK((v == 1.0 || v == -1.0));
    if (v > 0) ++plus;
  }
  CHECK(plus > n / 2 - 60);
  CHECK(plus < n / 2 + 60);
}

TEST_CASE("cosine variance against a fixed direction matches 1/d") {
  // Exact first-coordinate variance of a uniform sphere point is 1/d; the
  // Monte Carlo estimate must agree within three standard errors, where
  // Var(T^2) = 3/(d(d+2)) - 1/d^2.
  const Eigen::Index d = 512;
  const int n = 100000;
  RngEngine rng = make_engine(3);
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = sample_unit_vector(d, rng)[0];  // cos against e1
    sum += c;
    sum_sq += c * c;
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  const double truth = 1.0 / static_cast<double>(d);
  const double var_of_t2 =
      3.0 / (static_cast<double>(d) * (d + 2.0)) - truth * truth;
  const double se = std::sqrt(var_of_t2 / n);
  CHECK(std::abs(var - truth) <= 3.0 * se);
}

TEST_CASE("cosine_sim identities and error paths") {
  RngEngine rng = make_engine(4);
  const Eigen::VectorXd u = sample_unit_vector(16, rng);
  CHECK(cosine_sim(u, u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine_sim(u, Eigen::VectorXd(-u)) == doctest::Approx(-1.0).epsilon(1e-12));
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(4), e2 = Eigen::VectorXd::Zero(4);
  e1[0] = 1.0;
  e2[1] = 1.0;
  CHECK(cosine_sim(e1, e2) == 0.0);
  // scaling leaves the value inside [-1, 1]
  CHECK(cosine_sim(Eigen::VectorXd(3.0 * u), Eigen::VectorXd(0.2 * u)) <= 1.0);
  CHECK_THROWS_AS(cosine_sim(Eigen::VectorXd::Zero(4), e1), std::invalid_argument);
  CHECK_THROWS_AS(cosine_sim(e1, Eigen::VectorXd::Zero(7)), std::invalid_argument);
}

TEST_CASE("subgaussian_tail_bound reference values") {
  // exp(-511 * 0.09 / 2) = exp(-22.995)
  const double v = subgaussian_tail_bound<double>(512, 0.3);
  CHECK(v > 1.0e-10);
  CHECK(v < 1.1e-10);
  CHECK(subgaussian_tail_bound<double>(2, 1e-9) == doctest::Approx(1.0));
  CHECK(subgaussian_tail_bound<double>(2, 0.5) ==
        doctest::Approx(0.8824969).epsilon(1e-6));
  CHECK_THROWS_AS(subgaussian_tail_bound<double>(1, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(subgaussian_tail_bound<double>(8, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(subgaussian_tail_bound<double>(8, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(subgaussian_tail_bound<double>(8, -0.2), std::invalid_argument);
}

TEST_CASE("exact_cos_cdf closed forms") {
  for (Eigen::Index d : {2, 3, 8, 512})
    CHECK(exact_cos_cdf(d, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  // density is uniform on [-1, 1] at d = 3
  CHECK(exact_cos_cdf(3, 0.4) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(exact_cos_cdf(3, -0.6) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(exact_cos_cdf(7, -1.0) == 0.0);
  CHECK(exact_cos_cdf(7, 1.0) == 1.0);
  // arcsine law at d = 2
  CHECK(exact_cos_cdf(2, 0.5) == doctest::Approx(1.0 - std::acos(0.5) / M_PI).epsilon(1e-10));
  CHECK(exact_cos_cdf(512, 0.3) >= 1.0 - 1.03e-10);
  CHECK_THROWS_AS(exact_cos_cdf(1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(exact_cos_cdf(4, 1.5), std::invalid_argument);
}

TEST_CASE("exact_cos_cdf is monotone and dominated by the tail bound") {
  for (Eigen::Index d : {2, 3, 4, 8, 32, 128, 512}) {
    double prev = 0.0;
    for (double t = -1.0; t <= 1.0001; t += 0.05) {
      const double c = exact_cos_cdf(d, std::min(t, 1.0));
      CHECK(c >= prev - 1e-12);
      prev = c;
    }
    for (double tau = 0.05; tau < 0.96; tau += 0.1) {
      const double exact_tail = 1.0 - exact_cos_cdf(d, tau);
      CHECK(exact_tail <= subgaussian_tail_bound<double>(d, tau) + 1e-12);
    }
  }
}

TEST_CASE("regularized incomplete beta symmetry") {
  for (double a : {0.5, 1.0, 5.5, 255.5})
    for (double x : {0.05, 0.3, 0.5, 0.9})
      CHECK(regularized_incomplete_beta(a, a, x) +
                regularized_incomplete_beta(a, a, 1.0 - x) ==
            doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("binary_entropy reference values and shape") {
  CHECK(binary_entropy(0.5, LogBase::kTwo) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(binary_entropy(0.0, LogBase::kTwo) == 0.0);
  CHECK(binary_entropy(1.0, LogBase::kNatural) == 0.0);
  // H2(Bernoulli(1.03e-10)): about 3.6e-9 bits
  const double h = binary_entropy(1.03e-10, LogBase::kTwo);
  CHECK(h > 3.4e-9);
  CHECK(h < 3.8e-9);
  // symmetry and concavity on a grid
  double prev = -1.0;
  for (double p = 0.05; p <= 0.5; p += 0.05) {
    CHECK(binary_entropy(p) == doctest::Approx(binary_entropy(1.0 - p)).epsilon(1e-12));
    CHECK(binary_entropy(p) > prev);
    prev = binary_entropy(p);
    const double mid = binary_entropy(p) / 2 + binary_entropy(p + 0.2) / 2;
    CHECK(binary_entropy(p + 0.1) >= mid - 1e-12);
  }
  CHECK_THROWS_AS(binary_entropy(1.2), std::invalid_argument);
  CHECK_THROWS_AS(binary_entropy(-0.1), std::invalid_argument);
}
