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

#include <cmath>
#include <limits>
#include <stdexcept>

namespace anonkit {
namespace {

// Continued fraction for I_x(a, b) (Lentz's method). Converges quickly for
// x < (a+1)/(a+b+2); the caller flips to the symmetric case otherwise.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  return h;  // converged to working precision long before kMaxIter in practice
}

}  // namespace

Eigen::VectorXd sample_unit_vector(Eigen::Index d, RngEngine& rng) {
  if (d < 1) throw std::invalid_argument("sample_unit_vector: d must be >= 1");
  Eigen::VectorXd v = normal_vector(d, rng);
  double n = v.norm();
  // A zero draw has probability zero; redraw rather than divide by zero.
  while (n == 0.0) {
    v = normal_vector(d, rng);
    n = v.norm();
  }
  return v / n;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::invalid_argument("regularized_incomplete_beta: a, b must be positive");
  if (!(x >= 0.0 && x <= 1.0))
    throw std::invalid_argument("regularized_incomplete_beta: x must lie in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;

  const double log_front = a * std::log(x) + b * std::log1p(-x) -
                           (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double exact_cos_cdf(Eigen::Index d, double t) {
  if (d < 2) throw std::invalid_argument("exact_cos_cdf: d must be >= 2");
  if (!(t >= -1.0 && t <= 1.0))
    throw std::invalid_argument("exact_cos_cdf: t must lie in [-1, 1]");
  if (t == -1.0) return 0.0;
  if (t == 1.0) return 1.0;
  const double a = 0.5 * static_cast<double>(d - 1);
  return regularized_incomplete_beta(a, a, 0.5 * (t + 1.0));
}

}  // namespace anonkit
