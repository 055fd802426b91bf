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
#ifndef ANONKIT_ESTIMATORS_HPP_
#define ANONKIT_ESTIMATORS_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

namespace anonkit {

enum class MiMethod { kGaussianClosedForm, kKsg, kMine };

struct MiEstimate {
  double value = 0.0;  // nats
  MiMethod method = MiMethod::kGaussianClosedForm;
  int n_samples = 0;
  int k = 0;                // neighbor count, KSG only
  bool saturated = false;   // estimate pinned at the estimator's ceiling
};

// Exact Gaussian mutual information from covariance blocks:
// 1/2 * ln(det(Sxx) det(Syy) / det(joint)).
MiEstimate gaussian_mi(const Eigen::MatrixXd& cov_xx,
                       const Eigen::MatrixXd& cov_yy,
                       const Eigen::MatrixXd& cov_xy);

// Kraskov-Stoegbauer-Grassberger estimator (variant 1) with max-norm
// neighborhoods. Rows of x and y are paired samples. Ties are broken by a
// deterministic jitter at 1e-10 scale before neighbor counting.
MiEstimate ksg_mi(const Eigen::MatrixXd& x_samples,
                  const Eigen::MatrixXd& y_samples, int k = 3);

// Digamma function, accurate to ~1e-12 for positive arguments.
double digamma(double x);

// Mutual information gap over discrete factors. Latent columns are quantized
// by 16-bin quantile binning; factors with zero entropy are skipped (their
// indices are reported through skipped_factors when non-null).
double mig_score(const Eigen::MatrixXd& latents,
                 const Eigen::MatrixXi& factors,
                 std::vector<int>* skipped_factors = nullptr);

// Disentanglement score from per-factor ridge regressions: one importance row
// per factor (absolute standardized coefficients over latents), score
// 1 - mean row entropy with log base = number of factors.
double dci_disentanglement(const Eigen::MatrixXd& latents,
                           const Eigen::MatrixXd& factors, double ridge = 1e-3);

struct DisentanglementScores {
  double mig = 0.0;
  double dci = 0.0;
  std::vector<int> skipped_factors;
};

// sqrt(epsilon / 2): the Pinsker bound on total variation from a KL bound.
double pinsker_bound(double epsilon);

// Cell probabilities of a standard bivariate Gaussian with correlation rho on
// a bins x bins grid (row-major), tails folded into the edge cells and the
// result normalized to sum to one.
std::vector<double> discretized_gaussian_joint(double rho, int bins);

// Product of the marginals of a row-major joint table.
std::vector<double> marginal_product(const std::vector<double>& joint, int bins);

// 1/2 * sum |p_i - q_i| over two distributions of equal length.
double tv_distance_discrete(const std::vector<double>& p,
                            const std::vector<double>& q);

}  // namespace anonkit

#endif  // ANONKIT_ESTIMATORS_HPP_
