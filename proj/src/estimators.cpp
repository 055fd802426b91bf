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
#include "anonkit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "anonkit/errors.hpp"
#include "anonkit/random.hpp"

namespace anonkit {
namespace {

double spd_logdet(const Eigen::MatrixXd& s, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success)
    throw DegenerateCovarianceError(std::string(what) +
                                    ": covariance is not positive definite");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

double chebyshev(const double* a, const double* b, Eigen::Index d) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double diff = std::abs(a[i] - b[i]);
    if (diff > m) m = diff;
  }
  return m;
}

double plugin_entropy(const std::vector<double>& probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

// Quantile codes in [0, bins): equal-count bin edges, ties collapse into a
// shared bin.
std::vector<int> quantile_codes(const Eigen::VectorXd& column, int bins) {
  const Eigen::Index n = column.size();
  std::vector<double> sorted(column.data(), column.data() + n);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  edges.reserve(static_cast<std::size_t>(bins - 1));
  for (int j = 1; j < bins; ++j)
    edges.push_back(sorted[static_cast<std::size_t>(
        static_cast<Eigen::Index>(j) * n / bins)]);
  std::vector<int> codes(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto it = std::upper_bound(edges.begin(), edges.end(), column[i]);
    codes[static_cast<std::size_t>(i)] = static_cast<int>(it - edges.begin());
  }
  return codes;
}

// Plug-in mutual information between two discrete code vectors.
double discrete_mi(const std::vector<int>& a, int a_levels,
                   const std::vector<int>& b, int b_levels) {
  const std::size_t n = a.size();
  std::vector<double> joint(static_cast<std::size_t>(a_levels) * b_levels, 0.0);
  std::vector<double> pa(static_cast<std::size_t>(a_levels), 0.0);
  std::vector<double> pb(static_cast<std::size_t>(b_levels), 0.0);
  const double w = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    joint[static_cast<std::size_t>(a[i]) * b_levels + b[i]] += w;
    pa[static_cast<std::size_t>(a[i])] += w;
    pb[static_cast<std::size_t>(b[i])] += w;
  }
  double mi = 0.0;
  for (int ia = 0; ia < a_levels; ++ia)
    for (int ib = 0; ib < b_levels; ++ib) {
      const double pj = joint[static_cast<std::size_t>(ia) * b_levels + ib];
      if (pj > 0.0)
        mi += pj * std::log(pj / (pa[static_cast<std::size_t>(ia)] *
                                  pb[static_cast<std::size_t>(ib)]));
    }
  return std::max(0.0, mi);
}

}  // namespace

MiEstimate gaussian_mi(const Eigen::MatrixXd& cov_xx,
                       const Eigen::MatrixXd& cov_yy,
                       const Eigen::MatrixXd& cov_xy) {
  const Eigen::Index dx = cov_xx.rows();
  const Eigen::Index dy = cov_yy.rows();
  if (cov_xx.cols() != dx || cov_yy.cols() != dy)
    throw std::invalid_argument("gaussian_mi: marginal blocks must be square");
  if (cov_xy.rows() != dx || cov_xy.cols() != dy)
    throw std::invalid_argument("gaussian_mi: cross block shape mismatch");

  Eigen::MatrixXd joint(dx + dy, dx + dy);
  joint.topLeftCorner(dx, dx) = cov_xx;
  joint.bottomRightCorner(dy, dy) = cov_yy;
  joint.topRightCorner(dx, dy) = cov_xy;
  joint.bottomLeftCorner(dy, dx) = cov_xy.transpose();

  const double ld_x = spd_logdet(cov_xx, "gaussian_mi");
  const double ld_y = spd_logdet(cov_yy, "gaussian_mi");
  const double ld_joint = spd_logdet(joint, "gaussian_mi");

  MiEstimate est;
  est.method = MiMethod::kGaussianClosedForm;
  est.value = std::max(0.0, 0.5 * (ld_x + ld_y - ld_joint));
  return est;
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("digamma: x must be positive");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  // Bernoulli series through x^-8; residual below 1e-12 for x >= 10.
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

MiEstimate ksg_mi(const Eigen::MatrixXd& x_samples,
                  const Eigen::MatrixXd& y_samples, int k) {
  const Eigen::Index n = x_samples.rows();
  if (y_samples.rows() != n)
    throw std::invalid_argument("ksg_mi: sample counts must match");
  if (k < 1) throw std::invalid_argument("ksg_mi: k must be >= 1");
  if (n < k + 1)
    throw std::invalid_argument("ksg_mi: need at least k+1 paired samples");
  if (!x_samples.allFinite() || !y_samples.allFinite())
    throw std::invalid_argument("ksg_mi: samples must be finite");

  const Eigen::Index dx = x_samples.cols();
  const Eigen::Index dy = y_samples.cols();

  // Points column-wise for cache locality, with deterministic tie jitter.
  Eigen::MatrixXd xt = x_samples.transpose();
  Eigen::MatrixXd yt = y_samples.transpose();
  {
    RngEngine jitter = make_engine(0x6b7366675f6a6974ULL);
    std::uniform_real_distribution<double> u(0.0, 1e-10);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < dx; ++i) xt(i, j) += u(jitter);
      for (Eigen::Index i = 0; i < dy; ++i) yt(i, j) += u(jitter);
    }
  }

  std::vector<double> dist_x(static_cast<std::size_t>(n));
  std::vector<double> dist_y(static_cast<std::size_t>(n));
  std::vector<double> dist_joint(static_cast<std::size_t>(n));
  double psi_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* xi = xt.col(i).data();
    const double* yi = yt.col(i).data();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double ex = chebyshev(xi, xt.col(j).data(), dx);
      const double ey = chebyshev(yi, yt.col(j).data(), dy);
      dist_x[static_cast<std::size_t>(j)] = ex;
      dist_y[static_cast<std::size_t>(j)] = ey;
      dist_joint[static_cast<std::size_t>(j)] = std::max(ex, ey);
    }
    dist_joint[static_cast<std::size_t>(i)] =
        std::numeric_limits<double>::infinity();
    std::vector<double> scratch = dist_joint;
    std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
    const double eps = scratch[static_cast<std::size_t>(k - 1)];

    int nx = 0, ny = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (dist_x[static_cast<std::size_t>(j)] < eps) ++nx;
      if (dist_y[static_cast<std::size_t>(j)] < eps) ++ny;
    }
    psi_sum += digamma(nx + 1.0) + digamma(ny + 1.0);
  }

  MiEstimate est;
  est.method = MiMethod::kKsg;
  est.n_samples = static_cast<int>(n);
  est.k = k;
  est.value = digamma(static_cast<double>(k)) +
              digamma(static_cast<double>(n)) -
              psi_sum / static_cast<double>(n);
  const double ceiling =
      digamma(static_cast<double>(n)) - digamma(static_cast<double>(k));
  est.saturated = est.value >= ceiling - 1.0;
  return est;
}

double mig_score(const Eigen::MatrixXd& latents, const Eigen::MatrixXi& factors,
                 std::vector<int>* skipped_factors) {
  constexpr int kBins = 16;
  const Eigen::Index n = latents.rows();
  const Eigen::Index n_latents = latents.cols();
  const Eigen::Index n_factors = factors.cols();
  if (factors.rows() != n)
    throw std::invalid_argument("mig_score: sample counts must match");
  if (n_latents < 2)
    throw std::invalid_argument("mig_score: need at least 2 latent dimensions");
  if (n_factors < 1)
    throw std::invalid_argument("mig_score: need at least one factor");

  std::vector<std::vector<int>> latent_codes;
  latent_codes.reserve(static_cast<std::size_t>(n_latents));
  for (Eigen::Index d = 0; d < n_latents; ++d)
    latent_codes.push_back(quantile_codes(latents.col(d), kBins));

  double total = 0.0;
  int used = 0;
  for (Eigen::Index f = 0; f < n_factors; ++f) {
    // Remap factor labels to a dense 0..L-1 range.
    std::vector<int> raw(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) raw[static_cast<std::size_t>(i)] = factors(i, f);
    std::vector<int> levels = raw;
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const int n_levels = static_cast<int>(levels.size());
    if (n_levels < 2) {
      if (skipped_factors) skipped_factors->push_back(static_cast<int>(f));
      continue;
    }
    std::vector<int> codes(static_cast<std::size_t>(n));
    std::vector<double> marginal(static_cast<std::size_t>(n_levels), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int code = static_cast<int>(
          std::lower_bound(levels.begin(), levels.end(),
                           raw[static_cast<std::size_t>(i)]) -
          levels.begin());
      codes[static_cast<std::size_t>(i)] = code;
      marginal[static_cast<std::size_t>(code)] += 1.0 / static_cast<double>(n);
    }
    const double h_factor = plugin_entropy(marginal);

    double best = 0.0, second = 0.0;
    for (Eigen::Index d = 0; d < n_latents; ++d) {
      const double mi = discrete_mi(latent_codes[static_cast<std::size_t>(d)],
                                    kBins, codes, n_levels);
      if (mi > best) {
        second = best;
        best = mi;
      } else if (mi > second) {
        second = mi;
      }
    }
    total += (best - second) / h_factor;
    ++used;
  }
  if (used == 0)
    throw std::invalid_argument("mig_score: all factors are constant");
  return total / used;
}

double dci_disentanglement(const Eigen::MatrixXd& latents,
                           const Eigen::MatrixXd& factors, double ridge) {
  const Eigen::Index n = latents.rows();
  const Eigen::Index n_latents = latents.cols();
  const Eigen::Index n_factors = factors.cols();
  if (factors.rows() != n)
    throw std::invalid_argument("dci_disentanglement: sample counts must match");
  if (n_latents < 1 || n_factors < 1)
    throw std::invalid_argument("dci_disentanglement: empty inputs");

  // Standardize latent columns; constant columns carry nothing and stay zero.
  Eigen::MatrixXd z = latents;
  for (Eigen::Index d = 0; d < n_latents; ++d) {
    const double mean = z.col(d).mean();
    z.col(d).array() -= mean;
    const double sd = std::sqrt(z.col(d).squaredNorm() / std::max<Eigen::Index>(1, n - 1));
    if (sd > 0.0)
      z.col(d) /= sd;
    else
      z.col(d).setZero();
  }

  const Eigen::MatrixXd gram =
      z.transpose() * z / static_cast<double>(n) +
      ridge * Eigen::MatrixXd::Identity(n_latents, n_latents);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw DegenerateCovarianceError("dci_disentanglement: ridge Gram matrix "
                                    "is not positive definite");

  // log base: number of factors, falling back to the latent count for a
  // single factor so the score remains normalized.
  const double base = n_factors >= 2 ? static_cast<double>(n_factors)
                                     : static_cast<double>(std::max<Eigen::Index>(2, n_latents));
  double entropy_sum = 0.0;
  for (Eigen::Index f = 0; f < n_factors; ++f) {
    Eigen::VectorXd y = factors.col(f);
    y.array() -= y.mean();
    const double sd = std::sqrt(y.squaredNorm() / std::max<Eigen::Index>(1, n - 1));
    if (sd > 0.0) y /= sd;
    const Eigen::VectorXd coef =
        llt.solve(z.transpose() * y / static_cast<double>(n));
    Eigen::VectorXd importance = coef.cwiseAbs();
    const double total = importance.sum();
    if (total > 0.0) {
      importance /= total;
    } else {
      importance.setConstant(1.0 / static_cast<double>(n_latents));
    }
    double h = 0.0;
    for (Eigen::Index d = 0; d < n_latents; ++d)
      if (importance[d] > 0.0) h -= importance[d] * std::log(importance[d]);
    entropy_sum += h / std::log(base);
  }
  const double score = 1.0 - entropy_sum / static_cast<double>(n_factors);
  return std::clamp(score, 0.0, 1.0);
}

double pinsker_bound(double epsilon) {
  if (epsilon < 0.0)
    throw std::invalid_argument("pinsker_bound: epsilon must be nonnegative");
  return std::sqrt(epsilon / 2.0);
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

}  // namespace

std::vector<double> discretized_gaussian_joint(double rho, int bins) {
  if (!(rho > -1.0 && rho < 1.0))
    throw std::invalid_argument("discretized_gaussian_joint: |rho| must be < 1");
  if (bins < 2)
    throw std::invalid_argument("discretized_gaussian_joint: bins must be >= 2");
  // Uniform grid over [-4, 4]; the outermost edges absorb the tails.
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int i = 0; i <= bins; ++i)
    edges[static_cast<std::size_t>(i)] = -4.0 + 8.0 * i / bins;
  edges.front() = -9.0;
  edges.back() = 9.0;

  const double s = std::sqrt(1.0 - rho * rho);
  std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
  // P[X in cell_i, Y in cell_j] via composite Simpson over x of
  // pdf(x) * (cdf((b - rho x)/s) - cdf((a - rho x)/s)).
  constexpr int kSteps = 64;  // per cell, even
  for (int i = 0; i < bins; ++i) {
    const double x0 = std::max(edges[static_cast<std::size_t>(i)], -9.0);
    const double x1 = std::min(edges[static_cast<std::size_t>(i) + 1], 9.0);
    const double h = (x1 - x0) / kSteps;
    for (int j = 0; j < bins; ++j) {
      const double a = edges[static_cast<std::size_t>(j)];
      const double b = edges[static_cast<std::size_t>(j) + 1];
      double acc = 0.0;
      for (int k = 0; k <= kSteps; ++k) {
        const double x = x0 + h * k;
        const double f =
            normal_pdf(x) *
            (normal_cdf((b - rho * x) / s) - normal_cdf((a - rho * x) / s));
        const double w = (k == 0 || k == kSteps) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += w * f;
      }
      joint[static_cast<std::size_t>(i) * bins + j] = acc * h / 3.0;
    }
  }
  double total = 0.0;
  for (double v : joint) total += v;
  for (double& v : joint) v /= total;
  return joint;
}

std::vector<double> marginal_product(const std::vector<double>& joint,
                                     int bins) {
  if (joint.size() != static_cast<std::size_t>(bins) * bins)
    throw std::invalid_argument("marginal_product: size mismatch");
  std::vector<double> px(static_cast<std::size_t>(bins), 0.0);
  std::vector<double> py(static_cast<std::size_t>(bins), 0.0);
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j) {
      px[static_cast<std::size_t>(i)] += joint[static_cast<std::size_t>(i) * bins + j];
      py[static_cast<std::size_t>(j)] += joint[static_cast<std::size_t>(i) * bins + j];
    }
  std::vector<double> product(static_cast<std::size_t>(bins) * bins);
  for (int i = 0; i < bins; ++i)
    for (int j = 0; j < bins; ++j)
      product[static_cast<std::size_t>(i) * bins + j] =
          px[static_cast<std::size_t>(i)] * py[static_cast<std::size_t>(j)];
  return product;
}

double tv_distance_discrete(const std::vector<double>& p,
                            const std::vector<double>& q) {
  if (p.size() != q.size())
    throw std::invalid_argument("tv_distance_discrete: length mismatch");
  double sp = 0.0, sq = 0.0;
  for (double v : p) sp += v;
  for (double v : q) sq += v;
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9)
    throw std::invalid_argument("tv_distance_discrete: inputs must sum to 1");
  double tv = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
  return 0.5 * tv;
}

}  // namespace anonkit
