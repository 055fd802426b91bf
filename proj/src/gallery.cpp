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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "anonkit/core_geometry.hpp"

namespace anonkit {

Gallery build_gallery(const Eigen::MatrixXd& codes,
                      const std::vector<int>& labels) {
  if (codes.cols() == 0 || codes.rows() == 0)
    throw std::invalid_argument("build_gallery: empty code set");
  if (static_cast<Eigen::Index>(labels.size()) != codes.cols())
    throw std::invalid_argument("build_gallery: labels length must match code count");
  Gallery g;
  g.codes = codes;
  for (Eigen::Index j = 0; j < g.codes.cols(); ++j) {
    const double n = g.codes.col(j).norm();
    if (n == 0.0)
      throw std::invalid_argument("build_gallery: zero code cannot be normalized");
    g.codes.col(j) /= n;
  }
  g.labels = labels;
  return g;
}

Gallery build_gallery(const Eigen::MatrixXd& codes) {
  std::vector<int> labels(static_cast<std::size_t>(codes.cols()));
  std::iota(labels.begin(), labels.end(), 0);
  return build_gallery(codes, labels);
}

Gallery build_gallery(const std::vector<Eigen::VectorXd>& codes,
                      const std::vector<int>& labels) {
  if (codes.empty()) throw std::invalid_argument("build_gallery: empty code set");
  const Eigen::Index d = codes.front().size();
  Eigen::MatrixXd m(d, static_cast<Eigen::Index>(codes.size()));
  for (std::size_t j = 0; j < codes.size(); ++j) {
    if (codes[j].size() != d)
      throw std::invalid_argument("build_gallery: mixed code dimensions");
    m.col(static_cast<Eigen::Index>(j)) = codes[j];
  }
  return build_gallery(m, labels);
}

double calibrate_tau(const std::vector<double>& impostor_sims) {
  const std::size_t n = impostor_sims.size();
  if (n < 2)
    throw std::invalid_argument("calibrate_tau: need at least 2 impostor similarities");
  double mean = 0.0;
  for (double s : impostor_sims) mean += s;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double s : impostor_sims) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return mean - 2.0 * sd;
}

namespace {

// Distances from z to every gallery code; the k smallest are averaged.
double mean_knn_distance(const Eigen::VectorXd& z, const Eigen::MatrixXd& codes,
                         int k_nn, Eigen::Index skip = -1) {
  const Eigen::Index n = codes.cols();
  std::vector<double> d2;
  d2.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == skip) continue;
    d2.push_back((codes.col(j) - z).squaredNorm());
  }
  std::nth_element(d2.begin(), d2.begin() + (k_nn - 1), d2.end());
  double acc = 0.0;
  for (int i = 0; i < k_nn; ++i) acc += std::sqrt(std::max(0.0, d2[static_cast<std::size_t>(i)]));
  return acc / k_nn;
}

}  // namespace

double manifold_distance(const Eigen::VectorXd& z, const Gallery& gallery,
                         int k_nn) {
  if (gallery.size() == 0) throw std::invalid_argument("manifold_distance: empty gallery");
  if (z.size() != gallery.dim())
    throw std::invalid_argument("manifold_distance: dimension mismatch");
  if (k_nn < 1 || k_nn > gallery.size())
    throw std::invalid_argument("manifold_distance: k_nn must lie in [1, N]");
  return mean_knn_distance(z, gallery.codes, k_nn);
}

double calibrate_delta(const Gallery& gallery, int k_nn, double percentile) {
  if (k_nn < 1 || k_nn >= gallery.size())
    throw std::invalid_argument("calibrate_delta: k_nn must lie in [1, N-1]");
  if (!(percentile > 0.0 && percentile <= 1.0))
    throw std::invalid_argument("calibrate_delta: percentile must lie in (0, 1]");
  const Eigen::Index n = gallery.size();
  std::vector<double> dists(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j)
    dists[static_cast<std::size_t>(j)] =
        mean_knn_distance(gallery.codes.col(j), gallery.codes, k_nn, j);
  std::sort(dists.begin(), dists.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(percentile * static_cast<double>(n)));
  return dists[std::min(static_cast<std::size_t>(n), std::max<std::size_t>(rank, 1)) - 1];
}

SampleOutcome reject_sample(const Eigen::VectorXd& z_id, const Gallery& gallery,
                            const SamplerConfig& cfg, RngEngine& rng) {
  if (z_id.size() != gallery.dim())
    throw std::invalid_argument("reject_sample: z_id dimension must match gallery");
  if (cfg.max_attempts < 1)
    throw std::invalid_argument("reject_sample: max_attempts must be >= 1");
  if (cfg.k_nn < 1 || cfg.k_nn > gallery.size())
    throw std::invalid_argument("reject_sample: k_nn must lie in [1, N]");

  std::uniform_int_distribution<Eigen::Index> pick(0, gallery.size() - 1);
  for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    const Eigen::Index j = pick(rng);
    const double sim = cosine_sim(z_id, gallery.codes.col(j));
    if (sim >= cfg.tau) continue;
    if (manifold_distance(gallery.codes.col(j), gallery, cfg.k_nn) > cfg.delta)
      continue;
    SampleOutcome out;
    out.replacement = gallery.codes.col(j);
    out.attempts = attempt;
    out.accepted_sim = sim;
    out.gallery_index = j;
    return out;
  }
  throw SamplingExhaustedError(
      "reject_sample: no acceptable candidate within max_attempts; "
      "tau/delta look infeasible for this gallery");
}

double expected_steps_bound(double p_min, double acceptance_volume) {
  if (!(p_min > 0.0) || !(acceptance_volume > 0.0))
    throw std::invalid_argument("expected_steps_bound: inputs must be positive");
  const double mass = p_min * acceptance_volume;
  if (mass > 1.0 + 1e-12)
    throw std::invalid_argument("expected_steps_bound: acceptance mass exceeds 1");
  return 1.0 / mass;
}

AttemptsSummary empirical_attempts(const Eigen::VectorXd& z_id,
                                   const Gallery& gallery,
                                   const SamplerConfig& cfg, int trials,
                                   RngEngine& rng) {
  if (trials < 1) throw std::invalid_argument("empirical_attempts: trials must be >= 1");
  AttemptsSummary s;
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    const SampleOutcome out = reject_sample(z_id, gallery, cfg, rng);
    total += out.attempts;
    s.max = std::max(s.max, out.attempts);
    ++s.histogram[out.attempts];
  }
  s.mean = total / trials;
  return s;
}

void save_gallery(const Gallery& gallery, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_gallery: cannot open " + path);
  out << gallery.dim() << "," << gallery.size() << "\n";
  out.precision(17);
  for (Eigen::Index j = 0; j < gallery.size(); ++j) {
    for (Eigen::Index i = 0; i < gallery.dim(); ++i) out << gallery.codes(i, j) << ",";
    out << gallery.labels[static_cast<std::size_t>(j)] << "\n";
  }
}

Gallery load_gallery(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_gallery: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_gallery: missing header line");
  Eigen::Index d = 0, n = 0;
  {
    std::istringstream hs(line);
    char comma = 0;
    if (!(hs >> d >> comma >> n) || comma != ',' || d < 1 || n < 1)
      throw std::runtime_error("load_gallery: malformed header (want dim,count)");
  }
  Eigen::MatrixXd codes(d, n);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!std::getline(in, line))
      throw std::runtime_error("load_gallery: fewer records than header count");
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<Eigen::Index>(vals.size()) != d &&
        static_cast<Eigen::Index>(vals.size()) != d + 1)
      throw std::runtime_error("load_gallery: record width does not match dimension");
    for (Eigen::Index i = 0; i < d; ++i) codes(i, j) = vals[static_cast<std::size_t>(i)];
    labels.push_back(static_cast<Eigen::Index>(vals.size()) == d + 1
                         ? static_cast<int>(vals.back())
                         : static_cast<int>(j));
  }
  return build_gallery(codes, labels);
}

}  // namespace anonkit
