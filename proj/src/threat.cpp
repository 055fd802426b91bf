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
#include "anonkit/threat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>

#include "anonkit/core_geometry.hpp"

namespace anonkit {
namespace {

double upper_quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(values.size())));
  return values[std::min(values.size(), std::max<std::size_t>(rank, 1)) - 1];
}

// Per-identity stratified split; indices are shuffled before the cut.
struct Split {
  std::vector<int> train;
  std::vector<int> test;
};

Split stratified_split(const std::vector<int>& labels, double train_fraction,
                       RngEngine& rng) {
  std::vector<int> classes = labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  Split split;
  for (int c : classes) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) idx.push_back(static_cast<int>(i));
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto cut = static_cast<std::size_t>(
        std::ceil(train_fraction * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < idx.size(); ++i)
      (i < cut ? split.train : split.test).push_back(idx[i]);
  }
  return split;
}

}  // namespace

std::vector<double> tier1_dar(
    const std::vector<Oracle>& oracles, const Eigen::MatrixXd& raw_images,
    const Eigen::MatrixXd& safe_images,
    const std::vector<std::vector<double>>& impostor_sims_per_oracle,
    double far_target) {
  const Eigen::Index n = raw_images.cols();
  if (n < 100) throw std::invalid_argument("tier1_dar: need at least 100 pairs");
  if (safe_images.cols() != n)
    throw std::invalid_argument("tier1_dar: pair count mismatch");
  if (!(far_target > 0.0 && far_target < 1.0))
    throw std::invalid_argument("tier1_dar: far_target must lie in (0, 1)");
  if (impostor_sims_per_oracle.size() != oracles.size())
    throw std::invalid_argument("tier1_dar: one impostor sample per oracle");

  std::vector<double> rates;
  rates.reserve(oracles.size());
  for (std::size_t j = 0; j < oracles.size(); ++j) {
    const std::vector<double>& imp = impostor_sims_per_oracle[j];
    if (imp.size() < static_cast<std::size_t>(std::ceil(2.0 / far_target)))
      throw std::invalid_argument(
          "tier1_dar: too few impostor samples to place the FAR quantile");
    const double theta = upper_quantile(imp, 1.0 - far_target);
    const Eigen::MatrixXd er = oracles[j].W * raw_images;
    const Eigen::MatrixXd es = oracles[j].W * safe_images;
    int hits = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (cosine_sim(er.col(i), es.col(i)) > theta) ++hits;
    rates.push_back(static_cast<double>(hits) / static_cast<double>(n));
  }
  return rates;
}

ProbeAccuracy tier2_probe(const Eigen::MatrixXd& attr_codes,
                          const std::vector<int>& identity_labels,
                          double train_fraction, double ridge, RngEngine& rng) {
  const Eigen::Index n = attr_codes.rows();
  const Eigen::Index q = attr_codes.cols();
  if (static_cast<Eigen::Index>(identity_labels.size()) != n)
    throw std::invalid_argument("tier2_probe: label count mismatch");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("tier2_probe: train_fraction must lie in (0, 1)");
  if (!(ridge > 0.0))
    throw std::invalid_argument("tier2_probe: ridge must be positive");

  // Dense class ids.
  std::vector<int> classes = identity_labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  const int n_classes = static_cast<int>(classes.size());
  std::vector<int> dense(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    dense[static_cast<std::size_t>(i)] = static_cast<int>(
        std::lower_bound(classes.begin(), classes.end(),
                         identity_labels[static_cast<std::size_t>(i)]) -
        classes.begin());
  {
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (int c : dense) ++counts[static_cast<std::size_t>(c)];
    for (int c : counts)
      if (c < 2)
        throw std::invalid_argument(
            "tier2_probe: every identity needs at least 2 samples");
  }

  const Split split = stratified_split(dense, train_fraction, rng);
  const auto n_train = static_cast<Eigen::Index>(split.train.size());
  const auto n_test = static_cast<Eigen::Index>(split.test.size());
  if (n_test == 0)
    throw std::invalid_argument("tier2_probe: empty held-out split");

  Eigen::MatrixXd z(n_train, q);
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n_train, n_classes);
  for (Eigen::Index i = 0; i < n_train; ++i) {
    const int row = split.train[static_cast<std::size_t>(i)];
    z.row(i) = attr_codes.row(row);
    y(i, dense[static_cast<std::size_t>(row)]) = 1.0;
  }
  const Eigen::RowVectorXd z_mean = z.colwise().mean();
  const Eigen::RowVectorXd y_mean = y.colwise().mean();
  z.rowwise() -= z_mean;
  y.rowwise() -= y_mean;

  const Eigen::MatrixXd gram =
      z.transpose() * z +
      ridge * static_cast<double>(n_train) * Eigen::MatrixXd::Identity(q, q);
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw DegenerateCovarianceError(
        "tier2_probe: design matrix singular even after ridge");
  const Eigen::MatrixXd coef = llt.solve(z.transpose() * y);  // q x classes

  int top1 = 0, top5 = 0;
  const int k_top = std::min(5, n_classes);
  for (Eigen::Index i = 0; i < n_test; ++i) {
    const int row = split.test[static_cast<std::size_t>(i)];
    const Eigen::RowVectorXd scores =
        (attr_codes.row(row) - z_mean) * coef + y_mean;
    const int truth = dense[static_cast<std::size_t>(row)];
    // argmax with ties broken by lowest index
    int arg = 0;
    for (int c = 1; c < n_classes; ++c)
      if (scores[c] > scores[arg]) arg = c;
    if (arg == truth) ++top1;
    std::vector<int> order(static_cast<std::size_t>(n_classes));
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k_top, order.end(),
                      [&](int a, int b) {
                        return scores[a] > scores[b] ||
                               (scores[a] == scores[b] && a < b);
                      });
    for (int r = 0; r < k_top; ++r)
      if (order[static_cast<std::size_t>(r)] == truth) {
        ++top5;
        break;
      }
  }
  ProbeAccuracy acc;
  acc.top1 = static_cast<double>(top1) / static_cast<double>(n_test);
  acc.top5 = static_cast<double>(top5) / static_cast<double>(n_test);
  return acc;
}

std::vector<double> tier3_adaptive(
    const std::vector<Oracle>& oracles, const Eigen::MatrixXd& raw_images,
    const Eigen::MatrixXd& safe_images,
    const std::vector<std::vector<double>>& impostor_sims_per_oracle,
    double far_target, double train_fraction, RngEngine& rng) {
  const Eigen::Index n = raw_images.cols();
  if (n < 100)
    throw std::invalid_argument("tier3_adaptive: need at least 100 pairs");
  if (safe_images.cols() != n)
    throw std::invalid_argument("tier3_adaptive: pair count mismatch");
  if (impostor_sims_per_oracle.size() != oracles.size())
    throw std::invalid_argument("tier3_adaptive: one impostor sample per oracle");

  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto cut = static_cast<Eigen::Index>(
      std::ceil(train_fraction * static_cast<double>(n)));
  if (cut == 0 || cut == n)
    throw std::invalid_argument("tier3_adaptive: degenerate split");

  std::vector<double> rates;
  rates.reserve(oracles.size());
  for (std::size_t j = 0; j < oracles.size(); ++j) {
    const Eigen::Index d_f = oracles[j].W.rows();
    const Eigen::MatrixXd er = oracles[j].W * raw_images;
    const Eigen::MatrixXd es = oracles[j].W * safe_images;
    Eigen::MatrixXd r_train(d_f, cut), s_train(d_f, cut);
    for (Eigen::Index i = 0; i < cut; ++i) {
      r_train.col(i) = er.col(idx[static_cast<std::size_t>(i)]);
      s_train.col(i) = es.col(idx[static_cast<std::size_t>(i)]);
    }
    // Fine-tuning from the recognizer itself: least squares on
    // ||M s - r||_F^2 with the correction anchored at M = I, so the attacker
    // is never weaker than the direct embedding comparison.
    const double anchor = s_train.squaredNorm() / static_cast<double>(d_f);
    Eigen::MatrixXd gram =
        s_train * s_train.transpose() +
        anchor * Eigen::MatrixXd::Identity(d_f, d_f);
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
      gram += 1e-6 * Eigen::MatrixXd::Identity(d_f, d_f);
      llt.compute(gram);
      if (llt.info() != Eigen::Success)
        throw DegenerateCovarianceError("tier3_adaptive: embedding Gram "
                                        "matrix irreparably singular");
    }
    const Eigen::MatrixXd map =
        llt.solve(s_train * r_train.transpose() +
                  anchor * Eigen::MatrixXd::Identity(d_f, d_f))
            .transpose();

    const double theta = upper_quantile(impostor_sims_per_oracle[j],
                                        1.0 - far_target);
    int hits = 0;
    for (Eigen::Index i = cut; i < n; ++i) {
      const int row = idx[static_cast<std::size_t>(i)];
      const Eigen::VectorXd mapped = map * es.col(row);
      if (mapped.norm() == 0.0) continue;
      if (cosine_sim(mapped, er.col(row)) > theta) ++hits;
    }
    rates.push_back(static_cast<double>(hits) / static_cast<double>(n - cut));
  }
  return rates;
}

ThreatReport run_threat_suite(const WorldModel& world,
                              const std::vector<Oracle>& oracles,
                              const SamplerConfig& sampler_cfg,
                              const ThreatSizes& sizes, RngEngine& rng,
                              const LinearEncoder* encoder) {
  if (sizes.n_identities < 2)
    throw std::invalid_argument("run_threat_suite: need at least 2 identities");
  if (sizes.samples_per_identity < 2)
    throw std::invalid_argument(
        "run_threat_suite: need at least 2 samples per identity");

  const Eigen::Index n_id = sizes.n_identities;
  const Eigen::Index per = sizes.samples_per_identity;
  const Eigen::Index n = n_id * per;

  // Evaluated identities and the replacement gallery are disjoint pools; the
  // raw-scale gallery codes drive generation, the normalized ones drive the
  // rejection sampler.
  const Eigen::MatrixXd id_codes = normal_matrix(world.p, n_id, rng);
  const Eigen::MatrixXd gallery_codes =
      normal_matrix(world.p, sizes.gallery_size, rng);
  const Gallery gallery = build_gallery(gallery_codes);
  SamplerConfig cfg = sampler_cfg;
  if (cfg.delta <= 0.0) cfg.delta = calibrate_delta(gallery, cfg.k_nn);

  // Attribute conditional given the identity code.
  const Eigen::MatrixXd cond_cov =
      Eigen::MatrixXd::Identity(world.q, world.q) -
      world.cross.transpose() * world.cross;
  Eigen::LLT<Eigen::MatrixXd> cond_llt(cond_cov);
  if (cond_llt.info() != Eigen::Success)
    throw DegenerateCovarianceError(
        "run_threat_suite: attribute conditional covariance singular");
  const Eigen::MatrixXd cond_chol = cond_llt.matrixL();

  Eigen::MatrixXd raw_images(world.m, n);
  Eigen::MatrixXd safe_images(world.m, n);
  Eigen::MatrixXd attr_codes(n, encoder ? encoder->e_attr.rows() : world.q);
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index identity = i / per;
    labels[static_cast<std::size_t>(i)] = static_cast<int>(identity);
    const Eigen::VectorXd z_id = id_codes.col(identity);
    const Eigen::VectorXd z_attr =
        world.cross.transpose() * z_id + cond_chol * normal_vector(world.q, rng);
    raw_images.col(i) = generate(world, z_id, z_attr, rng);

    const SampleOutcome outcome =
        reject_sample(z_id.normalized(), gallery, cfg, rng);
    const Eigen::VectorXd replacement = gallery_codes.col(outcome.gallery_index);
    if (encoder) {
      const Eigen::VectorXd v = encoder->e_attr * raw_images.col(i);
      attr_codes.row(i) = v.transpose();
      safe_images.col(i) = generate(world, replacement, v, rng);
    } else {
      attr_codes.row(i) = z_attr.transpose();
      safe_images.col(i) = generate(world, replacement, z_attr, rng);
    }
  }

  std::vector<std::vector<double>> impostor_per_oracle;
  impostor_per_oracle.reserve(oracles.size());
  for (const Oracle& oracle : oracles)
    impostor_per_oracle.push_back(
        impostor_sims(world, oracle, sizes.impostor_calibration, rng));

  ThreatReport report;
  report.tier1 = tier1_dar(oracles, raw_images, safe_images, impostor_per_oracle,
                           sizes.far_target);
  report.tier2 = tier2_probe(attr_codes, labels, sizes.train_fraction,
                             sizes.probe_ridge, rng);
  report.tier3_per_oracle =
      tier3_adaptive(oracles, raw_images, safe_images, impostor_per_oracle,
                     sizes.far_target, sizes.train_fraction, rng);
  report.tier3 = 0.0;
  for (double r : report.tier3_per_oracle) report.tier3 += r;
  report.tier3 /= static_cast<double>(report.tier3_per_oracle.size());
  report.chance_level = 1.0 / static_cast<double>(n_id);
  report.far_target = sizes.far_target;
  report.n_pairs = static_cast<int>(n);
  return report;
}

}  // namespace anonkit
