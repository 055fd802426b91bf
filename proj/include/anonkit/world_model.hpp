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
#ifndef ANONKIT_WORLD_MODEL_HPP_
#define ANONKIT_WORLD_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anonkit/errors.hpp"
#include "anonkit/random.hpp"

namespace anonkit {

struct AttrShape {
  int channels = 0;
  int height = 0;
  int width = 0;
};

// Linear-Gaussian surrogate for the encoder/generator pipeline. The joint law
// of (z_id, z_attr) has identity marginal blocks and cross-covariance with
// singular values exactly rho, so the identity-attribute mutual information
// is analytic. Images are x = A z_id + B z_attr + sigma_g * noise.
//
// Immutable after construction; call finalize_world after editing fields by
// hand (tests do) to refresh the cached factorizations.
struct WorldModel {
  Eigen::Index p = 0;  // identity dimension
  Eigen::Index q = 0;  // attribute dimension
  Eigen::Index m = 0;  // output (image surrogate) dimension
  Eigen::VectorXd rho;          // canonical correlations, each in [0, 1)
  Eigen::MatrixXd cross;        // p x q cross-covariance, SVD values = rho
  Eigen::MatrixXd A;            // m x p identity mixing, orthonormal columns
  Eigen::MatrixXd B;            // m x q attribute mixing, orthonormal columns
  double sigma_g = 0.0;
  std::optional<AttrShape> attr_shape;
  std::uint64_t seed = 0;

  // Cached by finalize_world.
  Eigen::MatrixXd joint_chol;   // lower Cholesky of the (p+q) joint covariance
  Eigen::MatrixXd attr_basis;   // orthonormal basis of col(B)
  Eigen::MatrixXd sigma_x;      // covariance of x under the joint law
  Eigen::MatrixXd id_extractor; // Cov(z_id, x) * sigma_x^{-1}, the Bayes
                                // linear readout of z_id from an image
};

// Linear recognition model f(I) = W * I with unit spectral norm, so the
// Lipschitz constant in the embedding bound is exactly one. W reads the
// world's identity extractor through a random projection, which is the
// desk-scale stand-in for a recognizer trained to ignore attributes.
struct Oracle {
  Eigen::MatrixXd W;        // d_f x m
  double lipschitz = 1.0;   // largest singular value of W
  double impostor_mean = 0.0;
  double impostor_sd = 0.0;
  double theta = 0.0;       // decision threshold on cosine similarity
};

struct SamplePair {
  Eigen::VectorXd z_id;
  Eigen::VectorXd z_attr;
};

WorldModel make_world(Eigen::Index p, Eigen::Index q, Eigen::Index m,
                      const Eigen::VectorXd& rho, double sigma_g,
                      RngEngine& rng, std::uint64_t seed = 0);

// Recomputes the cached factorizations from the primary fields.
void finalize_world(WorldModel& world);

// Exact I(z_id; z_attr) = -1/2 * sum ln(1 - rho_i^2), in nats.
double epsilon_dis(const WorldModel& world);

SamplePair sample_pair(const WorldModel& world, RngEngine& rng);

// Two correlated photographs of the same identity: shared z_id, attribute
// codes drawn independently from the conditional law given z_id.
std::pair<SamplePair, SamplePair> sample_genuine_pair(const WorldModel& world,
                                                      RngEngine& rng);

Eigen::VectorXd generate(const WorldModel& world, const Eigen::VectorXd& id_code,
                         const Eigen::VectorXd& attr_code, RngEngine& rng);

Oracle make_oracle(const WorldModel& world, Eigen::Index d_f, RngEngine& rng,
                   int impostor_pairs = 10000);

Eigen::VectorXd embed(const Oracle& oracle, const Eigen::VectorXd& image);

// Cosine similarities between embeddings of image pairs of different
// (respectively the same) identities.
std::vector<double> impostor_sims(const WorldModel& world, const Oracle& oracle,
                                  int n_pairs, RngEngine& rng);
std::vector<double> genuine_sims(const WorldModel& world, const Oracle& oracle,
                                 int n_pairs, RngEngine& rng);

// Exact I(z_id; I_safe) in nats, where I_safe = G(z'_id, z_attr) with the
// replacement identity drawn independently. Optionally composes a fixed
// linear post-map applied to the output.
double closed_form_leakage(const WorldModel& world);
double closed_form_leakage(const WorldModel& world,
                           const Eigen::MatrixXd& post_map);

// Joint covariance of (z_id, z_attr); identity diagonal blocks, cross block.
Eigen::MatrixXd joint_covariance(const WorldModel& world);

void save_world(const WorldModel& world, const std::string& path);
WorldModel load_world(const std::string& path);

}  // namespace anonkit

#endif  // ANONKIT_WORLD_MODEL_HPP_
