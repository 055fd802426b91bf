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
#ifndef ANONKIT_OBJECTIVES_HPP_
#define ANONKIT_OBJECTIVES_HPP_

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "anonkit/world_model.hpp"

namespace anonkit {

struct TradeoffParams {
  double lambda = 1.0;  // privacy weight
  double mu = 0.1;      // disentanglement weight
  double beta = 0.1;    // gradient-penalty weight inside the disentangle term
  double tau = 0.3;     // hinge threshold on oracle similarity
};

// Identity and attribute heads applied to world outputs.
struct LinearEncoder {
  Eigen::MatrixXd e_id;    // p x m
  Eigen::MatrixXd e_attr;  // q x m
};

struct ObjectiveBreakdown {
  double util = 0.0;
  double priv = 0.0;
  double disentangle = 0.0;
  double total = 0.0;
  TradeoffParams weights;
};

// Mean hinge over the oracle ensemble: max(0, sim(f(raw), f(safe)) - tau).
double priv_loss(const Eigen::VectorXd& raw, const Eigen::VectorXd& safe,
                 const std::vector<Oracle>& oracles, double tau);

// mi_value + beta * squared Frobenius norm of the attribute predictor's
// Jacobian with respect to the identity code.
double disentangle_loss(double mi_value,
                        const Eigen::MatrixXd& attr_predictor_jacobian,
                        double beta);

// Euclidean distance between attribute-subspace projections: the semantic
// metric is blind to anything orthogonal to col(B).
double util_loss(const Eigen::VectorXd& raw, const Eigen::VectorXd& safe,
                 const WorldModel& world);

ObjectiveBreakdown total_objective(double util, double priv, double disentangle,
                                   const TradeoffParams& params);

// Empirical max of util_loss over identity swaps with the attribute code held
// fixed; the measured counterpart of the generator-fidelity constant.
double kappa_measure(const WorldModel& world, int n_trials, RngEngine& rng);

// Exact identity-attribute MI of the encoder's outputs under the world law.
double induced_eps_dis(const WorldModel& world, const LinearEncoder& encoder);

struct EncoderGrad {
  Eigen::MatrixXd e_id;
  Eigen::MatrixXd e_attr;
};

// Frozen evaluation context for encoder optimization: cached raw samples,
// fixed replacement identities (no gradients flow through the sampling step),
// and precomputed oracle views.
struct EncoderWorkspace {
  const WorldModel* world = nullptr;
  TradeoffParams params;
  Eigen::MatrixXd samples;        // m x n raw images
  Eigen::MatrixXd replacements;   // p x n replacement identity codes
  std::vector<Eigen::MatrixXd> oracle_raw;   // per oracle: d_f x n embeddings of raw
  std::vector<Eigen::MatrixXd> oracle_swap;  // per oracle: d_f x n embeddings of A z'
  std::vector<Eigen::MatrixXd> oracle_attr;  // per oracle: d_f x q map W B
};

EncoderWorkspace make_encoder_workspace(const WorldModel& world,
                                        const std::vector<Oracle>& oracles,
                                        const TradeoffParams& params,
                                        int n_samples, RngEngine& rng);

ObjectiveBreakdown encoder_objective(const EncoderWorkspace& ws,
                                     const LinearEncoder& encoder);

// Analytic gradient of encoder_objective's total in every encoder entry.
EncoderGrad encoder_gradient(const EncoderWorkspace& ws,
                             const LinearEncoder& encoder);

struct EncoderTraceRow {
  int step = 0;
  double util = 0.0;
  double priv = 0.0;
  double disentangle = 0.0;
  double total = 0.0;
  double eps_dis = 0.0;      // closed form, nats
  double eps_dis_ksg = std::numeric_limits<double>::quiet_NaN();  // checkpoints
};

struct OptimizeOptions {
  int n_samples = 4096;
  double momentum = 0.9;
  int ksg_checkpoint_every = 50;  // 0 disables the estimator cross-check
};

struct OptimizeResult {
  LinearEncoder encoder;
  std::vector<EncoderTraceRow> trace;
};

// Full-batch momentum descent of the three-term objective over the encoder
// heads, starting from the transposed generator frames.
OptimizeResult optimize_encoder(const WorldModel& world,
                                const std::vector<Oracle>& oracles,
                                const TradeoffParams& params, int steps,
                                double step_size, RngEngine& rng,
                                const OptimizeOptions& options = {});

// Raw-vs-safe oracle similarities of the encoder pipeline on fresh samples;
// used for held-out ensemble evaluations.
std::vector<double> pipeline_sims(const WorldModel& world,
                                  const LinearEncoder& encoder,
                                  const Oracle& oracle, int n_pairs,
                                  RngEngine& rng);

// Comma-separated (step, util, priv, disentangle, total, eps_dis,
// eps_dis_ksg) rows.
void save_encoder_trace(const std::vector<EncoderTraceRow>& trace,
                        const std::string& path);

}  // namespace anonkit

#endif  // ANONKIT_OBJECTIVES_HPP_
