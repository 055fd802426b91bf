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
#ifndef ANONKIT_MINE_HPP_
#define ANONKIT_MINE_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "anonkit/errors.hpp"
#include "anonkit/random.hpp"

namespace anonkit {

// Two-layer tanh perceptron with scalar output: T(x) = w2' tanh(W1 x + b1) + b2.
struct CriticNet {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;  // hidden
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;

  Eigen::Index input_dim() const { return w1.cols(); }
  Eigen::Index hidden_dim() const { return w1.rows(); }
};

struct CriticGrad {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;
};

struct TrainTrace {
  std::vector<double> dv_values;  // one Donsker-Varadhan value per epoch
  double final_estimate = 0.0;    // nats
  double ema_state = 0.0;         // log-partition moving average at the end
  double ema_decay = 0.0;
  double momentum = 0.0;
  double step_size = 0.0;
  CriticNet critic;               // trained parameters
};

struct MineOptions {
  double momentum = 0.9;
  double ema_decay = 0.99;
  int average_tail = 0;  // epochs averaged into the final estimate; 0 = epochs/10
};

// Symmetric uniform initialization, deterministic under the stream.
CriticNet init_critic(Eigen::Index input_dim, Eigen::Index hidden, RngEngine& rng);

Eigen::VectorXd critic_values(const CriticNet& critic, const Eigen::MatrixXd& batch);

// Donsker-Varadhan value of precomputed critic outputs:
// mean(t_joint) - ln mean(exp t_marginal), log-partition with max subtraction.
double dv_value(const Eigen::VectorXd& t_joint, const Eigen::VectorXd& t_marginal);

// The same value for a critic network on raw batches.
double dv_objective(const CriticNet& critic, const Eigen::MatrixXd& joint_batch,
                    const Eigen::MatrixXd& marginal_batch);

// Exact gradient of dv_objective in every parameter.
CriticGrad dv_gradient(const CriticNet& critic, const Eigen::MatrixXd& joint_batch,
                       const Eigen::MatrixXd& marginal_batch);

// Trains a critic on paired samples with full-batch momentum ascent and an
// EMA-corrected log-partition gradient; the marginal batch is the attribute
// column reshuffled each epoch.
TrainTrace train_mine(const Eigen::MatrixXd& x_samples,
                      const Eigen::MatrixXd& y_samples, Eigen::Index hidden,
                      int epochs, double step_size, RngEngine& rng,
                      const MineOptions& options = {});

// Comma-separated (epoch, dv_value) rows.
void save_trace(const TrainTrace& trace, const std::string& path);

}  // namespace anonkit

#endif  // ANONKIT_MINE_HPP_
