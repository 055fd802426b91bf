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
#include "anonkit/mine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace anonkit {
namespace {

// Hidden activations (column per sample) for a batch.
Eigen::MatrixXd hidden_activations(const CriticNet& critic,
                                   const Eigen::MatrixXd& batch) {
  return ((critic.w1 * batch.transpose()).colwise() + critic.b1)
      .array()
      .tanh();
}

// Accumulates sum_i alpha_i * dT(x_i)/dtheta into grad, reusing the forward
// activations h.
void accumulate_weighted(const CriticNet& critic, const Eigen::MatrixXd& batch,
                         const Eigen::MatrixXd& h, const Eigen::VectorXd& alpha,
                         CriticGrad& grad) {
  grad.w2 += h * alpha;
  grad.b2 += alpha.sum();
  // u_j = alpha_j * w2 .* (1 - h_j^2)
  const Eigen::MatrixXd u =
      ((1.0 - h.array().square()).colwise() * critic.w2.array()).rowwise() *
      alpha.transpose().array();
  grad.b1 += u.rowwise().sum();
  grad.w1 += u * batch;
}

double log_mean_exp(const Eigen::VectorXd& t) {
  const double m = t.maxCoeff();
  return m + std::log((t.array() - m).exp().mean());
}

}  // namespace

CriticNet init_critic(Eigen::Index input_dim, Eigen::Index hidden,
                      RngEngine& rng) {
  if (input_dim < 1 || hidden < 1)
    throw std::invalid_argument("init_critic: dimensions must be positive");
  CriticNet net;
  const double lim1 = std::sqrt(6.0 / static_cast<double>(input_dim + hidden));
  const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden + 1));
  std::uniform_real_distribution<double> u1(-lim1, lim1);
  std::uniform_real_distribution<double> u2(-lim2, lim2);
  net.w1.resize(hidden, input_dim);
  for (Eigen::Index j = 0; j < input_dim; ++j)
    for (Eigen::Index i = 0; i < hidden; ++i) net.w1(i, j) = u1(rng);
  net.b1 = Eigen::VectorXd::Zero(hidden);
  net.w2.resize(hidden);
  for (Eigen::Index i = 0; i < hidden; ++i) net.w2[i] = u2(rng);
  net.b2 = 0.0;
  return net;
}

Eigen::VectorXd critic_values(const CriticNet& critic,
                              const Eigen::MatrixXd& batch) {
  if (batch.cols() != critic.input_dim())
    throw std::invalid_argument("critic_values: input width mismatch");
  const Eigen::MatrixXd pre =
      (critic.w1 * batch.transpose()).colwise() + critic.b1;
  return (pre.array().tanh().matrix().transpose() * critic.w2).array() +
         critic.b2;
}

double dv_value(const Eigen::VectorXd& t_joint,
                const Eigen::VectorXd& t_marginal) {
  if (t_joint.size() == 0 || t_marginal.size() == 0)
    throw std::invalid_argument("dv_value: batches must be nonempty");
  return t_joint.mean() - log_mean_exp(t_marginal);
}

double dv_objective(const CriticNet& critic, const Eigen::MatrixXd& joint_batch,
                    const Eigen::MatrixXd& marginal_batch) {
  if (joint_batch.rows() == 0 || marginal_batch.rows() == 0)
    throw std::invalid_argument("dv_objective: batches must be nonempty");
  return dv_value(critic_values(critic, joint_batch),
                  critic_values(critic, marginal_batch));
}

CriticGrad dv_gradient(const CriticNet& critic, const Eigen::MatrixXd& joint_batch,
                       const Eigen::MatrixXd& marginal_batch) {
  if (joint_batch.rows() == 0 || marginal_batch.rows() == 0)
    throw std::invalid_argument("dv_gradient: batches must be nonempty");
  CriticGrad grad;
  grad.w1 = Eigen::MatrixXd::Zero(critic.w1.rows(), critic.w1.cols());
  grad.b1 = Eigen::VectorXd::Zero(critic.b1.size());
  grad.w2 = Eigen::VectorXd::Zero(critic.w2.size());
  grad.b2 = 0.0;

  const Eigen::Index nj = joint_batch.rows();
  const Eigen::MatrixXd hj = hidden_activations(critic, joint_batch);
  accumulate_weighted(critic, joint_batch, hj,
                      Eigen::VectorXd::Constant(nj, 1.0 / static_cast<double>(nj)),
                      grad);

  // marginal side: -softmax weights (gradient of ln mean exp T)
  const Eigen::MatrixXd hm = hidden_activations(critic, marginal_batch);
  const Eigen::VectorXd tm = (hm.transpose() * critic.w2).array() + critic.b2;
  const double m = tm.maxCoeff();
  Eigen::VectorXd w = (tm.array() - m).exp();
  w = -w / w.sum();
  accumulate_weighted(critic, marginal_batch, hm, w, grad);
  return grad;
}

TrainTrace train_mine(const Eigen::MatrixXd& x_samples,
                      const Eigen::MatrixXd& y_samples, Eigen::Index hidden,
                      int epochs, double step_size, RngEngine& rng,
                      const MineOptions& options) {
  const Eigen::Index n = x_samples.rows();
  if (y_samples.rows() != n)
    throw std::invalid_argument("train_mine: sample counts must match");
  if (n < 256)
    throw std::invalid_argument("train_mine: need at least 256 paired samples");
  if (epochs < 1) throw std::invalid_argument("train_mine: epochs must be >= 1");

  const Eigen::Index dx = x_samples.cols();
  const Eigen::Index dy = y_samples.cols();
  Eigen::MatrixXd joint(n, dx + dy);
  joint << x_samples, y_samples;

  CriticNet critic = init_critic(dx + dy, hidden, rng);
  CriticGrad vel;
  vel.w1 = Eigen::MatrixXd::Zero(hidden, dx + dy);
  vel.b1 = Eigen::VectorXd::Zero(hidden);
  vel.w2 = Eigen::VectorXd::Zero(hidden);
  vel.b2 = 0.0;

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Eigen::MatrixXd marginal(n, dx + dy);
  marginal.leftCols(dx) = x_samples;

  TrainTrace trace;
  trace.dv_values.reserve(static_cast<std::size_t>(epochs));
  trace.ema_decay = options.ema_decay;
  trace.momentum = options.momentum;
  trace.step_size = step_size;

  double ema = 0.0;
  bool ema_ready = false;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Eigen::Index i = 0; i < n; ++i)
      marginal.row(i).tail(dy) = y_samples.row(perm[static_cast<std::size_t>(i)]);

    const Eigen::MatrixXd hj = hidden_activations(critic, joint);
    const Eigen::MatrixXd hm = hidden_activations(critic, marginal);
    const Eigen::VectorXd tj = (hj.transpose() * critic.w2).array() + critic.b2;
    const Eigen::VectorXd tm = (hm.transpose() * critic.w2).array() + critic.b2;
    const double lme = log_mean_exp(tm);
    const double value = tj.mean() - lme;
    if (!std::isfinite(value))
      throw TrainingDivergedError(
          "train_mine: objective became non-finite; try a smaller step size");
    trace.dv_values.push_back(value);

    const double mean_exp = std::exp(lme);
    ema = ema_ready ? options.ema_decay * ema + (1.0 - options.ema_decay) * mean_exp
                    : mean_exp;
    ema_ready = true;

    CriticGrad grad;
    grad.w1 = Eigen::MatrixXd::Zero(hidden, dx + dy);
    grad.b1 = Eigen::VectorXd::Zero(hidden);
    grad.w2 = Eigen::VectorXd::Zero(hidden);
    grad.b2 = 0.0;
    accumulate_weighted(critic, joint, hj,
                        Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)),
                        grad);
    // EMA-corrected log-partition gradient: weights -exp(T)/(n * ema).
    const Eigen::VectorXd wm =
        -(tm.array().exp() / (static_cast<double>(n) * ema)).matrix();
    accumulate_weighted(critic, marginal, hm, wm, grad);

    vel.w1 = options.momentum * vel.w1 + grad.w1;
    vel.b1 = options.momentum * vel.b1 + grad.b1;
    vel.w2 = options.momentum * vel.w2 + grad.w2;
    vel.b2 = options.momentum * vel.b2 + grad.b2;
    critic.w1 += step_size * vel.w1;
    critic.b1 += step_size * vel.b1;
    critic.w2 += step_size * vel.w2;
    critic.b2 += step_size * vel.b2;
  }

  trace.ema_state = ema;
  const int tail = options.average_tail > 0
                       ? std::min(options.average_tail, epochs)
                       : std::max(1, epochs / 10);
  double acc = 0.0;
  for (int i = epochs - tail; i < epochs; ++i)
    acc += trace.dv_values[static_cast<std::size_t>(i)];
  trace.final_estimate = acc / tail;
  trace.critic = std::move(critic);
  return trace;
}

void save_trace(const TrainTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_trace: cannot open " + path);
  out << "epoch,dv_value\n";
  out.precision(12);
  for (std::size_t i = 0; i < trace.dv_values.size(); ++i)
    out << i << "," << trace.dv_values[i] << "\n";
}

}  // namespace anonkit
