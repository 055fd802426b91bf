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
#include "anonkit/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Cholesky>

#include "anonkit/core_geometry.hpp"
#include "anonkit/estimators.hpp"

namespace anonkit {
namespace {

double spd_logdet(const Eigen::MatrixXd& s, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success)
    throw DegenerateCovarianceError(std::string(what) +
                                    ": induced covariance lost definiteness");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Covariance blocks of (E_id x, E_attr x) under the world law.
struct InducedBlocks {
  Eigen::MatrixXd s_uu;
  Eigen::MatrixXd s_vv;
  Eigen::MatrixXd s_vu;  // Cov(v, u), q x p
};

InducedBlocks induced_blocks(const WorldModel& w, const LinearEncoder& e) {
  InducedBlocks b;
  const Eigen::MatrixXd sid = e.e_id * w.sigma_x;
  const Eigen::MatrixXd sattr = e.e_attr * w.sigma_x;
  b.s_uu = sid * e.e_id.transpose();
  b.s_vv = sattr * e.e_attr.transpose();
  b.s_vu = sattr * e.e_id.transpose();
  return b;
}

}  // namespace

double priv_loss(const Eigen::VectorXd& raw, const Eigen::VectorXd& safe,
                 const std::vector<Oracle>& oracles, double tau) {
  if (oracles.empty())
    throw std::invalid_argument("priv_loss: oracle ensemble must be nonempty");
  double loss = 0.0;
  for (const Oracle& oracle : oracles) {
    const double sim = cosine_sim(embed(oracle, raw), embed(oracle, safe));
    loss += std::max(0.0, sim - tau);
  }
  return loss / static_cast<double>(oracles.size());
}

double disentangle_loss(double mi_value,
                        const Eigen::MatrixXd& attr_predictor_jacobian,
                        double beta) {
  if (mi_value < 0.0)
    throw std::invalid_argument("disentangle_loss: mi_value must be nonnegative");
  return mi_value + beta * attr_predictor_jacobian.squaredNorm();
}

double util_loss(const Eigen::VectorXd& raw, const Eigen::VectorXd& safe,
                 const WorldModel& world) {
  if (raw.size() != world.m || safe.size() != world.m)
    throw std::invalid_argument("util_loss: vectors must have world output dim");
  if (world.attr_basis.cols() == 0) return 0.0;
  return (world.attr_basis.transpose() * (raw - safe)).norm();
}

ObjectiveBreakdown total_objective(double util, double priv, double disentangle,
                                   const TradeoffParams& params) {
  ObjectiveBreakdown b;
  b.util = util;
  b.priv = priv;
  b.disentangle = disentangle;
  b.total = util + params.lambda * priv + params.mu * disentangle;
  b.weights = params;
  return b;
}

double kappa_measure(const WorldModel& world, int n_trials, RngEngine& rng) {
  if (n_trials < 1)
    throw std::invalid_argument("kappa_measure: n_trials must be >= 1");
  double worst = 0.0;
  for (int t = 0; t < n_trials; ++t) {
    const SamplePair pair = sample_pair(world, rng);
    const Eigen::VectorXd swap_id = normal_vector(world.p, rng);
    const Eigen::VectorXd original =
        generate(world, pair.z_id, pair.z_attr, rng);
    const Eigen::VectorXd swapped = generate(world, swap_id, pair.z_attr, rng);
    worst = std::max(worst, util_loss(original, swapped, world));
  }
  return worst;
}

double induced_eps_dis(const WorldModel& world, const LinearEncoder& encoder) {
  const InducedBlocks b = induced_blocks(world, encoder);
  return gaussian_mi(b.s_uu, b.s_vv, b.s_vu.transpose()).value;
}

EncoderWorkspace make_encoder_workspace(const WorldModel& world,
                                        const std::vector<Oracle>& oracles,
                                        const TradeoffParams& params,
                                        int n_samples, RngEngine& rng) {
  if (n_samples < 2)
    throw std::invalid_argument("make_encoder_workspace: need n_samples >= 2");
  EncoderWorkspace ws;
  ws.world = &world;
  ws.params = params;
  ws.samples.resize(world.m, n_samples);
  ws.replacements.resize(world.p, n_samples);
  for (int i = 0; i < n_samples; ++i) {
    const SamplePair pair = sample_pair(world, rng);
    ws.samples.col(i) = generate(world, pair.z_id, pair.z_attr, rng);
    ws.replacements.col(i) = normal_vector(world.p, rng);
  }
  for (const Oracle& oracle : oracles) {
    ws.oracle_raw.push_back(oracle.W * ws.samples);
    ws.oracle_swap.push_back(oracle.W * world.A * ws.replacements);
    ws.oracle_attr.push_back(oracle.W * world.B);
  }
  return ws;
}

namespace {

// Shared forward pass pieces of the empirical privacy term.
struct PrivForward {
  double value = 0.0;
  // per oracle: d_f x n matrix of weighted cosine gradients w.r.t. the safe
  // embedding, zero where the hinge is inactive.
  std::vector<Eigen::MatrixXd> dcos_dsafe;
};

PrivForward priv_forward(const EncoderWorkspace& ws, const Eigen::MatrixXd& v,
                         bool with_grad) {
  PrivForward out;
  const Eigen::Index n = ws.samples.cols();
  const std::size_t n_oracles = ws.oracle_raw.size();
  if (n_oracles == 0) return out;
  const double weight = 1.0 / (static_cast<double>(n) * n_oracles);
  for (std::size_t j = 0; j < n_oracles; ++j) {
    const Eigen::MatrixXd safe = ws.oracle_swap[j] + ws.oracle_attr[j] * v;
    const Eigen::MatrixXd& raw = ws.oracle_raw[j];
    Eigen::MatrixXd ds;
    if (with_grad) ds = Eigen::MatrixXd::Zero(safe.rows(), n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double nr = raw.col(i).norm();
      const double nsafe = safe.col(i).norm();
      const double sim = raw.col(i).dot(safe.col(i)) / (nr * nsafe);
      if (sim <= ws.params.tau) continue;
      out.value += weight * (sim - ws.params.tau);
      if (with_grad)
        ds.col(i) = weight * (raw.col(i) / (nr * nsafe) -
                              sim * safe.col(i) / (nsafe * nsafe));
    }
    if (with_grad) out.dcos_dsafe.push_back(std::move(ds));
  }
  return out;
}

}  // namespace

ObjectiveBreakdown encoder_objective(const EncoderWorkspace& ws,
                                     const LinearEncoder& encoder) {
  const WorldModel& w = *ws.world;
  // reconstruction path: x_hat = A u + B v with the original identity code
  const Eigen::MatrixXd residual_map =
      Eigen::MatrixXd::Identity(w.m, w.m) - w.A * encoder.e_id - w.B * encoder.e_attr;
  const double util = (residual_map * w.sigma_x * residual_map.transpose()).trace();

  const InducedBlocks b = induced_blocks(w, encoder);
  const double mi = 0.5 * (spd_logdet(b.s_uu, "encoder_objective") +
                           spd_logdet(b.s_vv, "encoder_objective") -
                           [&] {
                             Eigen::MatrixXd joint(w.p + w.q, w.p + w.q);
                             joint.topLeftCorner(w.p, w.p) = b.s_uu;
                             joint.bottomRightCorner(w.q, w.q) = b.s_vv;
                             joint.topRightCorner(w.p, w.q) = b.s_vu.transpose();
                             joint.bottomLeftCorner(w.q, w.p) = b.s_vu;
                             return spd_logdet(joint, "encoder_objective");
                           }());
  // attribute predictor from the identity code: the induced regression
  // coefficient, whose Jacobian is the coefficient matrix itself
  Eigen::LLT<Eigen::MatrixXd> llt_uu(b.s_uu);
  if (llt_uu.info() != Eigen::Success)
    throw DegenerateCovarianceError("encoder_objective: identity head collapsed");
  const Eigen::MatrixXd predictor = llt_uu.solve(b.s_vu.transpose()).transpose();
  const double dis = std::max(0.0, mi) + ws.params.beta * predictor.squaredNorm();

  const Eigen::MatrixXd v = encoder.e_attr * ws.samples;
  const double priv = priv_forward(ws, v, /*with_grad=*/false).value;

  return total_objective(util, priv, dis, ws.params);
}

EncoderGrad encoder_gradient(const EncoderWorkspace& ws,
                             const LinearEncoder& encoder) {
  const WorldModel& w = *ws.world;
  EncoderGrad grad;
  grad.e_id = Eigen::MatrixXd::Zero(w.p, w.m);
  grad.e_attr = Eigen::MatrixXd::Zero(w.q, w.m);

  // util: d tr(M Sigma M') / dE = -2 {A,B}' M Sigma
  const Eigen::MatrixXd residual_map =
      Eigen::MatrixXd::Identity(w.m, w.m) - w.A * encoder.e_id - w.B * encoder.e_attr;
  const Eigen::MatrixXd m_sigma = residual_map * w.sigma_x;
  grad.e_id += -2.0 * w.A.transpose() * m_sigma;
  grad.e_attr += -2.0 * w.B.transpose() * m_sigma;

  // disentangle: closed-form MI plus predictor-norm penalty
  const InducedBlocks b = induced_blocks(w, encoder);
  Eigen::LLT<Eigen::MatrixXd> llt_uu(b.s_uu);
  Eigen::LLT<Eigen::MatrixXd> llt_vv(b.s_vv);
  Eigen::MatrixXd joint(w.p + w.q, w.p + w.q);
  joint.topLeftCorner(w.p, w.p) = b.s_uu;
  joint.bottomRightCorner(w.q, w.q) = b.s_vv;
  joint.topRightCorner(w.p, w.q) = b.s_vu.transpose();
  joint.bottomLeftCorner(w.q, w.p) = b.s_vu;
  Eigen::LLT<Eigen::MatrixXd> llt_joint(joint);
  if (llt_uu.info() != Eigen::Success || llt_vv.info() != Eigen::Success ||
      llt_joint.info() != Eigen::Success)
    throw DegenerateCovarianceError("encoder_gradient: induced covariance "
                                    "lost definiteness");

  const Eigen::MatrixXd e_id_sigma = encoder.e_id * w.sigma_x;    // p x m
  const Eigen::MatrixXd e_attr_sigma = encoder.e_attr * w.sigma_x;  // q x m
  Eigen::MatrixXd f_sigma(w.p + w.q, w.m);
  f_sigma.topRows(w.p) = e_id_sigma;
  f_sigma.bottomRows(w.q) = e_attr_sigma;
  const Eigen::MatrixXd joint_solved = llt_joint.solve(f_sigma);
  // d MI/dE = S^{-1} E Sigma - [J^{-1} F Sigma]_block
  grad.e_id += ws.params.mu * (llt_uu.solve(e_id_sigma) - joint_solved.topRows(w.p));
  grad.e_attr +=
      ws.params.mu * (llt_vv.solve(e_attr_sigma) - joint_solved.bottomRows(w.q));

  // predictor penalty: P = || G K ||_F^2 with G = S_vu, K = S_uu^{-1}
  const Eigen::MatrixXd k = llt_uu.solve(Eigen::MatrixXd::Identity(w.p, w.p));
  const Eigen::MatrixXd& g = b.s_vu;
  const Eigen::MatrixXd gk = g * k;
  const Eigen::MatrixXd gbar = 2.0 * gk * k;                    // dP/dG
  const Eigen::MatrixXd h = g.transpose() * g;
  const Eigen::MatrixXd khk = k * h * k;
  const Eigen::MatrixXd kbar = -(khk * k + k * khk);            // dP/dS_uu
  grad.e_attr += ws.params.mu * ws.params.beta * (gbar * e_id_sigma);
  grad.e_id += ws.params.mu * ws.params.beta *
               (gbar.transpose() * e_attr_sigma + 2.0 * kbar * e_id_sigma);

  // privacy: hinge-masked cosine gradients through the attribute head
  if (!ws.oracle_raw.empty() && ws.params.lambda != 0.0) {
    const Eigen::MatrixXd v = encoder.e_attr * ws.samples;
    const PrivForward fwd = priv_forward(ws, v, /*with_grad=*/true);
    for (std::size_t j = 0; j < fwd.dcos_dsafe.size(); ++j)
      grad.e_attr += ws.params.lambda * ws.oracle_attr[j].transpose() *
                     fwd.dcos_dsafe[j] * ws.samples.transpose();
  }
  return grad;
}

OptimizeResult optimize_encoder(const WorldModel& world,
                                const std::vector<Oracle>& oracles,
                                const TradeoffParams& params, int steps,
                                double step_size, RngEngine& rng,
                                const OptimizeOptions& options) {
  if (steps < 1) throw std::invalid_argument("optimize_encoder: steps must be >= 1");
  EncoderWorkspace ws =
      make_encoder_workspace(world, oracles, params, options.n_samples, rng);

  OptimizeResult result;
  result.encoder.e_id = world.A.transpose();
  result.encoder.e_attr = world.B.transpose();

  EncoderGrad vel;
  vel.e_id = Eigen::MatrixXd::Zero(world.p, world.m);
  vel.e_attr = Eigen::MatrixXd::Zero(world.q, world.m);

  result.trace.reserve(static_cast<std::size_t>(steps) + 1);
  for (int step = 0; step <= steps; ++step) {
    ObjectiveBreakdown obj;
    try {
      obj = encoder_objective(ws, result.encoder);
    } catch (const DegenerateCovarianceError&) {
      if (step == 0) throw;  // a collapsed start is a configuration error
      throw TrainingDivergedError(
          "optimize_encoder: encoder covariance collapsed mid-run; try a "
          "smaller step");
    }
    if (!std::isfinite(obj.total))
      throw TrainingDivergedError(
          "optimize_encoder: objective became non-finite; try a smaller step");
    EncoderTraceRow row;
    row.step = step;
    row.util = obj.util;
    row.priv = obj.priv;
    row.disentangle = obj.disentangle;
    row.total = obj.total;
    row.eps_dis = induced_eps_dis(world, result.encoder);
    if (options.ksg_checkpoint_every > 0 &&
        (step % options.ksg_checkpoint_every == 0 || step == steps)) {
      // Estimator cross-check on a subsample; quadratic cost otherwise
      // dwarfs the optimization itself.
      const Eigen::Index n_ksg = std::min<Eigen::Index>(1024, ws.samples.cols());
      const Eigen::MatrixXd u =
          (result.encoder.e_id * ws.samples.leftCols(n_ksg)).transpose();
      const Eigen::MatrixXd v =
          (result.encoder.e_attr * ws.samples.leftCols(n_ksg)).transpose();
      row.eps_dis_ksg = ksg_mi(u, v, 3).value;
    }
    result.trace.push_back(row);
    if (step == steps) break;

    const EncoderGrad grad = encoder_gradient(ws, result.encoder);
    vel.e_id = options.momentum * vel.e_id + grad.e_id;
    vel.e_attr = options.momentum * vel.e_attr + grad.e_attr;
    result.encoder.e_id -= step_size * vel.e_id;
    result.encoder.e_attr -= step_size * vel.e_attr;
  }
  return result;
}

std::vector<double> pipeline_sims(const WorldModel& world,
                                  const LinearEncoder& encoder,
                                  const Oracle& oracle, int n_pairs,
                                  RngEngine& rng) {
  std::vector<double> sims;
  sims.reserve(static_cast<std::size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i) {
    const SamplePair pair = sample_pair(world, rng);
    const Eigen::VectorXd raw = generate(world, pair.z_id, pair.z_attr, rng);
    const Eigen::VectorXd v = encoder.e_attr * raw;
    const Eigen::VectorXd swap_id = normal_vector(world.p, rng);
    const Eigen::VectorXd safe = generate(world, swap_id, v, rng);
    sims.push_back(cosine_sim(embed(oracle, raw), embed(oracle, safe)));
  }
  return sims;
}

void save_encoder_trace(const std::vector<EncoderTraceRow>& trace,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_encoder_trace: cannot open " + path);
  out << "step,util,priv,disentangle,total,eps_dis,eps_dis_ksg\n";
  out.precision(12);
  for (const EncoderTraceRow& row : trace) {
    out << row.step << "," << row.util << "," << row.priv << ","
        << row.disentangle << "," << row.total << "," << row.eps_dis << ",";
    if (std::isnan(row.eps_dis_ksg))
      out << "";
    else
      out << row.eps_dis_ksg;
    out << "\n";
  }
}

}  // namespace anonkit
