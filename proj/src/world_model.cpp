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
#include "anonkit/world_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include "anonkit/core_geometry.hpp"

namespace anonkit {
namespace {

using nlohmann::json;

Eigen::MatrixXd orthonormal_columns(Eigen::Index rows, Eigen::Index cols,
                                    RngEngine& rng) {
  if (cols == 0) return Eigen::MatrixXd(rows, 0);
  const Eigen::MatrixXd g = normal_matrix(rows, cols, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

// logdet of a symmetric positive definite matrix; throws on indefiniteness.
double spd_logdet(const Eigen::MatrixXd& s, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success)
    throw DegenerateCovarianceError(std::string(what) +
                                    ": covariance is not positive definite "
                                    "(consider sigma_g > 0)");
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index want_rows,
                                 Eigen::Index want_cols, const char* name) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != want_rows)
    throw std::runtime_error(std::string("load_world: bad row count for ") + name);
  Eigen::MatrixXd m(want_rows, want_cols);
  for (Eigen::Index i = 0; i < want_rows; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != want_cols)
      throw std::runtime_error(std::string("load_world: bad column count for ") + name);
    for (Eigen::Index j = 0; j < want_cols; ++j)
      m(i, j) = row[static_cast<std::size_t>(j)].get<double>();
  }
  return m;
}

}  // namespace

void finalize_world(WorldModel& w) {
  if (w.p < 1 || w.q < 1 || w.m < 1)
    throw std::invalid_argument("world: dimensions must be positive");
  for (Eigen::Index i = 0; i < w.rho.size(); ++i)
    if (!(w.rho[i] >= 0.0 && w.rho[i] < 1.0))
      throw std::invalid_argument(
          "world: canonical correlations must lie in [0, 1); rho >= 1 makes "
          "the joint law degenerate");

  Eigen::MatrixXd joint = joint_covariance(w);
  Eigen::LLT<Eigen::MatrixXd> llt(joint);
  if (llt.info() != Eigen::Success)
    throw DegenerateCovarianceError("world: joint (z_id, z_attr) covariance "
                                    "is not positive definite");
  w.joint_chol = llt.matrixL();

  if (w.B.cols() > 0 && w.B.norm() > 0.0) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(w.B);
    w.attr_basis = qr.householderQ() * Eigen::MatrixXd::Identity(w.m, w.q);
  } else {
    w.attr_basis = Eigen::MatrixXd(w.m, 0);
  }

  w.sigma_x = w.A * w.A.transpose() + w.B * w.B.transpose() +
              w.A * w.cross * w.B.transpose() +
              w.B * w.cross.transpose() * w.A.transpose() +
              w.sigma_g * w.sigma_g * Eigen::MatrixXd::Identity(w.m, w.m);

  // Bayes linear readout of z_id from an image; the pseudo-inverse handles
  // singular output covariances (sigma_g = 0 with m > p + q).
  const Eigen::MatrixXd cov_id_x =
      w.A.transpose() + w.cross * w.B.transpose();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(w.sigma_x);
  w.id_extractor = cod.solve(cov_id_x.transpose()).transpose();
}

WorldModel make_world(Eigen::Index p, Eigen::Index q, Eigen::Index m,
                      const Eigen::VectorXd& rho, double sigma_g,
                      RngEngine& rng, std::uint64_t seed) {
  if (p < 1 || q < 1 || m < 1)
    throw std::invalid_argument("make_world: dimensions must be positive");
  if (rho.size() > std::min(p, q))
    throw std::invalid_argument("make_world: rho length must be <= min(p, q)");
  if (sigma_g < 0.0)
    throw std::invalid_argument("make_world: sigma_g must be nonnegative");
  if (m < std::max(p, q))
    throw std::invalid_argument(
        "make_world: m must be at least max(p, q) for orthonormal mixing");

  WorldModel w;
  w.p = p;
  w.q = q;
  w.m = m;
  w.rho = rho;
  w.sigma_g = sigma_g;
  w.seed = seed;

  // Joint frame when it fits: columns of A are then exactly orthogonal to
  // columns of B, which makes the semantic metric blind to identity swaps.
  if (m >= p + q) {
    const Eigen::MatrixXd frame = orthonormal_columns(m, p + q, rng);
    w.A = frame.leftCols(p);
    w.B = frame.rightCols(q);
  } else {
    w.A = orthonormal_columns(m, p, rng);
    w.B = orthonormal_columns(m, q, rng);
  }

  const Eigen::Index r = rho.size();
  const Eigen::MatrixXd u = orthonormal_columns(p, r, rng);
  const Eigen::MatrixXd v = orthonormal_columns(q, r, rng);
  w.cross = u * rho.asDiagonal() * v.transpose();

  finalize_world(w);
  return w;
}

Eigen::MatrixXd joint_covariance(const WorldModel& w) {
  Eigen::MatrixXd joint(w.p + w.q, w.p + w.q);
  joint.topLeftCorner(w.p, w.p) = Eigen::MatrixXd::Identity(w.p, w.p);
  joint.bottomRightCorner(w.q, w.q) = Eigen::MatrixXd::Identity(w.q, w.q);
  joint.topRightCorner(w.p, w.q) = w.cross;
  joint.bottomLeftCorner(w.q, w.p) = w.cross.transpose();
  return joint;
}

double epsilon_dis(const WorldModel& w) {
  double eps = 0.0;
  for (Eigen::Index i = 0; i < w.rho.size(); ++i)
    eps -= 0.5 * std::log1p(-w.rho[i] * w.rho[i]);
  return eps;
}

SamplePair sample_pair(const WorldModel& w, RngEngine& rng) {
  const Eigen::VectorXd z = w.joint_chol * normal_vector(w.p + w.q, rng);
  SamplePair pair;
  pair.z_id = z.head(w.p);
  pair.z_attr = z.tail(w.q);
  return pair;
}

std::pair<SamplePair, SamplePair> sample_genuine_pair(const WorldModel& w,
                                                      RngEngine& rng) {
  const Eigen::VectorXd z_id = normal_vector(w.p, rng);
  // z_attr | z_id ~ N(cross' z_id, I - cross' cross)
  const Eigen::MatrixXd cond_cov =
      Eigen::MatrixXd::Identity(w.q, w.q) - w.cross.transpose() * w.cross;
  Eigen::LLT<Eigen::MatrixXd> llt(cond_cov);
  if (llt.info() != Eigen::Success)
    throw DegenerateCovarianceError("sample_genuine_pair: conditional "
                                    "attribute covariance is singular");
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::VectorXd mean = w.cross.transpose() * z_id;
  SamplePair first{z_id, mean + l * normal_vector(w.q, rng)};
  SamplePair second{z_id, mean + l * normal_vector(w.q, rng)};
  return {first, second};
}

Eigen::VectorXd generate(const WorldModel& w, const Eigen::VectorXd& id_code,
                         const Eigen::VectorXd& attr_code, RngEngine& rng) {
  if (id_code.size() != w.p || attr_code.size() != w.q)
    throw std::invalid_argument("generate: code dimensions do not match world");
  Eigen::VectorXd out = w.A * id_code + w.B * attr_code;
  if (w.sigma_g > 0.0) out += w.sigma_g * normal_vector(w.m, rng);
  return out;
}

Eigen::VectorXd embed(const Oracle& oracle, const Eigen::VectorXd& image) {
  return oracle.W * image;
}

std::vector<double> impostor_sims(const WorldModel& w, const Oracle& oracle,
                                  int n_pairs, RngEngine& rng) {
  std::vector<double> sims;
  sims.reserve(static_cast<std::size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i) {
    const SamplePair a = sample_pair(w, rng);
    const SamplePair b = sample_pair(w, rng);
    const Eigen::VectorXd ia = generate(w, a.z_id, a.z_attr, rng);
    const Eigen::VectorXd ib = generate(w, b.z_id, b.z_attr, rng);
    sims.push_back(cosine_sim(embed(oracle, ia), embed(oracle, ib)));
  }
  return sims;
}

std::vector<double> genuine_sims(const WorldModel& w, const Oracle& oracle,
                                 int n_pairs, RngEngine& rng) {
  std::vector<double> sims;
  sims.reserve(static_cast<std::size_t>(n_pairs));
  for (int i = 0; i < n_pairs; ++i) {
    const auto [a, b] = sample_genuine_pair(w, rng);
    const Eigen::VectorXd ia = generate(w, a.z_id, a.z_attr, rng);
    const Eigen::VectorXd ib = generate(w, b.z_id, b.z_attr, rng);
    sims.push_back(cosine_sim(embed(oracle, ia), embed(oracle, ib)));
  }
  return sims;
}

Oracle make_oracle(const WorldModel& w, Eigen::Index d_f, RngEngine& rng,
                   int impostor_pairs) {
  if (d_f < 1) throw std::invalid_argument("make_oracle: d_f must be >= 1");
  Oracle oracle;
  // Random isometric readout of the identity estimate. Orthonormal rows keep
  // the embedding isotropic for decoupled worlds, so attack statistics match
  // the impostor law exactly when there is nothing to find.
  const Eigen::MatrixXd readout =
      d_f <= w.p ? orthonormal_columns(w.p, d_f, rng).transpose()
                 : orthonormal_columns(d_f, w.p, rng);
  Eigen::MatrixXd raw = readout * w.id_extractor;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(raw);
  const double top = svd.singularValues()(0);
  if (!(top > 0.0)) throw std::runtime_error("make_oracle: degenerate embedding");
  oracle.W = raw / top;
  oracle.lipschitz = 1.0;

  const std::vector<double> sims = impostor_sims(w, oracle, impostor_pairs, rng);
  double mean = 0.0;
  for (double s : sims) mean += s;
  mean /= static_cast<double>(sims.size());
  double ss = 0.0;
  for (double s : sims) ss += (s - mean) * (s - mean);
  oracle.impostor_mean = mean;
  oracle.impostor_sd = std::sqrt(ss / static_cast<double>(sims.size() - 1));
  // Default operating point: 1% false accept rate on the impostor sample.
  std::vector<double> sorted = sims;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(0.99 * static_cast<double>(sorted.size())));
  oracle.theta = sorted[std::min(sorted.size(), std::max<std::size_t>(rank, 1)) - 1];
  return oracle;
}

namespace {

double leakage_from_blocks(const Eigen::MatrixXd& cross_id_safe,
                           const Eigen::MatrixXd& sigma_safe, Eigen::Index p) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma_safe);
  if (llt.info() != Eigen::Success)
    throw DegenerateCovarianceError(
        "closed_form_leakage: output covariance is singular (try sigma_g > 0)");
  const Eigen::MatrixXd solved = llt.solve(cross_id_safe.transpose());
  const Eigen::MatrixXd residual =
      Eigen::MatrixXd::Identity(p, p) - cross_id_safe * solved;
  const double logdet = spd_logdet(residual, "closed_form_leakage");
  const double mi = -0.5 * logdet;
  return mi < 0.0 ? 0.0 : mi;
}

}  // namespace

double closed_form_leakage(const WorldModel& w) {
  // I_safe = A z' + B z_attr + sigma n with z' independent of everything.
  const Eigen::MatrixXd sigma_safe =
      w.A * w.A.transpose() + w.B * w.B.transpose() +
      w.sigma_g * w.sigma_g * Eigen::MatrixXd::Identity(w.m, w.m);
  const Eigen::MatrixXd cross_id_safe = w.cross * w.B.transpose();
  return leakage_from_blocks(cross_id_safe, sigma_safe, w.p);
}

double closed_form_leakage(const WorldModel& w, const Eigen::MatrixXd& post_map) {
  if (post_map.cols() != w.m)
    throw std::invalid_argument("closed_form_leakage: post map width must be m");
  const Eigen::MatrixXd sigma_safe =
      w.A * w.A.transpose() + w.B * w.B.transpose() +
      w.sigma_g * w.sigma_g * Eigen::MatrixXd::Identity(w.m, w.m);
  const Eigen::MatrixXd mapped = post_map * sigma_safe * post_map.transpose();
  const Eigen::MatrixXd cross_id_safe =
      w.cross * w.B.transpose() * post_map.transpose();
  return leakage_from_blocks(cross_id_safe, mapped, w.p);
}

void save_world(const WorldModel& w, const std::string& path) {
  json doc;
  doc["d_id"] = w.p;
  doc["d_attr"] = w.q;
  doc["d_out"] = w.m;
  doc["sigma_g"] = w.sigma_g;
  doc["seed"] = w.seed;
  json rho = json::array();
  for (Eigen::Index i = 0; i < w.rho.size(); ++i) rho.push_back(w.rho[i]);
  doc["rho"] = std::move(rho);
  doc["A"] = matrix_to_json(w.A);
  doc["B"] = matrix_to_json(w.B);
  doc["cross"] = matrix_to_json(w.cross);
  if (w.attr_shape) {
    doc["attr_shape"] = {{"channels", w.attr_shape->channels},
                         {"height", w.attr_shape->height},
                         {"width", w.attr_shape->width}};
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_world: cannot open " + path);
  out << doc.dump(2) << "\n";
}

WorldModel load_world(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_world: cannot open " + path);
  json doc = json::parse(in);
  WorldModel w;
  w.p = doc.at("d_id").get<Eigen::Index>();
  w.q = doc.at("d_attr").get<Eigen::Index>();
  w.m = doc.at("d_out").get<Eigen::Index>();
  w.sigma_g = doc.at("sigma_g").get<double>();
  w.seed = doc.at("seed").get<std::uint64_t>();
  const json& rho = doc.at("rho");
  w.rho.resize(static_cast<Eigen::Index>(rho.size()));
  for (std::size_t i = 0; i < rho.size(); ++i)
    w.rho[static_cast<Eigen::Index>(i)] = rho[i].get<double>();
  w.A = matrix_from_json(doc.at("A"), w.m, w.p, "A");
  w.B = matrix_from_json(doc.at("B"), w.m, w.q, "B");
  w.cross = matrix_from_json(doc.at("cross"), w.p, w.q, "cross");
  if (doc.contains("attr_shape")) {
    AttrShape s;
    s.channels = doc["attr_shape"].at("channels").get<int>();
    s.height = doc["attr_shape"].at("height").get<int>();
    s.width = doc["attr_shape"].at("width").get<int>();
    w.attr_shape = s;
  }
  finalize_world(w);
  return w;
}

}  // namespace anonkit
