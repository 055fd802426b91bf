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
#ifndef ANONKIT_RANDOM_HPP_
#define ANONKIT_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace anonkit {

// Every sampling operation takes an explicit stream; nothing in the library
// touches global RNG state. One engine per thread is the caller's contract.
using RngEngine = std::mt19937_64;

// splitmix64 finalizer. Used both to decorrelate raw seeds before they reach
// the engine and as the mixing step of derive_seed below.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over a label string, for counter-based seed derivation.
inline std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Counter-based derivation: hash(master, label, index). Suites and trials get
// independent streams regardless of execution order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
  return mix64(master ^ mix64(hash_label(label)) ^ mix64(index));
}

inline RngEngine make_engine(std::uint64_t seed) {
  return RngEngine(mix64(seed));
}

inline double normal_draw(RngEngine& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline double uniform_draw(RngEngine& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

inline Eigen::VectorXd normal_vector(Eigen::Index n, RngEngine& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols,
                                     RngEngine& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

}  // namespace anonkit

#endif  // ANONKIT_RANDOM_HPP_
