#pragma once

// Shared generators for randomized tests: controllable and reversible models
// drawn from a seeded stream so every run replays the same sample.

#include "fkqho/model.hpp"
#include "fkqho/rng.hpp"

#include <Eigen/Eigenvalues>

namespace fkqho::testing {

inline MatrixXd random_matrix(StreamRng& rng, Eigen::Index rows, Eigen::Index cols,
                              double scale = 1.0) {
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

inline VectorXd random_vector(StreamRng& rng, Eigen::Index r, double scale = 1.0) {
  VectorXd v(r);
  for (Eigen::Index i = 0; i < r; ++i) v(i) = scale * rng.normal();
  return v;
}

inline MatrixXd random_spd(StreamRng& rng, Eigen::Index r, double ridge = 0.3) {
  const MatrixXd g = random_matrix(rng, r, r);
  return g * g.transpose() / static_cast<double>(r) + ridge * MatrixXd::Identity(r, r);
}

inline MatrixXd random_psd(StreamRng& rng, Eigen::Index r) {
  const MatrixXd g = random_matrix(rng, r, r);
  return g * g.transpose() / static_cast<double>(r);
}

/// Controllable model with moderate norms; B may be rank deficient.
inline ModelParams random_controllable_model(StreamRng& rng, Eigen::Index r) {
  for (int attempt = 0; attempt < 20; ++attempt) {
    MatrixXd a = random_matrix(rng, r, r, 1.0 / std::sqrt(static_cast<double>(r)));
    const double norm_cap = 1.2;
    const double na = a.norm();
    if (na > norm_cap) a *= norm_cap / na;
    const Eigen::Index r1 = 1 + static_cast<Eigen::Index>(rng.uniform_index(r));
    const MatrixXd b = random_matrix(rng, r, r1, 1.0 / std::sqrt(static_cast<double>(r1)));
    const MatrixXd s = random_spd(rng, r);
    ModelParams params(a, b, s);
    if (validate(params).passed) return params;
  }
  throw std::runtime_error("random_controllable_model: no valid sample in 20 attempts");
}

/// Reversible model: R SPD, A = R M with M symmetric makes AR exactly symmetric.
inline ModelParams random_reversible_model(StreamRng& rng, Eigen::Index r,
                                           bool unit_diffusion = false) {
  for (int attempt = 0; attempt < 20; ++attempt) {
    const MatrixXd big_r =
        unit_diffusion ? MatrixXd(MatrixXd::Identity(r, r)) : random_spd(rng, r, 0.4);
    const MatrixXd m = sym(random_matrix(rng, r, r, 0.6 / std::sqrt(static_cast<double>(r))));
    const MatrixXd a = big_r * m;
    const MatrixXd s = random_spd(rng, r);
    ModelParams params(a, sqrt_psd(big_r), s);
    if (validate(params).passed && is_reversible(params)) return params;
  }
  throw std::runtime_error("random_reversible_model: no valid sample in 20 attempts");
}

}  // namespace fkqho::testing
