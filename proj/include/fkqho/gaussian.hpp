#pragma once

#include "fkqho/numerics.hpp"

namespace fkqho {

/// Mean vector plus symmetric PSD covariance; Dirac masses carry cov = 0.
struct GaussianState {
  VectorXd mean;
  MatrixXd cov;

  static GaussianState dirac(const VectorXd& x) {
    return {x, MatrixXd::Zero(x.size(), x.size())};
  }
};

/// Throws std::domain_error unless cov is symmetric (1e-12 relative) with
/// eigenvalues >= -1e-10.
void check_gaussian(const GaussianState& g);

double gaussian_log_pdf(const GaussianState& g, const VectorXd& x);

/// Ent(nu1 | nu2), closed form; nu2.cov must be invertible.
double gaussian_kl(const GaussianState& nu1, const GaussianState& nu2);

/// Exact 2-Wasserstein distance (Bures coupling).
double gaussian_w2(const GaussianState& nu1, const GaussianState& nu2);

/// J(nu1 | nu2) = Tr(C P1 C') + ||P2^{-1}(m1 - m2)||^2 with C = P2^{-1} - P1^{-1}.
double gaussian_fisher(const GaussianState& nu1, const GaussianState& nu2);

/// Same Fisher functional with the score weighted by W: E[grad' W grad].
double gaussian_fisher_weighted(const GaussianState& nu1, const GaussianState& nu2,
                                const MatrixXd& W);

/// log E[exp(-x'Qx/2)] under g, defined whenever I + cov Q stays positive.
double log_quadratic_moment(const GaussianState& g, const MatrixXd& Q);

}  // namespace fkqho
