#include "fkqho/gaussian.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fkqho {

void check_gaussian(const GaussianState& g) {
  if (g.cov.rows() != g.mean.size() || g.cov.cols() != g.mean.size())
    throw std::invalid_argument("GaussianState: covariance shape mismatch");
  const double scale = std::max(1.0, g.cov.norm());
  if ((g.cov - g.cov.transpose()).norm() > 1e-12 * scale)
    throw std::domain_error("GaussianState: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(g.cov));
  if (es.eigenvalues().minCoeff() < -1e-10 * scale)
    throw std::domain_error("GaussianState: covariance has negative eigenvalue");
}

double gaussian_log_pdf(const GaussianState& g, const VectorXd& x) {
  const Eigen::Index r = g.mean.size();
  Eigen::LLT<MatrixXd> llt(sym(g.cov));
  if (llt.info() != Eigen::Success)
    throw std::domain_error("gaussian_log_pdf: covariance not positive definite");
  const VectorXd d = x - g.mean;
  const VectorXd w = llt.matrixL().solve(d);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < r; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (r * std::log(2.0 * std::numbers::pi) + log_det + w.squaredNorm());
}

double gaussian_kl(const GaussianState& nu1, const GaussianState& nu2) {
  const Eigen::Index r = nu1.mean.size();
  Eigen::LLT<MatrixXd> llt2(sym(nu2.cov));
  if (llt2.info() != Eigen::Success)
    throw std::domain_error("gaussian_kl: reference covariance not positive definite");
  Eigen::LLT<MatrixXd> llt1(sym(nu1.cov));
  if (llt1.info() != Eigen::Success)
    throw std::domain_error("gaussian_kl: first covariance not positive definite");

  const MatrixXd ratio = llt2.solve(nu1.cov);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < r; ++i)
    log_det += 2.0 * (std::log(llt2.matrixL()(i, i)) - std::log(llt1.matrixL()(i, i)));
  const VectorXd d = nu1.mean - nu2.mean;
  return 0.5 * (ratio.trace() - r + log_det + d.dot(llt2.solve(d)));
}

double gaussian_w2(const GaussianState& nu1, const GaussianState& nu2) {
  const MatrixXd s2 = sqrt_psd(nu2.cov);
  const MatrixXd cross = sqrt_psd(sym(s2 * nu1.cov * s2));
  const double bures2 =
      std::max(0.0, nu1.cov.trace() + nu2.cov.trace() - 2.0 * cross.trace());
  return std::sqrt((nu1.mean - nu2.mean).squaredNorm() + bures2);
}

double gaussian_fisher(const GaussianState& nu1, const GaussianState& nu2) {
  return gaussian_fisher_weighted(nu1, nu2,
                                  MatrixXd::Identity(nu1.mean.size(), nu1.mean.size()));
}

double gaussian_fisher_weighted(const GaussianState& nu1, const GaussianState& nu2,
                                const MatrixXd& W) {
  const Eigen::Index r = nu1.mean.size();
  Eigen::LLT<MatrixXd> llt1(sym(nu1.cov)), llt2(sym(nu2.cov));
  if (llt1.info() != Eigen::Success || llt2.info() != Eigen::Success)
    throw std::domain_error("gaussian_fisher: covariances must be positive definite");
  const MatrixXd id = MatrixXd::Identity(r, r);
  const MatrixXd c = llt2.solve(id) - llt1.solve(id);
  const VectorXd shift = llt2.solve(nu1.mean - nu2.mean);
  return (c.transpose() * W * c * nu1.cov).trace() + shift.dot(W * shift);
}

double log_quadratic_moment(const GaussianState& g, const MatrixXd& Q) {
  const Eigen::Index r = g.mean.size();
  // det(I + cov Q) = det(I + s Q s) with s = cov^{1/2}; the symmetric form
  // also decides integrability.
  const MatrixXd s = sqrt_psd(g.cov);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(
      sym(MatrixXd::Identity(r, r) + s * Q * s));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::domain_error("log_quadratic_moment: exp(-x'Qx/2) not integrable under g");
  const double log_det = es.eigenvalues().array().log().sum();
  const MatrixXd m = MatrixXd::Identity(r, r) + g.cov * Q;
  const VectorXd w = m.partialPivLu().solve(g.mean);
  return -0.5 * log_det - 0.5 * g.mean.dot(Q * w);
}

}  // namespace fkqho
