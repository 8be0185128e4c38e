#include "fkqho/ground_state.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace fkqho {

GroundState ground_state(const RiccatiSolution& sol) {
  GroundState gs;
  gs.sol = sol;
  gs.lambda0 = 0.5 * (sol.S * sol.P_inf).trace();
  const double via_q = 0.5 * (sol.R * sol.Q_inf).trace();
  if (std::abs(gs.lambda0 - via_q) > 1e-8 * (1.0 + std::abs(gs.lambda0)))
    throw std::runtime_error("ground_state: Tr(S P_inf)/2 and Tr(R Q_inf)/2 disagree");
  if (!(gs.lambda0 > 0.0))
    throw std::runtime_error("ground_state: bottom eigenvalue must be positive");

  const Eigen::Index r = sol.r;
  const MatrixXd p_inv = sol.P_inf.partialPivLu().solve(MatrixXd::Identity(r, r));
  gs.P_h_inf = sym(MatrixXd(sym(p_inv + sol.Q_inf))
                       .partialPivLu()
                       .solve(MatrixXd::Identity(r, r)));
  gs.eta_inf = {VectorXd::Zero(r), sol.P_inf};
  gs.eta_h_inf = {VectorXd::Zero(r), gs.P_h_inf};
  return gs;
}

double log_h0(const GroundState& gs, const VectorXd& x) {
  return -0.5 * x.dot(gs.sol.Q_inf * x);
}

double eigen_residual(const GroundState& gs, const VectorXd& x) {
  const MatrixXd& Q = gs.sol.Q_inf;
  const VectorXd qx = Q * x;
  const double generator_term = -x.dot(gs.sol.A.transpose() * qx) +
                                0.5 * qx.dot(gs.sol.R * qx) -
                                0.5 * (gs.sol.R * Q).trace();
  const double v = 0.5 * x.dot(gs.sol.S * x);
  return generator_term - v + gs.lambda0;
}

GaussianState bg_transform(const GroundState& gs, const GaussianState& eta, int sign) {
  if (sign != 1 && sign != -1)
    throw std::invalid_argument("bg_transform: sign must be +1 or -1");
  const Eigen::Index r = gs.sol.r;
  Eigen::LLT<MatrixXd> llt(sym(eta.cov));
  if (llt.info() != Eigen::Success)
    throw std::domain_error("bg_transform: covariance must be invertible");
  const MatrixXd p_inv = llt.solve(MatrixXd::Identity(r, r));
  const MatrixXd prec = sign > 0 ? sym(p_inv + gs.sol.Q_inf) : sym(p_inv - gs.sol.Q_inf);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(prec);
  if (es.eigenvalues().minCoeff() <= 1e-10)
    throw std::domain_error(sign > 0
                                ? "bg_transform: reweighted precision not positive"
                                : "bg_transform: 1/h0 reweighting not integrable "
                                  "(cov^{-1} - Q_inf not positive)");
  const MatrixXd cov = sym(prec.partialPivLu().solve(MatrixXd::Identity(r, r)));
  return {cov * (p_inv * eta.mean), cov};
}

GaussianState h_process_moments(const GroundState& gs, const GaussianState& x0, double t) {
  if (t < 0.0) throw std::domain_error("h_process_moments: t must be nonnegative");
  const MatrixXd e = expm(gs.sol.drift_h, t);
  return {e * x0.mean, sym(e * x0.cov * e.transpose() + gramian_delta_h(gs.sol, t))};
}

}  // namespace fkqho
