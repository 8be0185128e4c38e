#pragma once

#include "fkqho/gaussian.hpp"
#include "fkqho/riccati.hpp"

namespace fkqho {

/// Bottom of the spectrum: h0(x) = exp(-x'Q_inf x / 2) stored through its
/// exponent matrix, the zero-point energy, the conjugated stable drift and
/// both stationary laws.
struct GroundState {
  RiccatiSolution sol;
  double lambda0;
  MatrixXd P_h_inf;         // (P_inf^{-1} + Q_inf)^{-1}
  GaussianState eta_inf;    // N(0, P_inf)
  GaussianState eta_h_inf;  // N(0, P_h_inf)
};

/// Builds the ground state; throws if the two trace routes to lambda0
/// disagree beyond 1e-8 relative.
GroundState ground_state(const RiccatiSolution& sol);

/// log h0(x); pointwise evaluation stays in log scale.
double log_h0(const GroundState& gs, const VectorXd& x);

/// h0^{-1} L(h0)(x) - V(x) + lambda0, via the exact gradient/Hessian algebra.
double eigen_residual(const GroundState& gs, const VectorXd& x);

/// sign = +1 reweights by h0, sign = -1 by 1/h0 (requires cov^{-1} > Q_inf).
GaussianState bg_transform(const GroundState& gs, const GaussianState& eta, int sign);

/// Law of the conjugated process at time t from a Gaussian start.
GaussianState h_process_moments(const GroundState& gs, const GaussianState& x0, double t);

inline DecayConstants decay_constants(const GroundState& gs, double delta = 0.1) {
  return decay_constants(gs.sol, delta);
}

}  // namespace fkqho
